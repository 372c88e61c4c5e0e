"""Composition of process and error matrices."""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .error_matrix import Convention, ErrorMatrix, as_convention, w_matrix
from .exceptions import ValidationError
from .process import basis_for_chi


class Mode(str, enum.Enum):
    EXACT = "exact"
    FIRST_ORDER = "first_order"
    ADDITIVE = "additive"

    @classmethod
    def parse(cls, value) -> "Mode":
        if isinstance(value, cls):
            return value
        return cls(str(value).lower().replace("-", "_"))


def compose_exact(second, first) -> np.ndarray:
    """Process matrix of ``first`` followed by ``second``.

    Contracts the Pauli product table, ``chi_ab = sum chi1_mn chi2_pq
    S[a,p,m] S[b,q,n]^*`` with ``S[a,p,m] = Tr(E_p E_m E_a^dag)/d``.
    """
    chi2 = np.asarray(second, dtype=complex)
    chi1 = np.asarray(first, dtype=complex)
    if chi1.shape != chi2.shape:
        raise ValidationError(f"dimension mismatch: {chi1.shape} vs {chi2.shape}")
    s = basis_for_chi(chi1).structure
    left = np.einsum("apm,mn->apn", s, chi1)
    return np.einsum("apn,pq,bqn->ab", left, chi2, s.conj(), optimize=True)


def composed_fidelity_exact(err1: ErrorMatrix, err2: ErrorMatrix) -> float:
    """Exact ``chi_00`` of the composition: ``sum_mn chi1_mn chi2_mn``."""
    c1 = err1.chi if isinstance(err1, ErrorMatrix) else np.asarray(err1)
    c2 = err2.chi if isinstance(err2, ErrorMatrix) else np.asarray(err2)
    # symmetric by construction; Hermiticity makes the sum real
    return float(np.sum(c1 * c2).real)


def _check_memory_pair(err1: ErrorMatrix, err2: ErrorMatrix):
    for err in (err1, err2):
        if err.convention is not Convention.ERROR_AFTER:
            raise ValidationError("first-order composition needs error_after matrices")
        d = err.reference_unitary.shape[0]
        if np.abs(err.reference_unitary - np.eye(d)).max() > 1e-12:
            raise ValidationError(
                "first-order composition needs identity references; align them with jump_over first"
            )
    if err1.chi.shape != err2.chi.shape:
        raise ValidationError("dimension mismatch")


def compose_errors_first_order(err1: ErrorMatrix, err2: ErrorMatrix, additive: bool = False) -> ErrorMatrix:
    """First-order composition of two memory error processes.

    Off-diagonal elements add as ``F2 chi1 + F1 chi2``; the diagonal keeps the
    interference term ``2 Im(chi1_0n) Im(chi2_0n)``.  With ``additive=True``
    every element except ``chi_00`` is the plain sum ``chi1 + chi2`` and
    ``chi_00 = 1 - sum_{n>0} chi_nn``.
    """
    _check_memory_pair(err1, err2)
    c1, c2 = err1.chi, err2.chi
    f1, f2 = c1[0, 0].real, c2[0, 0].real
    if additive:
        chi = c1 + c2
        chi[0, 0] = 0
        chi[0, 0] = 1 - np.trace(chi).real
        return ErrorMatrix(chi, Convention.ERROR_AFTER, err1.reference_unitary)
    chi = f2 * c1 + f1 * c2
    im1 = c1[0, :].imag
    im2 = c2[0, :].imag
    diag = np.arange(1, c1.shape[0])
    chi[diag, diag] += 2 * im1[1:] * im2[1:]
    chi[0, 0] = f1 * f2 - 2 * np.sum(im1[1:] * im2[1:])
    return ErrorMatrix(chi, Convention.ERROR_AFTER, err1.reference_unitary)


def jump_over(err: ErrorMatrix, u) -> ErrorMatrix:
    """Move an error_after process past a later unitary ``u`` (``W chi W^dag``).

    The reference unitary of the result is ``u @ err.reference_unitary``.
    """
    if err.convention is not Convention.ERROR_AFTER:
        raise ValidationError("jump_over expects an error_after matrix")
    w = w_matrix(u)
    chi = w @ err.chi @ w.conj().T
    # W_{0n} = delta_{0n}, so chi_00 is untouched; pin it to avoid rounding drift
    chi[0, 0] = err.chi[0, 0]
    return ErrorMatrix(chi, Convention.ERROR_AFTER, np.asarray(u) @ err.reference_unitary)


@dataclass(frozen=True)
class GateWithError:
    """Desired unitary plus its error_after matrix."""

    desired: np.ndarray
    error: ErrorMatrix

    def __post_init__(self):
        desired = np.asarray(self.desired, dtype=complex)
        err = as_convention(self.error, Convention.ERROR_AFTER)
        if np.abs(err.reference_unitary - desired).max() > 1e-10:
            raise ValidationError("error reference unitary differs from the desired gate")
        object.__setattr__(self, "desired", desired)
        object.__setattr__(self, "error", err)

    @classmethod
    def perfect(cls, u) -> "GateWithError":
        n = int(round(np.log2(np.asarray(u).shape[0])))
        return cls(u, ErrorMatrix.identity(n, u))

    @property
    def fidelity(self) -> float:
        return self.error.fidelity


def _as_memory(chi, d) -> ErrorMatrix:
    return ErrorMatrix(chi, Convention.ERROR_AFTER, np.eye(d))


def compose_gates(first: GateWithError, second: GateWithError, mode=Mode.EXACT) -> GateWithError:
    """Gate ``second.desired @ first.desired`` with its combined error."""
    mode = Mode.parse(mode)
    u1, u2 = first.desired, second.desired
    if u1.shape != u2.shape:
        raise ValidationError("dimension mismatch")
    d = u1.shape[0]
    moved = _as_memory(jump_over(_as_memory(first.error.chi, d), u2).chi, d)
    e2 = _as_memory(second.error.chi, d)
    if mode is Mode.EXACT:
        chi = compose_exact(e2.chi, moved.chi)
    else:
        chi = compose_errors_first_order(moved, e2, additive=mode is Mode.ADDITIVE).chi
    u = u2 @ u1
    return GateWithError(u, ErrorMatrix(chi, Convention.ERROR_AFTER, u))


def compose_sequence(gates, mode=Mode.EXACT) -> GateWithError:
    """Left fold of :func:`compose_gates` in time order."""
    gates = list(gates)
    if not gates:
        raise ValueError("empty gate sequence")
    acc = gates[0]
    for g in gates[1:]:
        acc = compose_gates(acc, g, mode)
    return acc
