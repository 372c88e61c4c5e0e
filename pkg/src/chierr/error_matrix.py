"""Error matrices: the process with the desired unitary factored out.

Two conventions are supported:

``ERROR_AFTER``
    ``rho_fin = sum chi_err[m, n] E_m U rho U^dag E_n``  (error acts after U)
``ERROR_BEFORE``
    ``rho_fin = sum chi_err[m, n] U E_m rho E_n U^dag``  (error acts before U)

Both share the diagonal structure ``chi_err[0, 0] = F`` (process fidelity).
"""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field, replace

import numpy as np

from .exceptions import ValidationError
from .pauli import build_basis, n_qubits_for_dim
from .process import basis_for_chi, check_unitary, identity_chi


class Convention(str, enum.Enum):
    ERROR_AFTER = "error_after"
    ERROR_BEFORE = "error_before"

    @classmethod
    def parse(cls, value) -> "Convention":
        if isinstance(value, cls):
            return value
        key = str(value).lower().replace("-", "_")
        aliases = {"after": cls.ERROR_AFTER, "before": cls.ERROR_BEFORE}
        if key in aliases:
            return aliases[key]
        return cls(key)

    def other(self) -> "Convention":
        return Convention.ERROR_BEFORE if self is Convention.ERROR_AFTER else Convention.ERROR_AFTER


@dataclass(frozen=True)
class ErrorMatrix:
    """Error process matrix tagged with its convention and reference unitary."""

    chi: np.ndarray = field(repr=False)
    convention: Convention
    reference_unitary: np.ndarray = field(repr=False)

    def __post_init__(self):
        chi = np.asarray(self.chi, dtype=complex)
        basis = basis_for_chi(chi)
        u = np.asarray(self.reference_unitary, dtype=complex)
        if u.shape != (basis.dim, basis.dim):
            raise ValidationError("reference unitary does not match the error matrix dimension")
        check_unitary(u)
        object.__setattr__(self, "chi", chi)
        object.__setattr__(self, "reference_unitary", u)
        object.__setattr__(self, "convention", Convention.parse(self.convention))

    @property
    def n_qubits(self) -> int:
        return n_qubits_for_dim(self.reference_unitary.shape[0])

    @property
    def fidelity(self) -> float:
        return float(self.chi[0, 0].real)

    def with_chi(self, chi) -> "ErrorMatrix":
        return replace(self, chi=chi)

    @classmethod
    def identity(cls, n_qubits: int, unitary=None, convention=Convention.ERROR_AFTER) -> "ErrorMatrix":
        if unitary is None:
            unitary = np.eye(2**n_qubits)
        return cls(identity_chi(n_qubits), convention, unitary)


def _factor_matrix(u, convention: Convention) -> np.ndarray:
    basis = build_basis(n_qubits_for_dim(u.shape[0]))
    e = basis.operators
    ud = u.conj().T
    if convention is Convention.ERROR_AFTER:
        # V_mn = Tr(E_m^dag E_n U^dag) / d
        prod = np.einsum("nij,jk->nik", e, ud)
        v = np.einsum("mij,nij->mn", e.conj(), prod)
    else:
        # V~_mn = Tr(E_m^dag U^dag E_n) / d
        prod = np.einsum("ij,njk->nik", ud, e)
        v = np.einsum("mij,nij->mn", e.conj(), prod)
    return v / basis.dim


def to_error_matrix(chi, u_des, convention=Convention.ERROR_AFTER) -> ErrorMatrix:
    """Factor the desired unitary out of ``chi``."""
    convention = Convention.parse(convention)
    chi = np.asarray(chi, dtype=complex)
    u_des = check_unitary(u_des)
    basis = basis_for_chi(chi)
    if u_des.shape != (basis.dim, basis.dim):
        raise ValidationError("unitary dimension does not match the process matrix")
    v = _factor_matrix(u_des, convention)
    return ErrorMatrix(v @ chi @ v.conj().T, convention, u_des)


def from_error_matrix(err: ErrorMatrix) -> np.ndarray:
    """Recover the full process matrix ``chi`` from an error matrix."""
    v = _factor_matrix(err.reference_unitary, err.convention)
    # V is unitary, so chi = V^dag chi_err V
    return v.conj().T @ err.chi @ v


def w_matrix(u) -> np.ndarray:
    """``W_mn = Tr(E_m^dag U E_n U^dag) / d``: Pauli-space image of conjugation by U."""
    u = check_unitary(u)
    basis = build_basis(n_qubits_for_dim(u.shape[0]))
    e = basis.operators
    conj = np.einsum("ij,njk,kl->nil", u, e, u.conj().T)
    return np.einsum("mij,nij->mn", e.conj(), conj) / basis.dim


def convert_convention(err: ErrorMatrix) -> ErrorMatrix:
    """Move the error to the other side of the reference unitary."""
    w = w_matrix(err.reference_unitary)
    if err.convention is Convention.ERROR_BEFORE:
        chi = w @ err.chi @ w.conj().T
    else:
        chi = w.conj().T @ err.chi @ w
    return ErrorMatrix(chi, err.convention.other(), err.reference_unitary)


def as_convention(err: ErrorMatrix, convention) -> ErrorMatrix:
    convention = Convention.parse(convention)
    return err if err.convention is convention else convert_convention(err)


# ---------------------------------------------------------------------------
# Kraus form


@dataclass(frozen=True)
class KrausDecomposition:
    """Eigen-decomposition ``chi_err = sum_k w_k a^(k) a^(k)^dag``.

    ``coefficients[:, k]`` holds the Pauli coefficients of ``A_k`` (unit
    vector, so ``Tr(A_k^dag A_k) = d``).
    """

    weights: np.ndarray
    coefficients: np.ndarray = field(repr=False)

    @property
    def operators(self) -> np.ndarray:
        basis = build_basis(n_qubits_for_dim(int(round(np.sqrt(self.coefficients.shape[0])))))
        return np.einsum("nk,nij->kij", self.coefficients, basis.operators)

    def reconstruct(self) -> np.ndarray:
        a = self.coefficients
        return (a * self.weights) @ a.conj().T


def _fix_vector_phase(vec, tol=1e-12):
    mags = np.abs(vec)
    k = int(np.flatnonzero(mags >= mags.max() - tol)[0])
    return vec * (np.conj(vec[k]) / mags[k])


def kraus_decompose(err, neg_tol: float = 1e-8) -> KrausDecomposition:
    chi = err.chi if isinstance(err, ErrorMatrix) else np.asarray(err, dtype=complex)
    lam, vec = np.linalg.eigh((chi + chi.conj().T) / 2)
    if lam.min() < -neg_tol:
        raise ValidationError("error matrix has a negative eigenvalue", eigenvalue=float(lam.min()))
    order = np.argsort(lam)[::-1]
    lam = np.clip(lam[order], 0, None)
    vec = vec[:, order]
    vec = np.column_stack([_fix_vector_phase(vec[:, k]) for k in range(vec.shape[1])])
    return KrausDecomposition(lam, vec)


# ---------------------------------------------------------------------------
# coherent / decoherence split and the unitary-error estimate


@dataclass(frozen=True)
class CoherentSplit:
    lambda0: float
    a0: np.ndarray = field(repr=False)
    chi_coh: np.ndarray = field(repr=False)
    chi_dec: np.ndarray = field(repr=False)
    unitary_error: float
    decoherence_error: float
    flagged: bool = False


COHERENT_SPLIT_WARN = 0.2


def extract_unitary_error(err: ErrorMatrix) -> np.ndarray:
    """First-order unitary-error coefficients ``u_n = i Im(chi_n0) / F``, ``u_0 = 1``."""
    chi = err.chi
    f = chi[0, 0].real
    u = 1j * chi[:, 0].imag / f
    u[0] = 1.0
    return u


def coherent_split(err: ErrorMatrix, method: str = "lambda0") -> CoherentSplit:
    """Crude separation ``chi_err = chi_coh + chi_dec``.

    ``method="lambda0"`` estimates the coherent weight from
    ``lambda0 = F / (1 - sum_{n>0} |chi_0n|^2)`` and builds a rank-1
    ``chi_coh = lambda0 a a^dag``.  ``method="simple"`` uses
    ``chi_coh_mn = chi_m0 chi_0n`` for ``m, n > 0`` with the first row and
    column copied from ``chi_err`` and ``chi_coh_00 = F``.
    """
    chi = err.chi
    f = float(chi[0, 0].real)
    flagged = 1 - f > COHERENT_SPLIT_WARN
    if flagged:
        warnings.warn(
            f"infidelity {1 - f:.3g} exceeds {COHERENT_SPLIT_WARN}; first-order split is unreliable",
            RuntimeWarning,
            stacklevel=2,
        )
    column = chi[1:, 0]
    denom = 1 - np.sum(np.abs(column) ** 2)
    if denom <= 0:
        raise ValidationError("coherent-split denominator is not positive", denominator=float(denom))
    lambda0 = f / denom
    a0 = np.empty(chi.shape[0], dtype=complex)
    a0[0] = np.sqrt(f / lambda0)
    a0[1:] = column / lambda0
    if method == "lambda0":
        chi_coh = lambda0 * np.outer(a0, a0.conj())
    elif method == "simple":
        col = chi[:, 0]
        chi_coh = np.outer(col, col.conj())
        chi_coh[0, :] = chi[0, :]
        chi_coh[:, 0] = chi[:, 0]
    else:
        raise ValueError(f"unknown method {method!r}")
    u = extract_unitary_error(err)
    return CoherentSplit(
        lambda0=float(lambda0),
        a0=a0,
        chi_coh=chi_coh,
        chi_dec=chi - chi_coh,
        unitary_error=float(np.sum(np.abs(u[1:]) ** 2)),
        decoherence_error=float(1 - lambda0),
        flagged=flagged,
    )
