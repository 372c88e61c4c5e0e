"""State-preparation and measurement (SPAM) errors.

SPAM is modelled as two near-identity channels, ``chi_prep`` before and
``chi_meas`` after the gate.  To first order the measured error matrix is

    chi_err_exp = chi_err + W(U) (chi_prep - chi_I) W(U)^dag + (chi_meas - chi_I)

and the deviations are identified from tomography of (assumed perfect)
single-qubit calibration gates by linear least squares.  Deviations
``P`` with ``W(g) P W(g)^dag = P`` for every calibration gate ``g`` cannot
be attributed to either side; that component is assigned to ``chi_meas``.
"""
from __future__ import annotations

import itertools
import warnings
from dataclasses import dataclass, field

import numpy as np

from .composition import compose_exact
from .error_matrix import Convention, ErrorMatrix, as_convention, from_error_matrix, to_error_matrix, w_matrix
from .exceptions import RankDeficiencyError, ValidationError
from .gates import CALIBRATION_GATES, kron
from .pauli import build_basis, n_qubits_for_dim
from .process import basis_for_chi, identity_chi, is_trace_preserving
from .rng import stream

PINV_RCOND = 1e-10
CLAMP_TOL = 1e-6


@dataclass(frozen=True)
class SpamModel:
    chi_prep: np.ndarray = field(repr=False)
    chi_meas: np.ndarray = field(repr=False)
    depolarizing_split: str = "meas"

    def __post_init__(self):
        prep = np.asarray(self.chi_prep, dtype=complex)
        meas = np.asarray(self.chi_meas, dtype=complex)
        if prep.shape != meas.shape:
            raise ValidationError("prep and meas matrices differ in size")
        basis_for_chi(prep)
        for name, chi in (("prep", prep), ("meas", meas)):
            if chi[0, 0].real < 0.5:
                raise ValidationError(f"chi_{name} is not close to the identity", chi_00=float(chi[0, 0].real))
            if not is_trace_preserving(chi, 1e-8):
                raise ValidationError(f"chi_{name} is not trace preserving")
        if self.depolarizing_split not in ("meas", "prep"):
            raise ValidationError("depolarizing_split must be 'meas' or 'prep'")
        object.__setattr__(self, "chi_prep", prep)
        object.__setattr__(self, "chi_meas", meas)

    @classmethod
    def trivial(cls, n_qubits: int) -> "SpamModel":
        return cls(identity_chi(n_qubits), identity_chi(n_qubits))

    @property
    def n_qubits(self) -> int:
        return basis_for_chi(self.chi_prep).n_qubits

    @property
    def delta_prep(self) -> np.ndarray:
        return self.chi_prep - identity_chi(self.n_qubits)

    @property
    def delta_meas(self) -> np.ndarray:
        return self.chi_meas - identity_chi(self.n_qubits)

    def validity(self) -> dict:
        """Smallest eigenvalues of both channels (negative means not a physical channel)."""
        lp = float(np.linalg.eigvalsh(self.chi_prep).min())
        lm = float(np.linalg.eigvalsh(self.chi_meas).min())
        return {"min_eig_prep": lp, "min_eig_meas": lm, "physical": min(lp, lm) >= -1e-10}


def spam_forward(err_true: ErrorMatrix, spam: SpamModel, mode: str = "first_order") -> ErrorMatrix:
    """Error matrix that tomography would report with SPAM present (same convention as input)."""
    if err_true.chi.shape != spam.chi_prep.shape:
        raise ValidationError("SPAM model and error matrix differ in size")
    conv = err_true.convention
    u = err_true.reference_unitary
    if mode == "first_order":
        err = as_convention(err_true, Convention.ERROR_AFTER)
        w = w_matrix(u)
        chi = err.chi + w @ spam.delta_prep @ w.conj().T + spam.delta_meas
        return as_convention(ErrorMatrix(chi, Convention.ERROR_AFTER, u), conv)
    if mode == "exact":
        full = compose_exact(spam.chi_meas, compose_exact(from_error_matrix(err_true), spam.chi_prep))
        return to_error_matrix(full, u, conv)
    raise ValidationError(f"unknown mode {mode!r}")


# ---------------------------------------------------------------------------
# calibration


def calibration_labels(n_qubits: int) -> list[str]:
    """All ``5**N`` tensor products of ``I, X, Y, sqrt(X), sqrt(Y)``, identity first."""
    names = list(CALIBRATION_GATES)
    return ["⊗".join(p) for p in itertools.product(names, repeat=n_qubits)]


def calibration_unitary(label: str) -> np.ndarray:
    return kron(*(CALIBRATION_GATES[p] for p in label.split("⊗")))


@dataclass(frozen=True)
class CalibrationSet:
    """Measured error matrices of calibration gates, keyed by label such as ``"X⊗√Y"``."""

    measured: dict

    def __post_init__(self):
        if not self.measured:
            raise ValidationError("calibration set is empty")
        sizes = {e.chi.shape for e in self.measured.values()}
        if len(sizes) != 1:
            raise ValidationError("calibration error matrices differ in size")
        identity = self.identity_label
        if identity not in self.measured:
            raise ValidationError("calibration set must contain the identity gate", expected=identity)
        for label, err in self.measured.items():
            u = calibration_unitary(label)
            if u.shape != err.reference_unitary.shape or np.abs(u - err.reference_unitary).max() > 1e-10:
                raise ValidationError(f"reference unitary of {label!r} does not match its label")

    @property
    def n_qubits(self) -> int:
        return next(iter(self.measured.values())).n_qubits

    @property
    def identity_label(self) -> str:
        shape = next(iter(self.measured.values())).chi.shape[0]
        n = n_qubits_for_dim(int(round(np.sqrt(shape))))
        return "⊗".join(["I"] * n)

    @property
    def labels(self) -> list[str]:
        return list(self.measured)

    def subset(self, labels) -> "CalibrationSet":
        return CalibrationSet({k: self.measured[k] for k in labels})

    @classmethod
    def synthetic(cls, spam: SpamModel, labels=None, mode: str = "first_order") -> "CalibrationSet":
        """Calibration data for perfect gates seen through ``spam``."""
        labels = calibration_labels(spam.n_qubits) if labels is None else list(labels)
        out = {}
        for label in labels:
            err = ErrorMatrix.identity(spam.n_qubits, calibration_unitary(label))
            out[label] = spam_forward(err, spam, mode)
        return cls(out)


def invariant_subspace(n_qubits: int) -> np.ndarray:
    """Orthonormal basis (columns, vectorized) of deviations invariant under all local calibration gates.

    These are the diagonal matrices that are constant on each sector of
    Pauli labels sharing the same set of non-identity qubits.
    """
    basis = build_basis(n_qubits)
    size = basis.size
    cols = []
    for support in itertools.product((False, True), repeat=n_qubits):
        v = np.zeros((size, size), dtype=complex)
        for n in range(size):
            label = basis.label(n)
            if all((ch != "I") == s for ch, s in zip(label, support)):
                v[n, n] = 1.0
        cols.append(v.reshape(-1) / np.linalg.norm(v))
    return np.stack(cols, axis=1)


@dataclass(frozen=True)
class SpamIdentification:
    model: SpamModel
    residual: float
    null_dimension: int


def _design(labels):
    rows = []
    for label in labels:
        w = w_matrix(calibration_unitary(label))
        size = w.shape[0]
        rows.append(np.hstack([np.kron(w, w.conj()), np.eye(size * size)]))
    return np.vstack(rows)


def _solve(cal: CalibrationSet) -> SpamIdentification:
    n = cal.n_qubits
    size = 4**n
    labels = cal.labels
    chi_i = identity_chi(n)
    a = _design(labels)
    b = np.concatenate(
        [(as_convention(cal.measured[k], Convention.ERROR_AFTER).chi - chi_i).reshape(-1) for k in labels]
    )
    u, s, vh = np.linalg.svd(a, full_matrices=False)
    keep = s > PINV_RCOND * s[0]
    x = vh[keep].conj().T @ ((u[:, keep].conj().T @ b) / s[keep])
    null = vh[~keep].conj().T
    known = invariant_subspace(n)
    expected = np.vstack([known, -known]) / np.sqrt(2)
    if null.shape[1] > known.shape[1]:
        # directions in the null space not explained by the invariant deviations
        extra = null - expected @ (expected.conj().T @ null)
        uu, ss, _ = np.linalg.svd(extra, full_matrices=False)
        bad = uu[:, ss > 1e-6]
        basis = build_basis(n)
        dirs = []
        for k in range(bad.shape[1]):
            half = bad[: size * size, k].reshape(size, size)
            if np.abs(half).max() < 1e-8:
                half = bad[size * size:, k].reshape(size, size)
            i, j = np.unravel_index(np.argmax(np.abs(half)), half.shape)
            dirs.append(f"{basis.label(i)},{basis.label(j)}")
        raise RankDeficiencyError(
            "calibration set leaves SPAM directions unresolved",
            null_dimension=int(null.shape[1]),
            expected=int(known.shape[1]),
            unresolved=sorted(set(dirs)),
        )
    dp = x[: size * size]
    dm = x[size * size:]
    # move the unidentifiable invariant part of the prep deviation to the meas side
    shift = known @ (known.conj().T @ dp)
    dp = (dp - shift).reshape(size, size)
    dm = (dm + shift).reshape(size, size)
    dp = (dp + dp.conj().T) / 2
    dm = (dm + dm.conj().T) / 2
    residual = float(np.linalg.norm(a @ np.concatenate([dp.reshape(-1), dm.reshape(-1)]) - b))
    model = SpamModel(chi_i + dp, chi_i + dm, "meas")
    return SpamIdentification(model, residual, int(null.shape[1]))


def identify_spam(cal: CalibrationSet, report: bool = False):
    """Least-squares SPAM identification; ``report=True`` also returns residual and null dimension."""
    result = _solve(cal)
    return result if report else result.model


def identify_spam_subset(cal: CalibrationSet, subset_seed: int, subset_size: int, report: bool = False):
    """Identification from a seeded random subset of the calibration gates (identity always included)."""
    labels = cal.labels
    identity = cal.identity_label
    others = [k for k in labels if k != identity]
    if not 1 <= subset_size <= len(labels):
        raise ValidationError("subset size out of range", size=subset_size, available=len(labels))
    pick = stream(subset_seed).choice(len(others), size=subset_size - 1, replace=False)
    chosen = [identity] + [others[i] for i in sorted(pick)]
    return identify_spam(cal.subset(chosen), report=report)


# ---------------------------------------------------------------------------
# subtraction


def _clamp_diagonal(chi):
    diag = chi.diagonal().real
    neg = diag < 0
    if not np.any(neg):
        return chi
    worst = float(diag.min())
    chi = chi.copy()
    small = neg & (diag >= -CLAMP_TOL)
    idx = np.flatnonzero(small)
    chi[idx, idx] = 0.0
    if worst < -1e-12:
        warnings.warn(f"SPAM subtraction produced negative diagonal elements (min {worst:.3g})",
                      RuntimeWarning, stacklevel=3)
    return chi


def subtract_spam(err_exp: ErrorMatrix, spam: SpamModel, mode: str = "full") -> ErrorMatrix:
    """Remove SPAM from a measured error matrix (first order); result keeps the input convention.

    ``mode="prep_negligible"`` subtracts only the measurement deviation in the
    error-after language; ``mode="meas_negligible"`` subtracts only the
    preparation deviation in the error-before language.
    """
    conv = err_exp.convention
    u = err_exp.reference_unitary
    if mode == "full":
        err = as_convention(err_exp, Convention.ERROR_AFTER)
        w = w_matrix(u)
        chi = err.chi - w @ spam.delta_prep @ w.conj().T - spam.delta_meas
        out_conv = Convention.ERROR_AFTER
    elif mode == "prep_negligible":
        chi = as_convention(err_exp, Convention.ERROR_AFTER).chi - spam.delta_meas
        out_conv = Convention.ERROR_AFTER
    elif mode == "meas_negligible":
        chi = as_convention(err_exp, Convention.ERROR_BEFORE).chi - spam.delta_prep
        out_conv = Convention.ERROR_BEFORE
    else:
        raise ValidationError(f"unknown mode {mode!r}")
    return as_convention(ErrorMatrix(_clamp_diagonal(chi), out_conv, u), conv)


def spam_fidelity_ratio(f_exp: float, f_identity: float) -> float:
    """Gate fidelity estimate ``F_exp / F_I`` from the measured gate and no-gate fidelities."""
    if f_identity == 0:
        raise ZeroDivisionError("identity fidelity is zero")
    if not 0 < f_identity <= 1:
        raise ValidationError("identity fidelity must lie in (0, 1]", value=f_identity)
    ratio = f_exp / f_identity
    if not 0 <= ratio <= 1:
        warnings.warn(f"fidelity ratio {ratio:.6g} outside [0, 1]; clamped", RuntimeWarning, stacklevel=2)
        ratio = min(max(ratio, 0.0), 1.0)
    return float(ratio)
