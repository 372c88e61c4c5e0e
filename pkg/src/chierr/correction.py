"""Small unitary corrections estimated from error matrices."""
from __future__ import annotations

import enum
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from .composition import GateWithError, Mode, compose_errors_first_order, compose_exact
from .error_matrix import Convention, ErrorMatrix, as_convention, to_error_matrix
from .exceptions import ConvergenceError, ValidationError
from .pauli import build_basis, expand_in_pauli, from_pauli, phase_fix
from .process import chi_from_unitary


class Placement(str, enum.Enum):
    AFTER_GATE = "after_gate"
    BEFORE_GATE = "before_gate"


_PLACEMENT_CONVENTION = {
    Placement.AFTER_GATE: Convention.ERROR_AFTER,
    Placement.BEFORE_GATE: Convention.ERROR_BEFORE,
}


@dataclass(frozen=True)
class CorrectionPlan:
    u_corr: np.ndarray = field(repr=False)
    correctable_set: tuple[int, ...]
    predicted_gain: float
    placement: Placement = Placement.AFTER_GATE
    iterations: int = 1
    residual: float = 0.0

    def unitary(self) -> np.ndarray:
        """Correction operator.

        If ``sum_n u_n E_n`` is already unitary (iterated plans) it is returned
        as is; otherwise the first-order coefficients are unitarized as
        ``exp(i H)`` with ``H = sum_n (u_n / i) E_n`` over the non-identity terms.
        """
        n = len(self.u_corr)
        basis = build_basis(int(round(np.log(n) / np.log(4))))
        direct = from_pauli(self.u_corr, basis)
        if np.abs(direct.conj().T @ direct - np.eye(basis.dim)).max() < 1e-12:
            return direct
        h = np.zeros(n)
        h[1:] = (self.u_corr[1:] / 1j).real
        return scipy.linalg.expm(1j * from_pauli(h, basis))


def _resolve_set(correctable_set, n_qubits):
    if correctable_set is None:
        return tuple(range(1, 4**n_qubits))
    basis = build_basis(n_qubits)
    out = []
    for item in correctable_set:
        idx = basis.index(item) if isinstance(item, str) else int(item)
        if idx == 0:
            raise ValidationError("the identity direction is not a correction")
        out.append(idx)
    if not out:
        raise ValidationError("correctable set is empty")
    return tuple(sorted(set(out)))


def suggest_correction(err: ErrorMatrix, correctable_set=None, placement=Placement.AFTER_GATE) -> CorrectionPlan:
    """Cancel ``Im(chi_n0)`` on the correctable directions to first order."""
    placement = Placement(placement)
    err = as_convention(err, _PLACEMENT_CONVENTION[placement])
    cset = _resolve_set(correctable_set, err.n_qubits)
    chi = err.chi
    f = chi[0, 0].real
    im = chi[:, 0].imag
    u = np.zeros(chi.shape[0], dtype=complex)
    u[0] = 1.0
    idx = np.array(cset)
    u[idx] = -1j * im[idx] / f
    gain = float(np.sum(im[idx] ** 2) / f)
    return CorrectionPlan(u, cset, gain, placement)


def apply_correction(gate: GateWithError, plan: CorrectionPlan, mode=Mode.EXACT) -> GateWithError:
    """Attach the plan's correction unitary to the gate (same desired unitary)."""
    mode = Mode.parse(mode)
    u_corr = plan.unitary()
    dev = np.abs(u_corr.conj().T @ u_corr - np.eye(u_corr.shape[0])).max()
    if dev > 1e-6:
        raise ValidationError("correction cannot be unitarized", deviation=float(dev))
    chi_corr = chi_from_unitary(u_corr)
    d = gate.desired.shape[0]
    conv = _PLACEMENT_CONVENTION[plan.placement]
    err = as_convention(gate.error, conv)
    if mode is Mode.EXACT:
        if plan.placement is Placement.AFTER_GATE:
            chi = compose_exact(chi_corr, err.chi)
        else:
            chi = compose_exact(err.chi, chi_corr)
    else:
        a = ErrorMatrix(err.chi, Convention.ERROR_AFTER, np.eye(d))
        b = ErrorMatrix(chi_corr, Convention.ERROR_AFTER, np.eye(d))
        chi = compose_errors_first_order(a, b, additive=mode is Mode.ADDITIVE).chi
    new_err = ErrorMatrix(chi, conv, gate.desired)
    return GateWithError(gate.desired, as_convention(new_err, Convention.ERROR_AFTER))


def iterate_correction(chi, u_des, correctable_set=None, max_iters: int = 10, tol: float = 1e-10,
                       placement=Placement.AFTER_GATE) -> CorrectionPlan:
    """Repeat estimate -> exact composition until ``max |Im chi_n0|`` over the set is below ``tol``.

    Iteration also stops when an iteration improves the fidelity by less than
    ``tol`` (decoherence floor); the plan then carries the remaining residual.
    Raises :class:`ConvergenceError` if ``max_iters`` is exhausted.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be at least 1")
    placement = Placement(placement)
    conv = _PLACEMENT_CONVENTION[placement]
    chi = np.asarray(chi, dtype=complex)
    u_des = np.asarray(u_des, dtype=complex)
    d = u_des.shape[0]
    err = to_error_matrix(chi, u_des, conv)
    cset = _resolve_set(correctable_set, err.n_qubits)
    idx = np.array(cset)
    f_start = err.fidelity
    u_acc = np.eye(d, dtype=complex)
    current = err.chi
    residual = float(np.abs(current[idx, 0].imag).max())
    it = 0
    while residual > tol:
        if it >= max_iters:
            raise ConvergenceError("correction did not converge", residual=residual, iterations=it)
        plan = suggest_correction(ErrorMatrix(current, conv, u_des), cset, placement)
        u_step = plan.unitary()
        step_chi = chi_from_unitary(u_step)
        if placement is Placement.AFTER_GATE:
            new = compose_exact(step_chi, current)
            u_acc = u_step @ u_acc
        else:
            new = compose_exact(current, step_chi)
            u_acc = u_acc @ u_step
        it += 1
        gain = new[0, 0].real - current[0, 0].real
        current = new
        residual = float(np.abs(current[idx, 0].imag).max())
        if gain < tol and residual > tol:
            warnings.warn(f"correction stalled at residual {residual:.3g}", RuntimeWarning, stacklevel=2)
            break
    coeffs, _ = phase_fix(expand_in_pauli(u_acc))
    return CorrectionPlan(
        coeffs,
        cset,
        float(current[0, 0].real - f_start),
        placement,
        iterations=it,
        residual=residual,
    )


# ---------------------------------------------------------------------------
# CZ example: single-qubit Z phases plus an optional CZ-angle tweak


@dataclass(frozen=True)
class CzPhaseCorrection:
    """Correction ``diag(1, e^{i phi1}, e^{i phi2}, e^{i phi3})``, ``phi3 = phi1 + phi2 + phi_cz``.

    Basis order is ``|00>, |01>, |10>, |11>``: ``phi1`` is a Z phase on the
    second qubit (the ``IZ`` direction) and ``phi2`` on the first (``ZI``).
    """

    phi1: float
    phi2: float
    phi_cz: float = 0.0
    predicted_gain: float = 0.0

    def __post_init__(self):
        angles = (self.phi1, self.phi2, self.phi_cz)
        if not all(np.isfinite(angles)):
            raise ValidationError("correction angles must be finite")
        if max(abs(a) for a in angles) > 0.5:
            warnings.warn("CZ correction angles exceed 0.5 rad; small-angle formulas degrade",
                          RuntimeWarning, stacklevel=3)

    @property
    def phi3(self) -> float:
        return self.phi1 + self.phi2 + self.phi_cz

    def unitary(self) -> np.ndarray:
        phases = np.array([0.0, self.phi1, self.phi2, self.phi3])
        # global phase chosen so that u_II is real
        return np.diag(np.exp(1j * (phases - phases.sum() / 4)))


def cz_corrections(err: ErrorMatrix, correct_cz: bool = True) -> CzPhaseCorrection:
    """Z-phase corrections for a CZ-type gate from ``Im`` of the IZ, ZI, ZZ column entries."""
    if err.chi.shape != (16, 16):
        raise ValidationError("CZ corrections need a two-qubit error matrix")
    basis = build_basis(2)
    chi = err.chi
    f = chi[0, 0].real
    iz, zi, zz = (chi[basis.index(k), 0].imag for k in ("IZ", "ZI", "ZZ"))
    if correct_cz:
        return CzPhaseCorrection(
            2 * (iz + zz) / f,
            2 * (zi + zz) / f,
            -4 * zz / f,
            (iz**2 + zi**2 + zz**2) / f,
        )
    return CzPhaseCorrection(2 * iz / f, 2 * zi / f, 0.0, (iz**2 + zi**2) / f)


def iterate_cz_correction(err: ErrorMatrix, correct_cz: bool = True, max_iters: int = 10,
                          tol: float = 1e-12) -> CzPhaseCorrection:
    """Refine :func:`cz_corrections` by exact composition until the Z-column residual is below ``tol``.

    The corrections are diagonal, so angles from successive rounds simply add.
    The returned ``predicted_gain`` is the first-round first-order estimate.
    """
    err = as_convention(err, Convention.ERROR_AFTER)
    basis = build_basis(2)
    rows = [basis.index(k) for k in (("IZ", "ZI", "ZZ") if correct_cz else ("IZ", "ZI"))]
    first = cz_corrections(err, correct_cz)
    phi = np.array([first.phi1, first.phi2, first.phi_cz])
    residual = np.inf
    for _ in range(max_iters):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            u = CzPhaseCorrection(*phi).unitary()
        chi = compose_exact(chi_from_unitary(u), err.chi)
        residual = float(np.abs(chi[rows, 0].imag).max())
        if residual <= tol:
            break
        step = cz_corrections(ErrorMatrix(chi, Convention.ERROR_AFTER, err.reference_unitary), correct_cz)
        phi = phi + np.array([step.phi1, step.phi2, step.phi_cz])
    else:
        raise ConvergenceError("CZ correction did not converge", residual=residual)
    return CzPhaseCorrection(*phi, predicted_gain=first.predicted_gain)
