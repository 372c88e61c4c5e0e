"""Pauli-basis process matrices.

A process matrix ``chi`` is a plain complex ``(d**2, d**2)`` array acting as

    rho_fin = sum_mn chi[m, n] E_m rho_in E_n^dag

with ``E_n`` the Pauli operators of :mod:`chierr.pauli`.
"""
from __future__ import annotations

import numpy as np

from . import config
from .exceptions import ValidationError
from .pauli import PauliBasis, build_basis, expand_in_pauli, n_qubits_for_dim, phase_fix


def basis_for_chi(chi) -> PauliBasis:
    chi = np.asarray(chi)
    if chi.ndim != 2 or chi.shape[0] != chi.shape[1]:
        raise ValidationError(f"process matrix must be square, got shape {chi.shape}")
    d = int(round(np.sqrt(chi.shape[0])))
    if d * d != chi.shape[0]:
        raise ValidationError(f"process matrix size {chi.shape[0]} is not d**2")
    return build_basis(n_qubits_for_dim(d))


def identity_chi(n_qubits: int) -> np.ndarray:
    """Process matrix of the memory (identity) operation."""
    size = 4**n_qubits
    chi = np.zeros((size, size), dtype=complex)
    chi[0, 0] = 1.0
    return chi


def check_unitary(u, tol: float | None = None) -> np.ndarray:
    u = np.asarray(u, dtype=complex)
    tol = config.UNITARY_TOL if tol is None else tol
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        raise ValidationError(f"unitary must be square, got shape {u.shape}")
    dev = np.abs(u.conj().T @ u - np.eye(u.shape[0])).max()
    if dev > tol:
        raise ValidationError("matrix is not unitary", deviation=float(dev))
    return u


def check_density_matrix(rho, tol: float = 1e-10) -> np.ndarray:
    rho = np.asarray(rho, dtype=complex)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1]:
        raise ValidationError(f"density matrix must be square, got shape {rho.shape}")
    if np.abs(rho - rho.conj().T).max() > tol:
        raise ValidationError("density matrix is not Hermitian")
    if abs(np.trace(rho) - 1) > tol:
        raise ValidationError("density matrix does not have unit trace", trace=complex(np.trace(rho)))
    lam = np.linalg.eigvalsh((rho + rho.conj().T) / 2).min()
    if lam < -tol:
        raise ValidationError("density matrix has a negative eigenvalue", eigenvalue=float(lam))
    return rho


def check_process_matrix(chi, tol: float | None = None) -> np.ndarray:
    """Validate Hermiticity and positivity; raises with the offending eigenvalue."""
    chi = np.asarray(chi, dtype=complex)
    basis_for_chi(chi)
    tol = config.POSITIVITY_TOL if tol is None else tol
    herm_dev = np.abs(chi - chi.conj().T).max()
    if herm_dev > config.VALIDATION_TOL:
        raise ValidationError("process matrix is not Hermitian", deviation=float(herm_dev))
    lam = np.linalg.eigvalsh((chi + chi.conj().T) / 2).min()
    if lam < -tol * max(abs(np.trace(chi)), 1.0):
        raise ValidationError("process matrix has a negative eigenvalue", eigenvalue=float(lam))
    return chi


def chi_from_unitary(u) -> np.ndarray:
    """``chi_mn = u_m u_n^*`` with the global phase fixed so ``u_0 >= 0``."""
    u = check_unitary(u)
    coeffs, _ = phase_fix(expand_in_pauli(u))
    return np.outer(coeffs, coeffs.conj())


def chi_from_kraus(terms, allow_non_tp: bool = False, tol: float = 1e-8) -> np.ndarray:
    """Process matrix of ``rho -> sum_k w_k A_k rho A_k^dag``.

    ``terms`` is an iterable of ``(weight, operator)`` pairs or bare operators
    (weight 1).
    """
    pairs = []
    for term in terms:
        if isinstance(term, tuple):
            w, op = term
        else:
            w, op = 1.0, term
        if w < 0:
            raise ValidationError("Kraus weights must be non-negative", weight=w)
        pairs.append((float(w), np.asarray(op, dtype=complex)))
    if not pairs:
        raise ValidationError("at least one Kraus operator is required")
    d = pairs[0][1].shape[0]
    basis = build_basis(n_qubits_for_dim(d))
    completeness = sum(w * op.conj().T @ op for w, op in pairs)
    dev = np.abs(completeness - np.eye(d)).max()
    if dev > tol and not allow_non_tp:
        raise ValidationError("Kraus operators are not complete", deviation=float(dev))
    chi = np.zeros((basis.size, basis.size), dtype=complex)
    for w, op in pairs:
        a = expand_in_pauli(op, basis)
        chi += w * np.outer(a, a.conj())
    return chi


def apply(chi, rho) -> np.ndarray:
    """Apply the process ``chi`` to the density matrix ``rho``."""
    chi = np.asarray(chi, dtype=complex)
    rho = np.asarray(rho, dtype=complex)
    basis = basis_for_chi(chi)
    if rho.shape != (basis.dim, basis.dim):
        raise ValidationError(f"density matrix shape {rho.shape} does not match d={basis.dim}")
    e = basis.operators
    left = np.einsum("mij,jk->mik", e, rho)
    # E_n^dag = E_n for Pauli operators
    return np.einsum("mn,mik,nkl->il", chi, left, e)


def tp_operator(chi) -> np.ndarray:
    """``sum_mn chi_mn E_n^dag E_m``; equals the identity for trace-preserving chi."""
    chi = np.asarray(chi, dtype=complex)
    e = basis_for_chi(chi).operators
    return np.einsum("mn,nij,mjk->ik", chi, e, e)


def is_trace_preserving(chi, tol: float = 1e-10) -> bool:
    op = tp_operator(chi)
    return bool(np.abs(op - np.eye(op.shape[0])).max() <= tol)


def _clip_real(value, what):
    if abs(value.imag) > 1e-10:
        raise ValidationError(f"{what} has a significant imaginary part", imag=float(value.imag))
    x = value.real
    if -1e-10 <= x < 0:
        x = 0.0
    elif 1 < x <= 1 + 1e-10:
        x = 1.0
    return x


def process_fidelity(chi, chi_des) -> float:
    """``F = Tr(chi_des chi)`` for a rank-1 (unitary) desired process."""
    chi = np.asarray(chi, dtype=complex)
    chi_des = np.asarray(chi_des, dtype=complex)
    lam = np.linalg.eigvalsh((chi_des + chi_des.conj().T) / 2)
    if lam[-2] > 1e-8:
        raise ValidationError("desired process is not rank-1; use uhlmann_fidelity", second_eigenvalue=float(lam[-2]))
    return _clip_real(np.trace(chi_des @ chi), "process fidelity")


def psd_sqrt(m) -> np.ndarray:
    """Square root of a Hermitian PSD matrix with eigenvalues clipped at 0."""
    m = np.asarray(m, dtype=complex)
    lam, vec = np.linalg.eigh((m + m.conj().T) / 2)
    if lam.min() < -config.POSITIVITY_TOL * max(abs(lam).max(), 1.0) * 100:
        raise ValidationError("matrix has a negative eigenvalue", eigenvalue=float(lam.min()))
    lam = np.clip(lam, 0, None)
    return (vec * np.sqrt(lam)) @ vec.conj().T


def uhlmann_fidelity(chi, chi_des) -> float:
    """``(Tr sqrt(sqrt(chi) chi_des sqrt(chi)))**2``."""
    s = psd_sqrt(chi)
    inner = s @ np.asarray(chi_des, dtype=complex) @ s
    lam = np.clip(np.linalg.eigvalsh((inner + inner.conj().T) / 2), 0, None)
    return float(np.sum(np.sqrt(lam)) ** 2)


def average_fidelity(f_chi: float, d: int) -> float:
    """Average state fidelity from the process fidelity."""
    if not 0 <= f_chi <= 1:
        raise ValidationError("process fidelity must lie in [0, 1]", value=f_chi)
    return 1 - (1 - f_chi) * d / (d + 1)


def chi_to_superoperator(chi) -> np.ndarray:
    """Row-major superoperator ``S`` with ``vec(rho_fin) = S vec(rho_in)``."""
    chi = np.asarray(chi, dtype=complex)
    basis = basis_for_chi(chi)
    e = basis.operators
    d = basis.dim
    s = np.einsum("mn,mij,nkl->ikjl", chi, e, e.conj())
    return s.reshape(d * d, d * d)


def superoperator_to_chi(superop) -> np.ndarray:
    """Inverse of :func:`chi_to_superoperator` (the ``E_m (x) E_n^*`` are orthogonal)."""
    s = np.asarray(superop, dtype=complex)
    d = int(round(np.sqrt(s.shape[0])))
    basis = build_basis(n_qubits_for_dim(d))
    e = basis.operators
    s4 = s.reshape(d, d, d, d)
    return np.einsum("mij,nkl,ikjl->mn", e.conj(), e, s4) / d**2
