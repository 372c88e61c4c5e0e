"""First-order error matrix of a decoherent gate.

Every channel contributes, per unit time, the Pauli-space matrix

    B_mn = b_m b_n^* - (c_m delta_n0 + c_n^* delta_m0) / 2

with ``B = sum b_n E_n`` and ``B^dag B = sum c_n E_n``.  The contribution is
moved to the start of the gate (error-before) with ``W(t)^dag . W(t)`` and
to the end (error-after) with ``W_rem . W_rem^dag``.
"""
from __future__ import annotations

import math

import numpy as np
import scipy.linalg

from ..error_matrix import Convention, ErrorMatrix, w_matrix
from ..pauli import build_basis, expand_in_pauli, n_qubits_for_dim
from ..process import identity_chi
from .master import schedule_unitary
from .schedule import GateSchedule

MAX_RATE_STEP = 1e-3
MAX_PHASE_STEP = 0.05


def channel_pattern(channel, basis) -> np.ndarray:
    """Rate-free pattern ``B_mn`` of one channel (no ``b0`` handling)."""
    b = expand_in_pauli(channel.operator, basis)
    c = expand_in_pauli(channel.operator.conj().T @ channel.operator, basis)
    pattern = np.outer(b, b.conj())
    pattern[:, 0] -= 0.5 * c
    pattern[0, :] -= 0.5 * c.conj()
    return pattern


def hamiltonian_pattern(h, basis) -> np.ndarray:
    """First-order pattern of a small Hamiltonian perturbation, per unit time."""
    coeffs = expand_in_pauli(h, basis).real
    out = np.zeros((basis.size, basis.size), dtype=complex)
    out[1:, 0] = -1j * coeffs[1:]
    out[0, 1:] = 1j * coeffs[1:]
    return out


def _substeps(segment) -> int:
    rate = sum(ch.rate for ch in segment.channels)
    lam = np.linalg.eigvalsh(segment.hamiltonian)
    spread = lam.max() - lam.min() if lam.size else 0.0
    n_rate = rate * segment.duration / MAX_RATE_STEP
    n_phase = spread * segment.duration / MAX_PHASE_STEP
    return max(1, math.ceil(n_rate), math.ceil(n_phase))


def _deviation_before(schedule: GateSchedule) -> np.ndarray:
    """``int W(t)^dag (sum Gamma B + H_a pattern) W(t) dt`` by midpoint quadrature."""
    basis = build_basis(n_qubits_for_dim(schedule.dim))
    total = np.zeros((basis.size, basis.size), dtype=complex)
    u_start = np.eye(schedule.dim, dtype=complex)
    for seg in schedule.segments:
        gen = np.zeros_like(total)
        for ch in seg.channels:
            if ch.rate == 0:
                continue
            shifted, h_a = ch.normalize()
            gen += ch.rate * channel_pattern(shifted, basis)
            if np.abs(h_a).max() > 0:
                gen += hamiltonian_pattern(h_a, basis)
        n = _substeps(seg)
        dt = seg.duration / n
        if not np.any(gen):
            u_start = scipy.linalg.expm(-1j * seg.hamiltonian * seg.duration) @ u_start
            continue
        step = scipy.linalg.expm(-1j * seg.hamiltonian * dt)
        u_mid = scipy.linalg.expm(-1j * seg.hamiltonian * dt / 2) @ u_start
        for _ in range(n):
            w = w_matrix(u_mid)
            total += dt * (w.conj().T @ gen @ w)
            u_mid = step @ u_mid
        u_start = scipy.linalg.expm(-1j * seg.hamiltonian * seg.duration) @ u_start
    return total


def first_order_error(schedule: GateSchedule, convention=Convention.ERROR_AFTER,
                      second_order: bool = False) -> ErrorMatrix:
    """First-order error matrix of ``schedule`` relative to its Hamiltonian evolution.

    With ``second_order=True`` the interior elements ``m, n > 0`` receive the
    product term ``chi_m0 chi_0n`` of the first-order column and row.
    """
    convention = Convention.parse(convention)
    u_gate = schedule_unitary(schedule)
    n = n_qubits_for_dim(schedule.dim)
    dev = _deviation_before(schedule)
    if convention is Convention.ERROR_AFTER:
        w = w_matrix(u_gate)
        dev = w @ dev @ w.conj().T
    chi = identity_chi(n) + dev
    if second_order:
        chi[1:, 1:] += np.outer(chi[1:, 0], chi[0, 1:])
    chi = (chi + chi.conj().T) / 2
    return ErrorMatrix(chi, convention, u_gate)


def first_order_fidelity(schedule: GateSchedule) -> float:
    """``1 - sum Gamma t sum_{n>0} |b_n|^2``; never looks at the Hamiltonian."""
    loss = 0.0
    for seg in schedule.segments:
        for ch in seg.channels:
            b = ch.operator
            d = b.shape[0]
            b0 = np.trace(b) / d
            # sum_{n>0} |b_n|^2 = (Tr(B^dag B)/d) - |b0|^2 by Hilbert-Schmidt orthogonality
            weight = np.vdot(b, b).real / d - abs(b0) ** 2
            loss += ch.rate * seg.duration * weight
    return float(1 - loss)
