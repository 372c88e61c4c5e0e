"""Exact integration of the Lindblad master equation for piecewise-constant schedules."""
from __future__ import annotations

import numpy as np
import scipy.linalg

from ..exceptions import ValidationError
from ..process import check_density_matrix, superoperator_to_chi
from .schedule import GateSchedule, Segment


def liouvillian(hamiltonian, channels=()) -> np.ndarray:
    """Row-major generator: ``vec(rho_dot) = L vec(rho)``."""
    h = np.asarray(hamiltonian, dtype=complex)
    d = h.shape[0]
    eye = np.eye(d)
    gen = -1j * (np.kron(h, eye) - np.kron(eye, h.T))
    for ch in channels:
        b = ch.operator
        bb = b.conj().T @ b
        gen += ch.rate * (np.kron(b, b.conj()) - 0.5 * np.kron(bb, eye) - 0.5 * np.kron(eye, bb.T))
    return gen


def segment_superoperator(segment: Segment, duration: float | None = None) -> np.ndarray:
    t = segment.duration if duration is None else duration
    return scipy.linalg.expm(liouvillian(segment.hamiltonian, segment.channels) * t)


def exact_superoperator(schedule: GateSchedule) -> np.ndarray:
    d = schedule.dim
    total = np.eye(d * d, dtype=complex)
    for seg in schedule.segments:
        total = segment_superoperator(seg) @ total
    return total


def propagate_density(schedule: GateSchedule, rho0) -> np.ndarray:
    """Final density matrix after the whole schedule."""
    rho0 = check_density_matrix(rho0)
    d = schedule.dim
    if rho0.shape != (d, d):
        raise ValidationError("density matrix does not match the schedule dimension")
    out = (exact_superoperator(schedule) @ rho0.reshape(-1)).reshape(d, d)
    return (out + out.conj().T) / 2


def exact_channel_chi(schedule: GateSchedule) -> np.ndarray:
    """Process matrix of the schedule (dimension must be a power of two; see ``pad_to_qubits``)."""
    return superoperator_to_chi(exact_superoperator(schedule))


def schedule_unitary(schedule: GateSchedule) -> np.ndarray:
    """Time-ordered ``exp(-i H t)`` product ignoring the decoherence channels."""
    u = np.eye(schedule.dim, dtype=complex)
    for seg in schedule.segments:
        u = scipy.linalg.expm(-1j * seg.hamiltonian * seg.duration) @ u
    return u
