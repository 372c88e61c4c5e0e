"""Quantum-trajectory (jump / no-jump) Monte-Carlo unraveling of Lindblad evolution.

In each time step ``dt`` the state first evolves under the segment
Hamiltonian; then channel ``k`` fires with probability
``Gamma_k dt ||B_k psi||^2`` (``psi -> B_k psi / norm``), and otherwise the
no-jump operator ``1 - dt/2 sum_k Gamma_k B_k^dag B_k`` is applied and the
state renormalized.

Random numbers come from independent streams keyed by
``(seed, input, block)`` with blocks of :data:`BLOCK` trajectories, so an
estimate does not depend on how the work is batched or parallelized.
"""
from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg

from ..exceptions import NumericalError, ValidationError
from ..process import superoperator_to_chi
from ..rng import stream
from .schedule import GateSchedule

BLOCK = 256
STEP_CHUNK = 256
MAX_JUMP_PROB = 1e-3
MAX_STEPS = 10_000_000
BATCH_BLOCKS = 64


@dataclass(frozen=True)
class TrajectoryRecord:
    final_state: np.ndarray = field(repr=False)
    jumps: tuple[tuple[float, int], ...] = ()
    weight: float = 1.0


@dataclass(frozen=True)
class _Step:
    dt: float
    unitary: np.ndarray | None
    rates: np.ndarray
    ops: np.ndarray
    no_jump: np.ndarray
    count: int


def _plan(schedule: GateSchedule, max_jump_prob: float) -> list[_Step]:
    steps = []
    for seg in schedule.segments:
        d = seg.dim
        if seg.channels:
            rates = np.array([ch.rate for ch in seg.channels])
            ops = np.stack([ch.operator for ch in seg.channels])
            bound = sum(r * np.linalg.norm(b, 2) ** 2 for r, b in zip(rates, ops))
        else:
            rates, ops, bound = np.zeros(0), np.zeros((0, d, d), dtype=complex), 0.0
        n = max(1, math.ceil(bound * seg.duration / max_jump_prob))
        if n > MAX_STEPS:
            raise ValidationError(
                "rates too large for the per-step jump-probability limit",
                steps=n,
                max_steps=MAX_STEPS,
            )
        dt = seg.duration / n
        gen = sum((r * b.conj().T @ b for r, b in zip(rates, ops)), np.zeros((d, d), dtype=complex))
        steps.append(
            _Step(
                dt=dt,
                unitary=None if not np.any(seg.hamiltonian) else scipy.linalg.expm(-1j * seg.hamiltonian * dt).T,
                rates=rates,
                ops=ops.transpose(0, 2, 1).copy(),
                no_jump=(np.eye(d) - 0.5 * dt * gen).T,
                count=n,
            )
        )
    return steps


def _sq_norms(psi):
    return np.einsum("...i,...i->...", psi.real, psi.real) + np.einsum("...i,...i->...", psi.imag, psi.imag)


def _normalize(psi):
    norms = np.sqrt(_sq_norms(psi))
    if np.any(norms == 0):
        raise NumericalError("trajectory state collapsed to zero norm")
    return psi / norms[:, None]


def _advance(step: _Step, psi, u):
    """One time step for a batch ``psi`` of shape (n, d) with uniforms ``u`` of shape (n,)."""
    if step.unitary is not None:
        psi = psi @ step.unitary
    if step.rates.size == 0:
        return psi, None
    # matrices are stored transposed so that row-vector states multiply on the right
    branches = np.matmul(psi, step.ops)
    probs = (step.rates * step.dt)[:, None] * _sq_norms(branches)
    cum = np.cumsum(probs, axis=0)
    jumped = u < cum[-1]
    which = np.argmax(u[None, :] < cum, axis=0)
    out = psi @ step.no_jump
    if np.any(jumped):
        idx = np.flatnonzero(jumped)
        out[idx] = branches[which[idx], idx]
    return _normalize(out), np.where(jumped, which, -1)


class _BlockUniforms:
    """Uniform draws for a run of consecutive blocks, consumed step by step."""

    def __init__(self, key, blocks, n_traj, total_steps):
        self._gens = [stream(*key, b) for b in blocks]
        self._n = n_traj
        self._total = total_steps
        self._pos = 0
        self._buf = None

    def next(self):
        offset = self._pos % STEP_CHUNK
        if offset == 0:
            rows = min(STEP_CHUNK, self._total - self._pos)
            self._buf = np.concatenate([g.random((rows, BLOCK)) for g in self._gens], axis=1)[:, : self._n]
        self._pos += 1
        return self._buf[offset]


def _run(steps, psi, uniforms, leak_tol=None, record=False):
    jumps = []
    t = 0.0
    for step in steps:
        for _ in range(step.count):
            psi, which = _advance(step, psi, uniforms.next())
            t += step.dt
            if record and which is not None and which[0] >= 0:
                jumps.append((t, int(which[0])))
            if leak_tol is not None:
                top = np.max(np.abs(psi[:, -1]) ** 2)
                if top > leak_tol:
                    raise NumericalError("population of the truncation level exceeds the limit", population=float(top))
    return psi, jumps


def trajectory_sample(schedule: GateSchedule, psi0, rng_seed: int, max_jump_prob: float = MAX_JUMP_PROB,
                      leak_tol: float | None = None, index: int = 0) -> TrajectoryRecord:
    """One trajectory; ``index`` selects an independent stream for the same seed.

    ``leak_tol`` monitors the population of the highest level (Fock-space
    truncation) and raises if it is exceeded.
    """
    psi0 = np.asarray(psi0, dtype=complex).reshape(1, -1)
    if psi0.shape[1] != schedule.dim:
        raise ValidationError("state dimension does not match the schedule")
    if abs(np.linalg.norm(psi0) - 1) > 1e-10:
        raise ValidationError("initial state must be normalized")
    steps = _plan(schedule, max_jump_prob)
    total = sum(s.count for s in steps)
    uniforms = _BlockUniforms((rng_seed, index), [0], 1, total)
    psi, jumps = _run(steps, psi0, uniforms, leak_tol=leak_tol, record=True)
    return TrajectoryRecord(psi[0], tuple(jumps))


def average_density(schedule: GateSchedule, psi0, n_traj: int, rng_seed: int, input_index: int = 0,
                    max_jump_prob: float = MAX_JUMP_PROB) -> np.ndarray:
    """Monte-Carlo estimate of the final density matrix for a pure input."""
    if n_traj < 1:
        raise ValidationError("n_traj must be at least 1")
    psi0 = np.asarray(psi0, dtype=complex)
    steps = _plan(schedule, max_jump_prob)
    total = sum(s.count for s in steps)
    n_blocks = -(-n_traj // BLOCK)
    rho = np.zeros((schedule.dim, schedule.dim), dtype=complex)
    for start in range(0, n_blocks, BATCH_BLOCKS):
        blocks = range(start, min(start + BATCH_BLOCKS, n_blocks))
        n = min(n_traj - start * BLOCK, len(blocks) * BLOCK)
        uniforms = _BlockUniforms((rng_seed, input_index), blocks, n, total)
        psi, _ = _run(steps, np.tile(psi0, (n, 1)), uniforms)
        rho += psi.T @ psi.conj()
    return rho / n_traj


def spanning_states(dim: int) -> np.ndarray:
    """Pure product states of ``|0>, |1>, |+>, |+i>`` spanning the operator space (rows)."""
    n = int(round(np.log2(dim)))
    if 2**n != dim:
        raise ValidationError("dimension must be a power of two; embed with pad_to_qubits")
    single = np.array([[1, 0], [0, 1], [1, 1], [1, 1j]], dtype=complex)
    single /= np.linalg.norm(single, axis=1)[:, None]
    states = np.ones((1, 1), dtype=complex)
    for _ in range(n):
        states = np.einsum("ai,bj->abij", states, single).reshape(states.shape[0] * 4, -1)
    return states


def trajectory_channel_estimate(schedule: GateSchedule, n_traj: int, rng_seed: int,
                                max_jump_prob: float = MAX_JUMP_PROB, workers: int = 1) -> np.ndarray:
    """Process matrix estimated from trajectories over a spanning set of inputs."""
    states = spanning_states(schedule.dim)

    def one(i):
        return average_density(schedule, states[i], n_traj, rng_seed, i, max_jump_prob)

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            outs = list(pool.map(one, range(len(states))))
    else:
        outs = [one(i) for i in range(len(states))]
    r_in = np.stack([np.outer(s, s.conj()).reshape(-1) for s in states], axis=1)
    r_out = np.stack([o.reshape(-1) for o in outs], axis=1)
    superop = r_out @ np.linalg.inv(r_in)
    chi = superoperator_to_chi(superop)
    return (chi + chi.conj().T) / 2
