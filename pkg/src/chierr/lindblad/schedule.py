"""Piecewise-constant gate schedules with Lindblad decoherence channels."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..exceptions import ValidationError


@dataclass(frozen=True)
class LindbladChannel:
    """Decoherence term ``Gamma (B rho B^dag - {B^dag B, rho}/2)``."""

    rate: float
    operator: np.ndarray = field(repr=False)

    def __post_init__(self):
        op = np.asarray(self.operator, dtype=complex)
        if op.ndim != 2 or op.shape[0] != op.shape[1]:
            raise ValidationError("jump operator must be a square matrix")
        if not np.all(np.isfinite(op)):
            raise ValidationError("jump operator has non-finite entries")
        rate = float(self.rate)
        if not np.isfinite(rate) or rate < 0:
            raise ValidationError("rate must be finite and non-negative", rate=rate)
        object.__setattr__(self, "operator", op)
        object.__setattr__(self, "rate", rate)

    @property
    def dim(self) -> int:
        return self.operator.shape[0]

    @property
    def b0(self) -> complex:
        """Identity component ``Tr(B)/d``."""
        return complex(np.trace(self.operator) / self.dim)

    @property
    def normalized(self) -> bool:
        return abs(self.b0) < 1e-14

    def normalize(self) -> tuple["LindbladChannel", np.ndarray]:
        """Remove ``b0`` from ``B``; returns the new channel and the compensating Hamiltonian.

        ``Gamma D[B] = Gamma D[B - b0] - i [H_a, .]`` with
        ``H_a = i (Gamma/2) (b0^* B - b0 B^dag)``.
        """
        b0 = self.b0
        b = self.operator
        h_a = 0.5j * self.rate * (np.conj(b0) * b - b0 * b.conj().T)
        shifted = LindbladChannel(self.rate, b - b0 * np.eye(self.dim))
        return shifted, h_a


@dataclass(frozen=True)
class Segment:
    duration: float
    hamiltonian: np.ndarray = field(repr=False)
    channels: tuple[LindbladChannel, ...] = ()

    def __post_init__(self):
        h = np.asarray(self.hamiltonian, dtype=complex)
        if h.ndim != 2 or h.shape[0] != h.shape[1]:
            raise ValidationError("Hamiltonian must be a square matrix")
        if np.abs(h - h.conj().T).max() > 1e-12:
            raise ValidationError("Hamiltonian is not Hermitian")
        duration = float(self.duration)
        if not duration > 0:
            raise ValidationError("segment duration must be positive", duration=duration)
        channels = tuple(self.channels)
        for ch in channels:
            if ch.dim != h.shape[0]:
                raise ValidationError("channel dimension does not match the Hamiltonian")
        object.__setattr__(self, "hamiltonian", h)
        object.__setattr__(self, "duration", duration)
        object.__setattr__(self, "channels", channels)

    @property
    def dim(self) -> int:
        return self.hamiltonian.shape[0]


@dataclass(frozen=True)
class GateSchedule:
    segments: tuple[Segment, ...]

    def __post_init__(self):
        segs = tuple(self.segments)
        if not segs:
            raise ValidationError("schedule needs at least one segment")
        if len({s.dim for s in segs}) != 1:
            raise ValidationError("segments have different dimensions")
        object.__setattr__(self, "segments", segs)

    @property
    def dim(self) -> int:
        return self.segments[0].dim

    @property
    def duration(self) -> float:
        return float(sum(s.duration for s in self.segments))

    @classmethod
    def constant(cls, duration, hamiltonian=None, channels=(), dim=None) -> "GateSchedule":
        if hamiltonian is None:
            if dim is None:
                if not channels:
                    raise ValidationError("give a Hamiltonian, a channel or dim")
                dim = channels[0].dim
            hamiltonian = np.zeros((dim, dim))
        return cls((Segment(duration, hamiltonian, tuple(channels)),))

    def with_hamiltonians(self, hamiltonians) -> "GateSchedule":
        """Same timing and channels, new per-segment Hamiltonians."""
        return GateSchedule(
            tuple(Segment(s.duration, h, s.channels) for s, h in zip(self.segments, hamiltonians, strict=True))
        )

    def normalized(self) -> "GateSchedule":
        """Equivalent schedule with every ``b0`` removed and ``H_a`` folded into ``H``."""
        segs = []
        for s in self.segments:
            h = s.hamiltonian.copy()
            chans = []
            for ch in s.channels:
                new, h_a = ch.normalize()
                chans.append(new)
                h = h + h_a
            segs.append(Segment(s.duration, h, tuple(chans)))
        return GateSchedule(tuple(segs))

    def total_rate_time(self) -> float:
        """``sum_j Gamma_j t_j`` over segments and channels."""
        return float(sum(ch.rate * s.duration for s in self.segments for ch in s.channels))


def embed_operator(op, dim: int) -> np.ndarray:
    """Pad ``op`` with zeros to ``dim x dim`` (unused levels are left idle)."""
    op = np.asarray(op, dtype=complex)
    if op.shape[0] > dim:
        raise ValidationError("cannot embed into a smaller space")
    out = np.zeros((dim, dim), dtype=complex)
    out[: op.shape[0], : op.shape[1]] = op
    return out


def pad_to_qubits(schedule: GateSchedule) -> GateSchedule:
    """Embed a ``d``-level schedule into the smallest ``2**N`` space."""
    d = schedule.dim
    target = 1 << max(d - 1, 1).bit_length()
    if target == d:
        return schedule
    segs = []
    for s in schedule.segments:
        chans = tuple(LindbladChannel(ch.rate, embed_operator(ch.operator, target)) for ch in s.channels)
        segs.append(Segment(s.duration, embed_operator(s.hamiltonian, target), chans))
    return GateSchedule(tuple(segs))


def lowering(dim: int, level: int) -> np.ndarray:
    """``|level-1><level|`` in a ``dim``-level space."""
    op = np.zeros((dim, dim), dtype=complex)
    op[level - 1, level] = 1.0
    return op


def qubit_decoherence(n_qubits: int, t1=None, t_phi=None) -> list[LindbladChannel]:
    """Relaxation (``B = |0><1|``, ``Gamma = 1/T1``) and dephasing (``B = Z``, ``Gamma = 1/2T_phi``)
    channels on every qubit; ``t1``/``t_phi`` are scalars or per-qubit sequences (``None`` = off)."""
    def per_qubit(v):
        if v is None or np.isscalar(v):
            return [v] * n_qubits
        v = list(v)
        if len(v) != n_qubits:
            raise ValidationError("need one time per qubit")
        return v

    lower = np.array([[0, 1], [0, 0]], dtype=complex)
    z = np.diag([1.0, -1.0]).astype(complex)
    chans = []
    for q, (a, b) in enumerate(zip(per_qubit(t1), per_qubit(t_phi))):
        def local(op):
            mats = [np.eye(2)] * n_qubits
            mats[q] = op
            out = np.ones((1, 1))
            for m in mats:
                out = np.kron(out, m)
            return out
        if a is not None:
            chans.append(LindbladChannel(1.0 / a, local(lower)))
        if b is not None:
            chans.append(LindbladChannel(1.0 / (2 * b), local(z)))
    return chans


def three_level_relaxation(t1: float, model: str = "two_channel", gamma21: float | None = None,
                           dim: int = 3) -> list[LindbladChannel]:
    """Relaxation of a three-level (transmon-like) qubit.

    ``two_channel``: independent ``|0><1|`` at ``1/T1`` and ``|1><2|`` at
    ``gamma21`` (default ``2/T1``).  ``single``: one harmonic-oscillator
    lowering operator ``|0><1| + sqrt(2)|1><2|`` at ``1/T1``; it adds a
    coherence-transfer term ``(sqrt(2)/T1) rho_12`` to ``d rho_01/dt``.
    ``dim`` > 3 embeds the levels into a larger (e.g. two-qubit) space.
    """
    if not t1 > 0:
        raise ValidationError("T1 must be positive")
    l1 = embed_operator(lowering(3, 1), dim)
    l2 = embed_operator(lowering(3, 2), dim)
    if model == "two_channel":
        g21 = 2.0 / t1 if gamma21 is None else float(gamma21)
        return [LindbladChannel(1.0 / t1, l1), LindbladChannel(g21, l2)]
    if model == "single":
        if gamma21 is not None:
            raise ValidationError("the single-operator model fixes Gamma_21 = 2/T1")
        return [LindbladChannel(1.0 / t1, l1 + np.sqrt(2) * l2)]
    raise ValidationError(f"unknown model {model!r}")
