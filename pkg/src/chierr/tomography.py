"""Simulated quantum process tomography with linear-inversion reconstruction."""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import config
from .composition import compose_exact
from .error_matrix import Convention, ErrorMatrix, to_error_matrix
from .exceptions import ConvergenceError, ValidationError
from .gates import I2, X, Y, Z, kron
from .pauli import build_basis
from .process import apply, check_unitary, chi_from_unitary, is_trace_preserving, superoperator_to_chi
from .rng import stream

_INPUTS = {
    "0": np.array([1, 0], dtype=complex),
    "1": np.array([0, 1], dtype=complex),
    "+": np.array([1, 1], dtype=complex) / np.sqrt(2),
    "+i": np.array([1, 1j], dtype=complex) / np.sqrt(2),
}
_AXES = {"X": X, "Y": Y, "Z": Z}


@dataclass(frozen=True)
class TomographySetup:
    """Inputs ``{|0>,|1>,|+>,|+i>}^N`` and Pauli measurement settings ``{X,Y,Z}^N``.

    ``shots=None`` means exact (infinite-shot) probabilities.
    """

    n_qubits: int
    shots: int | None = None

    def __post_init__(self):
        if not 1 <= self.n_qubits <= config.MAX_QUBITS:
            raise ValidationError("unsupported number of qubits", n_qubits=self.n_qubits)
        if self.shots is not None and self.shots < 1:
            raise ValidationError("shots must be positive", shots=self.shots)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def input_labels(self) -> list[tuple[str, ...]]:
        return list(itertools.product(_INPUTS, repeat=self.n_qubits))

    @property
    def setting_labels(self) -> list[str]:
        return ["".join(p) for p in itertools.product("XYZ", repeat=self.n_qubits)]

    def input_states(self) -> np.ndarray:
        """Density matrices, shape ``(4**N, d, d)``."""
        out = []
        for labels in self.input_labels:
            psi = kron(*(_INPUTS[k].reshape(-1, 1) for k in labels)).ravel()
            out.append(np.outer(psi, psi.conj()))
        return np.array(out)

    def projectors(self) -> np.ndarray:
        """Outcome projectors, shape ``(3**N, 2**N, d, d)``; outcome bit 0 is the +1 eigenvalue."""
        out = []
        for setting in self.setting_labels:
            per = []
            for bits in itertools.product((0, 1), repeat=self.n_qubits):
                per.append(kron(*((I2 + (-1) ** b * _AXES[a]) / 2 for a, b in zip(setting, bits))))
            out.append(per)
        return np.array(out)


@dataclass(frozen=True)
class TomographyDataset:
    """Outcome frequencies, shape ``(4**N inputs, 3**N settings, 2**N outcomes)``."""

    setup: TomographySetup
    frequencies: np.ndarray = field(repr=False)
    seed: int | None = None

    def __post_init__(self):
        f = np.asarray(self.frequencies, dtype=float)
        n = self.setup.n_qubits
        if f.shape != (4**n, 3**n, 2**n):
            raise ValidationError("frequency array has the wrong shape", shape=f.shape)
        if np.abs(f.sum(axis=2) - 1).max() > 1e-12:
            raise ValidationError("outcome frequencies must sum to one per record")
        object.__setattr__(self, "frequencies", f)

    @property
    def shots(self):
        return self.setup.shots


def _effective_channel(channel, spam):
    chi = np.asarray(channel, dtype=complex)
    if spam is None:
        return chi
    return compose_exact(spam.chi_meas, compose_exact(chi, spam.chi_prep))


def simulate_dataset(channel, spam, setup: TomographySetup, rng_seed: int | None = None) -> TomographyDataset:
    """Born probabilities of ``meas . channel . prep`` for every input and setting, optionally sampled.

    Each (input, setting) record draws from its own stream ``(seed, input, setting)``.
    """
    chi = _effective_channel(channel, spam)
    if not is_trace_preserving(chi, 1e-8):
        raise ValidationError("channel is not trace preserving")
    if chi.shape[0] != 4**setup.n_qubits:
        raise ValidationError("channel size does not match the setup")
    outs = np.array([apply(chi, rho) for rho in setup.input_states()])
    probs = np.einsum("sbij,nji->nsb", setup.projectors(), outs).real
    probs = np.clip(probs, 0, None)
    probs /= probs.sum(axis=2, keepdims=True)
    if setup.shots is None:
        return TomographyDataset(setup, probs, rng_seed)
    if rng_seed is None:
        raise ValidationError("finite-shot simulation needs a seed")
    freqs = np.empty_like(probs)
    for i, j in itertools.product(range(probs.shape[0]), range(probs.shape[1])):
        freqs[i, j] = stream(rng_seed, i, j).multinomial(setup.shots, probs[i, j]) / setup.shots
    return TomographyDataset(setup, freqs, rng_seed)


def estimate_states(dataset: TomographyDataset) -> np.ndarray:
    """Linear-inversion output states, one per input.

    Each Pauli expectation is averaged over every setting that measures it.
    """
    setup = dataset.setup
    n = setup.n_qubits
    basis = build_basis(n)
    settings = setup.setting_labels
    bits = np.array(list(itertools.product((0, 1), repeat=n)))
    expect = np.zeros((dataset.frequencies.shape[0], basis.size))
    for idx in range(basis.size):
        label = basis.label(idx)
        support = [q for q, ch in enumerate(label) if ch != "I"]
        signs = (-1.0) ** bits[:, support].sum(axis=1) if support else np.ones(len(bits))
        compatible = [j for j, s in enumerate(settings) if all(s[q] == label[q] for q in support)]
        expect[:, idx] = np.mean(dataset.frequencies[:, compatible, :] @ signs, axis=1)
    rho = np.einsum("kn,nij->kij", expect, basis.operators) / basis.dim
    return rho


def fit_process(inputs, outputs) -> np.ndarray:
    """Process matrix mapping each input density matrix to the matching output (pseudo-inverse)."""
    inputs = np.asarray(inputs, dtype=complex)
    outputs = np.asarray(outputs, dtype=complex)
    d = inputs.shape[1]
    r_in = inputs.reshape(len(inputs), d * d).T
    r_out = outputs.reshape(len(outputs), d * d).T
    if np.linalg.matrix_rank(r_in, tol=1e-10) < d * d:
        raise ValidationError("input states do not span the operator space")
    superop = r_out @ np.linalg.pinv(r_in, rcond=1e-10)
    chi = superoperator_to_chi(superop)
    return (chi + chi.conj().T) / 2


def _tp_projector(size):
    basis = build_basis(int(round(np.log(size) / np.log(4))))
    e = basis.operators
    d = basis.dim
    # T(chi) = sum_mn chi_mn E_n E_m, as a (d*d, size*size) matrix
    t = np.einsum("nij,mjk->ikmn", e, e).reshape(d * d, size * size)
    return t, np.linalg.pinv(t), np.eye(d).reshape(-1)


def project_physical(chi, tol: float = 1e-10, max_iters: int = 100_000) -> np.ndarray:
    """Alternate eigenvalue clipping and projection onto trace-preserving maps until both hold."""
    chi = np.asarray(chi, dtype=complex)
    size = chi.shape[0]
    t, t_pinv, target = _tp_projector(size)
    x = chi.reshape(-1)
    for _ in range(max_iters):
        m = x.reshape(size, size)
        m = (m + m.conj().T) / 2
        lam, vec = np.linalg.eigh(m)
        if lam.min() >= -tol and np.abs(t @ x - target).max() <= tol:
            return m
        m = (vec * np.clip(lam, 0, None)) @ vec.conj().T
        x = m.reshape(-1)
        x = x - t_pinv @ (t @ x - target)
    raise ConvergenceError("positivity/trace-preservation projection did not converge")


def reconstruct_chi(dataset: TomographyDataset, project: bool = False) -> np.ndarray:
    chi = fit_process(dataset.setup.input_states(), estimate_states(dataset))
    return project_physical(chi) if project else chi


def run_qpt_experiment(gate, u_des, spam=None, setup: TomographySetup | None = None, shots=None,
                       seed: int | None = None, convention=Convention.ERROR_AFTER, route: str = "chi",
                       project: bool = False) -> ErrorMatrix:
    """Simulate, reconstruct and factor out ``u_des``.

    ``gate`` is a unitary, a process matrix or a ``GateSchedule``.  With
    ``route="chi"`` the reconstructed process matrix is converted to an error
    matrix; with ``route="rho"`` the states are transformed instead (outputs
    by ``U^dag . U`` for error-before, inputs by ``U . U^dag`` for error-after)
    and the error matrix is fitted directly.
    """
    from .lindblad import GateSchedule, exact_channel_chi

    convention = Convention.parse(convention)
    u_des = check_unitary(u_des)
    if isinstance(gate, GateSchedule):
        chi = exact_channel_chi(gate)
    else:
        g = np.asarray(gate, dtype=complex)
        chi = chi_from_unitary(g) if g.shape == u_des.shape else g
    n = int(round(np.log2(u_des.shape[0])))
    if setup is None:
        setup = TomographySetup(n, shots)
    data = simulate_dataset(chi, spam, setup, seed)
    if route == "chi":
        rec = reconstruct_chi(data, project)
        return to_error_matrix(rec, u_des, convention)
    if route != "rho":
        raise ValidationError(f"unknown route {route!r}")
    inputs = setup.input_states()
    outputs = estimate_states(data)
    ud = u_des.conj().T
    if convention is Convention.ERROR_BEFORE:
        outputs = np.einsum("ij,njk,kl->nil", ud, outputs, u_des)
    else:
        inputs = np.einsum("ij,njk,kl->nil", u_des, inputs, ud)
    err = fit_process(inputs, outputs)
    if project:
        err = project_physical(err)
    return ErrorMatrix(err, convention, u_des)
