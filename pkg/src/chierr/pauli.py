"""N-qubit Pauli operator basis.

Operators are indexed in base 4 with ``I=0, X=1, Y=2, Z=3`` and the leftmost
letter (first tensor factor) as the most significant digit, so for two qubits
``"ZX"`` has index ``4*3 + 1 = 13``.  ``Y`` is always ``sigma_y``.

The basis is orthogonal but not normalized: ``Tr(E_m^dag E_n) = d * delta_mn``.
"""
from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass, field

import numpy as np

from . import config

LETTERS = "IXYZ"

_SINGLE = np.array(
    [
        [[1, 0], [0, 1]],
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ],
    dtype=complex,
)

# single-qubit products: E_a E_b = _PHASE[a, b] * E_[_PROD[a, b]]
_PROD = np.array(
    [
        [0, 1, 2, 3],
        [1, 0, 3, 2],
        [2, 3, 0, 1],
        [3, 2, 1, 0],
    ],
    dtype=np.intp,
)
_PHASE = np.array(
    [
        [1, 1, 1, 1],
        [1, 1, 1j, -1j],
        [1, -1j, 1, 1j],
        [1, 1j, -1j, 1],
    ],
    dtype=complex,
)


def label_to_index(label: str) -> int:
    """Base-4 index of a Pauli label such as ``"ZX"``."""
    if not label:
        raise ValueError("empty Pauli label")
    idx = 0
    for ch in label.upper():
        pos = LETTERS.find(ch)
        if pos < 0:
            raise ValueError(f"invalid Pauli letter {ch!r} in {label!r}")
        idx = 4 * idx + pos
    return idx


def index_to_label(index: int, n_qubits: int) -> str:
    if not 0 <= index < 4**n_qubits:
        raise IndexError(f"Pauli index {index} out of range for {n_qubits} qubits")
    letters = []
    for _ in range(n_qubits):
        index, r = divmod(index, 4)
        letters.append(LETTERS[r])
    return "".join(reversed(letters))


def _digits(index, n_qubits):
    """Per-qubit letters of ``index`` (array-friendly), most significant first."""
    index = np.asarray(index)
    return [(index // 4 ** (n_qubits - 1 - k)) % 4 for k in range(n_qubits)]


@dataclass(frozen=True)
class PauliBasis:
    n_qubits: int
    operators: np.ndarray = field(repr=False)
    labels: tuple[str, ...] = field(repr=False)

    @property
    def dim(self) -> int:
        return 2**self.n_qubits

    @property
    def size(self) -> int:
        return 4**self.n_qubits

    def __len__(self):
        return self.size

    def __getitem__(self, key):
        if isinstance(key, str):
            key = label_to_index(key)
        return self.operators[key]

    def index(self, label: str) -> int:
        if len(label) != self.n_qubits:
            raise ValueError(f"label {label!r} does not match {self.n_qubits} qubits")
        return label_to_index(label)

    def label(self, index: int) -> str:
        return self.labels[index]

    @functools.cached_property
    def product_table(self) -> tuple[np.ndarray, np.ndarray]:
        """``(index, phase)`` arrays with ``E_m E_n = phase[m, n] * E_index[m, n]``."""
        m, n = np.meshgrid(np.arange(self.size), np.arange(self.size), indexing="ij")
        return pauli_product(m, n, self.n_qubits)

    @functools.cached_property
    def structure(self) -> np.ndarray:
        """Tensor ``S[a, p, m] = Tr(E_p E_m E_a^dag) / d`` built from the product table."""
        idx, phase = self.product_table
        s = np.zeros((self.size, self.size, self.size), dtype=complex)
        p, m = np.meshgrid(np.arange(self.size), np.arange(self.size), indexing="ij")
        s[idx, p, m] = phase
        return s


@functools.lru_cache(maxsize=None)
def build_basis(n_qubits: int) -> PauliBasis:
    """Pauli basis on ``n_qubits`` qubits in canonical base-4 order."""
    if not isinstance(n_qubits, (int, np.integer)) or not 1 <= n_qubits <= config.MAX_QUBITS:
        raise ValueError(f"n_qubits must be in [1, {config.MAX_QUBITS}], got {n_qubits!r}")
    ops = []
    labels = []
    for letters in itertools.product(range(4), repeat=n_qubits):
        op = np.ones((1, 1), dtype=complex)
        for k in letters:
            op = np.kron(op, _SINGLE[k])
        ops.append(op)
        labels.append("".join(LETTERS[k] for k in letters))
    ops = np.array(ops)
    ops.setflags(write=False)
    return PauliBasis(int(n_qubits), ops, tuple(labels))


def n_qubits_for_dim(d: int) -> int:
    n = int(round(np.log2(d)))
    if n < 1 or 2**n != d:
        raise ValueError(f"dimension {d} is not a power of two")
    return n


def pauli_product(m, n, n_qubits: int):
    """Index and phase of ``E_m E_n`` via the single-qubit table.

    Works elementwise on integer arrays.  No matrix products are formed.
    """
    dm = _digits(m, n_qubits)
    dn = _digits(n, n_qubits)
    index = np.zeros(np.broadcast(np.asarray(m), np.asarray(n)).shape, dtype=np.intp)
    phase = np.ones(index.shape, dtype=complex)
    for a, b in zip(dm, dn):
        index = 4 * index + _PROD[a, b]
        phase = phase * _PHASE[a, b]
    if index.ndim == 0:
        return int(index), complex(phase)
    return index, phase


def expand_in_pauli(matrix, basis: PauliBasis | None = None) -> np.ndarray:
    """Coefficients ``c_n = Tr(M E_n^dag) / d`` so that ``M = sum_n c_n E_n``."""
    matrix = np.asarray(matrix, dtype=complex)
    if matrix.ndim != 2 or matrix.shape[0] != matrix.shape[1]:
        raise ValueError(f"expected a square matrix, got shape {matrix.shape}")
    if basis is None:
        basis = build_basis(n_qubits_for_dim(matrix.shape[0]))
    if matrix.shape[0] != basis.dim:
        raise ValueError(f"matrix dimension {matrix.shape[0]} does not match basis dimension {basis.dim}")
    # Pauli operators are Hermitian, so Tr(M E_n^dag) = sum_ij M_ij (E_n)_ji
    return np.einsum("ij,nji->n", matrix, basis.operators) / basis.dim


def from_pauli(coeffs, basis: PauliBasis | None = None) -> np.ndarray:
    """Inverse of :func:`expand_in_pauli`."""
    coeffs = np.asarray(coeffs, dtype=complex)
    if basis is None:
        basis = build_basis(n_qubits_for_dim(int(round(np.sqrt(coeffs.size)))))
    return np.tensordot(coeffs, basis.operators, axes=1)


def phase_fix(coeffs, atol: float = 1e-12):
    """Remove the global phase so that ``coeffs[0]`` is real and non-negative.

    Returns ``(fixed, ok)``; ``ok`` is False (and the input returned unchanged)
    when ``|coeffs[0]|`` is below ``atol``.
    """
    coeffs = np.asarray(coeffs, dtype=complex)
    c0 = coeffs[0]
    if abs(c0) < atol:
        return coeffs.copy(), False
    return coeffs * (np.conj(c0) / abs(c0)), True
