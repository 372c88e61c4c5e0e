"""Built-in gate library.

Matrices are in the computational basis with the first qubit as the most
significant tensor factor (``|q0 q1>``).
"""
from __future__ import annotations

import functools
import re

import numpy as np

I2 = np.eye(2, dtype=complex)
X = np.array([[0, 1], [1, 0]], dtype=complex)
Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
Z = np.array([[1, 0], [0, -1]], dtype=complex)


def rotation(axis, angle: float) -> np.ndarray:
    """``exp(-i angle/2 n.sigma)`` for a Bloch axis ``n`` (normalized here)."""
    n = np.asarray(axis, dtype=float)
    n = n / np.linalg.norm(n)
    ns = n[0] * X + n[1] * Y + n[2] * Z
    return np.cos(angle / 2) * I2 - 1j * np.sin(angle / 2) * ns


def rx(angle):
    return rotation((1, 0, 0), angle)


def ry(angle):
    return rotation((0, 1, 0), angle)


def rz(angle):
    return rotation((0, 0, 1), angle)


def z_phase(phi: float) -> np.ndarray:
    """``diag(1, e^{i phi})``."""
    return np.diag([1, np.exp(1j * phi)])


def controlled_phase(theta: float) -> np.ndarray:
    """``diag(1, 1, 1, e^{i theta})``."""
    return np.diag([1, 1, 1, np.exp(1j * theta)])


SQRT_X = rx(np.pi / 2)
SQRT_Y = ry(np.pi / 2)
HADAMARD = (X + Z) / np.sqrt(2)
CZ = controlled_phase(np.pi)
CNOT = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
_r = 1 / np.sqrt(2)
SQRT_ISWAP = np.array(
    [[1, 0, 0, 0], [0, _r, -1j * _r, 0], [0, -1j * _r, _r, 0], [0, 0, 0, 1]], dtype=complex
)

_FIXED = {
    "I": I2,
    "ID": I2,
    "X": X,
    "Y": Y,
    "Z": Z,
    "SX": SQRT_X,
    "√X": SQRT_X,
    "SQRTX": SQRT_X,
    "SY": SQRT_Y,
    "√Y": SQRT_Y,
    "SQRTY": SQRT_Y,
    "H": HADAMARD,
    "CZ": CZ,
    "CNOT": CNOT,
    "CX": CNOT,
    "SQISWAP": SQRT_ISWAP,
    "√ISWAP": SQRT_ISWAP,
    "SQRTISWAP": SQRT_ISWAP,
}

_PARAM = {
    "Z": z_phase,
    "RX": rx,
    "RY": ry,
    "RZ": rz,
    "CPHASE": controlled_phase,
}

CALIBRATION_GATES = {"I": I2, "X": X, "Y": Y, "√X": SQRT_X, "√Y": SQRT_Y}


def kron(*ops) -> np.ndarray:
    return functools.reduce(np.kron, ops, np.ones((1, 1), dtype=complex))


def gate(name: str) -> np.ndarray:
    """Look up a gate by name.

    Accepts fixed names (``"CNOT"``, ``"√X"``), parametrized names
    (``"Z(0.3)"``, ``"CPHASE(3.14)"``) and tensor products joined by ``⊗``.
    """
    name = name.strip()
    for sep in ("⊗", "*"):
        if sep in name:
            return kron(*(gate(part) for part in name.split(sep)))
    m = re.fullmatch(r"([A-Za-z√]+)\(([^)]*)\)", name)
    if m:
        key = m.group(1).upper()
        if key not in _PARAM:
            raise KeyError(f"unknown parametrized gate {m.group(1)!r}")
        return _PARAM[key](float(m.group(2)))
    key = name.upper()
    if key not in _FIXED:
        raise KeyError(f"unknown gate {name!r}")
    return _FIXED[key].copy()
