"""Closed-form process matrices for standard single- and two-qubit channels."""
from __future__ import annotations

import numpy as np

from ..exceptions import ValidationError
from ..pauli import build_basis


def _check_time(t, t1):
    if t < 0:
        raise ValidationError("time must be non-negative", t=t)
    if not t1 > 0:
        raise ValidationError("T1 must be positive", T1=t1)


def _check_avg(cos_avg, sin_avg=0.0):
    if abs(cos_avg) > 1 or abs(sin_avg) > 1:
        raise ValidationError("averages of cos/sin must lie in [-1, 1]")
    if cos_avg**2 + sin_avg**2 > 1 + 1e-12:
        raise ValidationError("<cos>^2 + <sin>^2 cannot exceed 1")


def thermal_rates(t1: float, e_over_t: float = np.inf) -> tuple[float, float]:
    """``(Gamma_up, Gamma_down)`` with ``Gamma_up + Gamma_down = 1/T1`` and ratio ``exp(-E/T)``."""
    if not t1 > 0:
        raise ValidationError("T1 must be positive", T1=t1)
    if e_over_t < 0:
        raise ValidationError("E/T must be non-negative")
    if np.isinf(e_over_t):
        return 0.0, 1.0 / t1
    up = 1.0 / (t1 * (1 + np.exp(e_over_t)))
    down = 1.0 / (t1 * (1 + np.exp(-e_over_t)))
    return float(up), float(down)


def dephasing_cos(t, t_fast=np.inf, t_slow=np.inf) -> float:
    """``<cos phi> = exp(-t/T_fast) exp(-(t/T_slow)^2)`` (exponential plus Gaussian dephasing)."""
    return float(np.exp(-t / t_fast) * np.exp(-((t / t_slow) ** 2)))


def _single(entries) -> np.ndarray:
    basis = build_basis(1)
    chi = np.zeros((4, 4), dtype=complex)
    for (a, b), v in entries.items():
        chi[basis.index(a), basis.index(b)] = v
    return chi


def dephasing(cos_avg: float, sin_avg: float = 0.0) -> np.ndarray:
    """Random Z rotation ``diag(1, e^{i phi})`` averaged over ``phi``."""
    _check_avg(cos_avg, sin_avg)
    zz = (1 - cos_avg) / 2
    return _single({
        ("I", "I"): 1 - zz,
        ("Z", "Z"): zz,
        ("I", "Z"): 0.5j * sin_avg,
        ("Z", "I"): -0.5j * sin_avg,
    })


def relaxation(t: float, t1: float, e_over_t: float = np.inf) -> np.ndarray:
    """Energy relaxation at temperature ``T`` (``E/T = inf`` is zero temperature)."""
    _check_time(t, t1)
    up, down = thermal_rates(t1, e_over_t)
    eu, ed = np.exp(-up * t), np.exp(-down * t)
    hu, hd = np.exp(-up * t / 2), np.exp(-down * t / 2)
    xx = (1 - ed) / 4 + (1 - eu) / 4
    xy = -0.25j * (eu - ed)
    iz = (eu - ed) / 4
    return _single({
        ("X", "X"): xx,
        ("Y", "Y"): xx,
        ("X", "Y"): xy,
        ("Y", "X"): -xy,
        ("I", "I"): (hu + hd) ** 2 / 4,
        ("Z", "Z"): (hu - hd) ** 2 / 4,
        ("I", "Z"): iz,
        ("Z", "I"): iz,
    })


def combined(t: float, t1: float, e_over_t: float = np.inf, cos_avg: float = 1.0) -> np.ndarray:
    """Symmetric pure dephasing applied after energy relaxation."""
    rel = relaxation(t, t1, e_over_t)
    deph = dephasing(cos_avg)
    chi = rel.copy()
    chi[0, 0] = deph[0, 0] * rel[0, 0] + deph[3, 3] * rel[3, 3]
    chi[3, 3] = deph[3, 3] * rel[0, 0] + rel[3, 3] * deph[0, 0]
    return chi


def short_time(t: float, t1: float, e_over_t: float = np.inf, cos_avg: float = 1.0) -> np.ndarray:
    """``combined`` to first order in ``t/T1`` (dephasing kept through ``<cos phi>``)."""
    _check_time(t, t1)
    _check_avg(cos_avg)
    r = t / (4 * t1)
    th = 1.0 if np.isinf(e_over_t) else np.tanh(e_over_t / 2)
    zz = (1 - cos_avg) / 2
    return _single({
        ("X", "X"): r,
        ("Y", "Y"): r,
        ("Z", "Z"): zz,
        ("I", "I"): 1 - 2 * r - zz,
        ("X", "Y"): -1j * r * th,
        ("Y", "X"): 1j * r * th,
        ("I", "Z"): r * th,
        ("Z", "I"): r * th,
    })


def controlled_phase(z: complex) -> np.ndarray:
    """``diag(1, 1, 1, e^{i theta})`` averaged over ``theta``; ``z = <e^{i theta}>``."""
    z = complex(z)
    if abs(z) > 1 + 1e-12:
        raise ValidationError("|<exp(i theta)>| cannot exceed 1")
    cc = (10 + 3 * z + 3 * z.conjugate()).real / 16
    bb = (2 - z - z.conjugate()).real / 16
    bc = (2 + z.conjugate() - 3 * z) / 16
    basis = build_basis(2)
    ii, iz, zi, zz = (basis.index(k) for k in ("II", "IZ", "ZI", "ZZ"))
    chi = np.zeros((16, 16), dtype=complex)
    chi[ii, ii] = cc
    for m in (iz, zi, zz):
        for n in (iz, zi, zz):
            chi[m, n] = bb if (m == zz) == (n == zz) else -bb
    for m, sign in ((iz, 1), (zi, 1), (zz, -1)):
        chi[m, ii] = sign * bc
        chi[ii, m] = sign * bc.conjugate()
    return chi


_KINDS = {
    "dephasing": dephasing,
    "relaxation": relaxation,
    "combined": combined,
    "short_time": short_time,
    "controlled_phase": controlled_phase,
}


def analytic_channel(kind: str, **params) -> np.ndarray:
    """Dispatch by name: ``dephasing``, ``relaxation``, ``combined``, ``short_time``, ``controlled_phase``."""
    key = kind.lower().replace("-", "_")
    if key not in _KINDS:
        raise ValidationError(f"unknown channel kind {kind!r}", choices=sorted(_KINDS))
    return _KINDS[key](**params)


def ramsey_signal(t: float, t1: float, cos_avg: float, phi_r: float) -> float:
    """Excited-state probability of a Ramsey sequence with relaxation and symmetric dephasing."""
    return float(0.5 + 0.5 * np.exp(-t / (2 * t1)) * cos_avg * np.cos(phi_r))


def ramsey_cos_avg(p: float, t: float, t1: float, phi_r: float) -> float:
    """Invert :func:`ramsey_signal` for ``<cos phi>``."""
    denom = 0.5 * np.exp(-t / (2 * t1)) * np.cos(phi_r)
    if abs(denom) < 1e-15:
        raise ZeroDivisionError("cos(phi_R) = 0: the Ramsey signal does not depend on <cos phi>")
    return float((p - 0.5) / denom)
