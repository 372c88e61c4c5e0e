"""Human/machine-readable summary of an error matrix."""
from __future__ import annotations

import warnings

import numpy as np

from .correction import suggest_correction
from .error_matrix import Convention, ErrorMatrix, as_convention, coherent_split, kraus_decompose
from .process import average_fidelity


def top_peaks(chi, n_qubits: int, top: int = 10, skip_identity: bool = True) -> list[dict]:
    """Largest-magnitude elements of the upper triangle (Hermitian pairs reported once)."""
    from .pauli import index_to_label

    size = chi.shape[0]
    rows, cols = np.triu_indices(size)
    mags = np.abs(chi[rows, cols])
    if skip_identity:
        mags = np.where((rows == 0) & (cols == 0), -1.0, mags)
    order = np.argsort(-mags, kind="stable")[:top]
    return [
        {
            "row": index_to_label(int(rows[k]), n_qubits),
            "col": index_to_label(int(cols[k]), n_qubits),
            "value": [float(chi[rows[k], cols[k]].real), float(chi[rows[k], cols[k]].imag)],
            "magnitude": float(abs(chi[rows[k], cols[k]])),
        }
        for k in order
        if mags[k] > 0
    ]


def summarize(err: ErrorMatrix, top: int = 10) -> dict:
    n = err.n_qubits
    f = err.fidelity
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        split = coherent_split(err)
    kraus = kraus_decompose(err)
    plan = suggest_correction(as_convention(err, Convention.ERROR_AFTER))
    from .pauli import index_to_label

    return {
        "n_qubits": n,
        "convention": err.convention.value,
        "process_fidelity": f,
        "average_fidelity": average_fidelity(min(max(f, 0.0), 1.0), 2**n),
        "unitary_error": split.unitary_error,
        "decoherence_error": split.decoherence_error,
        "lambda0": split.lambda0,
        "coherent_split_flagged": split.flagged,
        "kraus_weights": [float(x) for x in kraus.weights[:top]],
        "top_peaks": top_peaks(err.chi, n, top),
        "suggested_correction": {
            "predicted_gain": plan.predicted_gain,
            "u_corr": {
                index_to_label(i, n): [0.0, float(plan.u_corr[i].imag)]
                for i in plan.correctable_set
                if abs(plan.u_corr[i]) > 1e-12
            },
        },
        "warnings": [str(w.message) for w in caught],
    }
