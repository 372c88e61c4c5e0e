"""JSON readers and writers.  Complex numbers are stored as ``[re, im]`` pairs."""
from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .composition import GateWithError
from .correction import CorrectionPlan, CzPhaseCorrection
from .error_matrix import Convention, ErrorMatrix
from .exceptions import ValidationError
from .lindblad import GateSchedule, LindbladChannel, Segment
from .pauli import build_basis, index_to_label
from .process import basis_for_chi
from .spam import CalibrationSet, SpamModel
from .tomography import TomographyDataset, TomographySetup


def encode_matrix(m) -> list:
    m = np.asarray(m, dtype=complex)
    return [[[float(z.real), float(z.imag)] for z in row] for row in m]


def decode_matrix(data) -> np.ndarray:
    arr = np.asarray(data, dtype=float)
    if arr.ndim == 3 and arr.shape[-1] == 2:
        return arr[..., 0] + 1j * arr[..., 1]
    if arr.ndim == 2:
        return arr.astype(complex)
    raise ValidationError("matrix must be a 2-D array of numbers or [re, im] pairs")


def dumps(obj) -> str:
    return json.dumps(obj, indent=1, ensure_ascii=False) + "\n"


def write_json(path, obj):
    Path(path).write_text(dumps(obj), encoding="utf-8")


def read_json(path):
    try:
        return json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ValidationError(f"{path}: invalid JSON ({exc})") from exc


# ---------------------------------------------------------------------------
# matrices


def unitary_to_json(u) -> dict:
    u = np.asarray(u, dtype=complex)
    return {"dim": u.shape[0], "entries": encode_matrix(u)}


def unitary_from_json(data) -> np.ndarray:
    if isinstance(data, dict):
        for key in ("entries", "unitary", "matrix"):
            if key in data:
                return decode_matrix(data[key])
        raise ValidationError("unitary JSON needs an 'entries' field")
    return decode_matrix(data)


def process_to_json(chi) -> dict:
    basis = basis_for_chi(chi)
    return {"n_qubits": basis.n_qubits, "convention": "chi", "entries": encode_matrix(chi)}


def error_to_json(err: ErrorMatrix) -> dict:
    return {
        "n_qubits": err.n_qubits,
        "convention": err.convention.value,
        "entries": encode_matrix(err.chi),
        "reference_unitary": encode_matrix(err.reference_unitary),
    }


def matrix_from_json(data):
    """``np.ndarray`` for ``convention == "chi"``, :class:`ErrorMatrix` otherwise."""
    if not isinstance(data, dict) or "entries" not in data:
        raise ValidationError("process/error matrix JSON needs 'entries'")
    chi = decode_matrix(data["entries"])
    conv = data.get("convention", "chi")
    n = data.get("n_qubits")
    if n is not None and chi.shape != (4**n, 4**n):
        raise ValidationError("entries do not match n_qubits", n_qubits=n, shape=chi.shape)
    if conv == "chi":
        basis_for_chi(chi)
        return chi
    if "reference_unitary" not in data:
        raise ValidationError("error matrix JSON needs 'reference_unitary'")
    return ErrorMatrix(chi, Convention.parse(conv), decode_matrix(data["reference_unitary"]))


def error_from_json(data) -> ErrorMatrix:
    m = matrix_from_json(data)
    if not isinstance(m, ErrorMatrix):
        raise ValidationError("expected an error matrix, got a plain process matrix")
    return m


# ---------------------------------------------------------------------------
# composite objects


def gate_to_json(g: GateWithError) -> dict:
    return {"desired": encode_matrix(g.desired), "error": error_to_json(g.error)}


def gate_from_json(data) -> GateWithError:
    return GateWithError(decode_matrix(data["desired"]), error_from_json(data["error"]))


def schedule_to_json(s: GateSchedule) -> dict:
    return {
        "segments": [
            {
                "duration": seg.duration,
                "hamiltonian": encode_matrix(seg.hamiltonian),
                "channels": [{"rate": ch.rate, "operator": encode_matrix(ch.operator)} for ch in seg.channels],
            }
            for seg in s.segments
        ]
    }


def schedule_from_json(data) -> GateSchedule:
    try:
        segs = [
            Segment(
                seg["duration"],
                decode_matrix(seg["hamiltonian"]),
                tuple(LindbladChannel(ch["rate"], decode_matrix(ch["operator"])) for ch in seg.get("channels", [])),
            )
            for seg in data["segments"]
        ]
    except KeyError as exc:
        raise ValidationError(f"schedule JSON is missing field {exc}") from exc
    return GateSchedule(tuple(segs))


def spam_to_json(spam: SpamModel) -> dict:
    return {
        "n_qubits": spam.n_qubits,
        "chi_prep": encode_matrix(spam.chi_prep),
        "chi_meas": encode_matrix(spam.chi_meas),
        "depolarizing_split": spam.depolarizing_split,
    }


def spam_from_json(data) -> SpamModel:
    return SpamModel(
        decode_matrix(data["chi_prep"]),
        decode_matrix(data["chi_meas"]),
        data.get("depolarizing_split", "meas"),
    )


def calibration_to_json(cal: CalibrationSet) -> dict:
    return {"gates": [{"label": k, "err_exp": error_to_json(v)} for k, v in cal.measured.items()]}


def calibration_from_json(data) -> CalibrationSet:
    return CalibrationSet({g["label"]: error_from_json(g["err_exp"]) for g in data["gates"]})


def dataset_to_json(ds: TomographyDataset) -> dict:
    setup = ds.setup
    records = []
    for i in range(ds.frequencies.shape[0]):
        for j in range(ds.frequencies.shape[1]):
            f = ds.frequencies[i, j]
            if setup.shots is None:
                rec = {"input": i, "setting": j, "probabilities": [float(x) for x in f]}
            else:
                rec = {"input": i, "setting": j, "counts": [int(round(x * setup.shots)) for x in f]}
            records.append(rec)
    return {
        "setup": {
            "n_qubits": setup.n_qubits,
            "inputs": ["".join(lbl) for lbl in setup.input_labels],
            "settings": setup.setting_labels,
        },
        "records": records,
        "shots": setup.shots,
        "seed": ds.seed,
    }


def dataset_from_json(data) -> TomographyDataset:
    setup = TomographySetup(int(data["setup"]["n_qubits"]), data.get("shots"))
    n = setup.n_qubits
    freqs = np.full((4**n, 3**n, 2**n), np.nan)
    for rec in data["records"]:
        if "counts" in rec:
            c = np.asarray(rec["counts"], dtype=float)
            freqs[rec["input"], rec["setting"]] = c / c.sum()
        else:
            freqs[rec["input"], rec["setting"]] = rec["probabilities"]
    if np.isnan(freqs).any():
        raise ValidationError("dataset is missing records")
    return TomographyDataset(setup, freqs, data.get("seed"))


def plan_to_json(plan: CorrectionPlan, n_qubits: int) -> dict:
    basis = build_basis(n_qubits)
    return {
        "u_corr": {basis.label(i): [float(plan.u_corr[i].real), float(plan.u_corr[i].imag)]
                   for i in plan.correctable_set},
        "correctable_set": [basis.label(i) for i in plan.correctable_set],
        "predicted_gain": plan.predicted_gain,
        "placement": plan.placement.value,
        "iterations": plan.iterations,
        "residual": plan.residual,
        "unitary": encode_matrix(plan.unitary()),
    }


def cz_to_json(c: CzPhaseCorrection) -> dict:
    return {
        "phi1": float(c.phi1),
        "phi2": float(c.phi2),
        "phi_cz": float(c.phi_cz),
        "phi3": float(c.phi3),
        "predicted_gain": float(c.predicted_gain),
        "unitary": encode_matrix(c.unitary()),
    }


# ---------------------------------------------------------------------------
# plot data


def emit_plot_data(matrix, path):
    """CSV with row label, column label, real, imag, magnitude for every element."""
    chi = matrix.chi if isinstance(matrix, ErrorMatrix) else np.asarray(matrix, dtype=complex)
    basis = basis_for_chi(chi)
    n = basis.n_qubits
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["row", "col", "real", "imag", "magnitude"])
        for i in range(basis.size):
            for j in range(basis.size):
                z = chi[i, j]
                w.writerow([index_to_label(i, n), index_to_label(j, n), repr(float(z.real)),
                            repr(float(z.imag)), repr(float(abs(z)))])
    return Path(path)
