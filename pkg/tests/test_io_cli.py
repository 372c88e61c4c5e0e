import json

import numpy as np
import pytest
from channels import near_identity_channel

from chierr import gates, io
from chierr.cli import dispatch
from chierr.composition import GateWithError
from chierr.error_matrix import Convention, ErrorMatrix, to_error_matrix
from chierr.exceptions import ValidationError
from chierr.lindblad.schedule import GateSchedule, qubit_decoherence
from chierr.process import chi_from_unitary, identity_chi
from chierr.spam import CalibrationSet, SpamModel
from chierr.tomography import TomographySetup, simulate_dataset


def noisy_gate(u, seed=0, p=1e-3):
    n = int(np.log2(u.shape[0]))
    chi = near_identity_channel(np.random.default_rng(seed), n, p, coherent=p, unitary=u)
    return GateWithError(u, to_error_matrix(chi, u))


def test_matrix_round_trips():
    chi = chi_from_unitary(gates.SQRT_ISWAP)
    assert np.array_equal(io.matrix_from_json(json.loads(io.dumps(io.process_to_json(chi)))), chi)
    err = to_error_matrix(chi, gates.CZ, Convention.ERROR_BEFORE)
    back = io.error_from_json(json.loads(io.dumps(io.error_to_json(err))))
    assert back.convention is Convention.ERROR_BEFORE
    assert np.array_equal(back.chi, err.chi)
    assert np.array_equal(io.unitary_from_json(io.unitary_to_json(gates.Y)), gates.Y)
    assert np.array_equal(io.decode_matrix([[1, 0], [0, 1]]), np.eye(2))


def test_matrix_json_validation():
    with pytest.raises(ValidationError):
        io.matrix_from_json({"n_qubits": 2, "entries": io.encode_matrix(np.eye(4))})
    with pytest.raises(ValidationError):
        io.matrix_from_json({"convention": "error_after", "entries": io.encode_matrix(np.eye(4))})
    with pytest.raises(ValidationError):
        io.error_from_json(io.process_to_json(np.eye(4) / 2))
    with pytest.raises(ValidationError):
        io.decode_matrix([1, 2, 3])


def test_composite_round_trips():
    g = noisy_gate(gates.CNOT)
    back = io.gate_from_json(io.gate_to_json(g))
    assert np.array_equal(back.error.chi, g.error.chi)
    sched = GateSchedule.constant(0.1, 0.2 * gates.X, qubit_decoherence(1, 1.0, 2.0))
    s2 = io.schedule_from_json(io.schedule_to_json(sched))
    assert s2.segments[0].channels[1].rate == sched.segments[0].channels[1].rate
    with pytest.raises(ValidationError):
        io.schedule_from_json({"segments": [{"duration": 1.0}]})
    spam = SpamModel(near_identity_channel(np.random.default_rng(1), 1, 1e-3), identity_chi(1))
    cal = CalibrationSet.synthetic(spam, ["I", "X"])
    assert io.calibration_from_json(io.calibration_to_json(cal)).labels == ["I", "X"]
    assert np.array_equal(io.spam_from_json(io.spam_to_json(spam)).chi_prep, spam.chi_prep)


@pytest.mark.parametrize("shots", [None, 50])
def test_dataset_round_trip(shots):
    ds = simulate_dataset(chi_from_unitary(gates.HADAMARD), None, TomographySetup(1, shots), rng_seed=2)
    back = io.dataset_from_json(json.loads(io.dumps(io.dataset_to_json(ds))))
    assert np.abs(back.frequencies - ds.frequencies).max() < 1e-15
    data = io.dataset_to_json(ds)
    data["records"] = data["records"][:-1]
    with pytest.raises(ValidationError):
        io.dataset_from_json(data)


def test_plot_data(tmp_path):
    path = io.emit_plot_data(chi_from_unitary(gates.X), tmp_path / "chi.csv")
    lines = path.read_text().splitlines()
    assert lines[0] == "row,col,real,imag,magnitude"
    assert len(lines) == 17
    assert lines[6].startswith("X,X,1.0")


def test_cli_pipeline(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert dispatch(["from-unitary", "--gate", "CZ", "--output", "chi.json"]) == 0
    manifest = json.loads((tmp_path / "chi.json.manifest.json").read_text())
    assert manifest["outputs"] == ["chi.json"] and manifest["seed"] is not None
    assert dispatch(["to-err", "--chi", "chi.json", "--gate", "CZ", "--output", "err.json"]) == 0
    err = io.error_from_json(io.read_json("err.json"))
    assert err.fidelity == pytest.approx(1.0, abs=1e-12)
    assert "chi.json" in json.loads((tmp_path / "err.json.manifest.json").read_text())["inputs"]
    assert dispatch(["report", "--err", "err.json"]) == 0
    assert "fidelity" in capsys.readouterr().out
    assert (tmp_path / "chi-report.manifest.json").exists()
    assert dispatch(["plot-data", "--matrix", "err.json", "--output", "err.csv"]) == 0


def test_cli_compose_and_correct(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    io.write_json("g.json", [io.gate_to_json(noisy_gate(gates.HADAMARD, 1)), io.gate_to_json(noisy_gate(gates.X, 2))])
    for mode in ("exact", "first-order", "additive"):
        assert dispatch(["compose", "g.json", "--mode", mode, "--output", f"{mode}.json"]) == 0
    g = io.gate_from_json(io.read_json("exact.json"))
    assert np.abs(g.desired - gates.X @ gates.HADAMARD).max() < 1e-12
    io.write_json("err.json", io.error_to_json(g.error))
    assert dispatch(["correct", "--err", "err.json", "--output", "plan.json"]) == 0
    assert io.read_json("plan.json")["predicted_gain"] > 0
    with pytest.warns(RuntimeWarning, match="stalled"):
        assert dispatch(["correct", "--err", "err.json", "--set", "Z", "--iterate", "--output", "p2.json"]) == 0
    cz = noisy_gate(gates.CZ, 3)
    io.write_json("cz.json", io.error_to_json(cz.error))
    assert dispatch(["correct", "--err", "cz.json", "--cz", "--output", "czc.json"]) == 0
    assert set(io.read_json("czc.json")) >= {"phi1", "phi2", "phi_cz"}


def test_cli_lindblad_and_tomo(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    sched = GateSchedule.constant(0.05, channels=qubit_decoherence(1, 1.0, 2.0))
    io.write_json("s.json", io.schedule_to_json(sched))
    assert dispatch(["lindblad", "--schedule", "s.json", "--output", "a.json"]) == 0
    assert dispatch(["lindblad", "--schedule", "s.json", "--mode", "first-order", "--output", "b.json"]) == 0
    a, b = (io.error_from_json(io.read_json(f)) for f in ("a.json", "b.json"))
    assert abs(a.fidelity - b.fidelity) < 1e-3
    args = ["lindblad", "--schedule", "s.json", "--mode", "trajectories", "--ntraj", "100", "--seed", "5"]
    assert dispatch(args + ["--output", "t1.json"]) == 0
    assert dispatch(args + ["--output", "t2.json"]) == 0
    assert io.read_json("t1.json") == io.read_json("t2.json")
    assert dispatch(["tomo", "simulate", "--gate", "X", "--shots", "100", "--seed", "1", "--output", "d.json"]) == 0
    assert dispatch(["tomo", "reconstruct", "--data", "d.json", "--project", "--output", "r.json"]) == 0
    assert dispatch(["tomo", "run", "--schedule", "s.json", "--route", "rho", "--output", "e.json"]) == 0


def test_cli_spam(tmp_path, monkeypatch):
    monkeypatch.chdir(tmp_path)
    rng = np.random.default_rng(4)
    spam = SpamModel(near_identity_channel(rng, 1, 1e-3), near_identity_channel(rng, 1, 1e-3))
    io.write_json("cal.json", io.calibration_to_json(CalibrationSet.synthetic(spam)))
    assert dispatch(["spam", "identify", "--cal", "cal.json", "--output", "spam.json"]) == 0
    assert io.read_json("spam.json")["residual"] < 1e-10
    io.write_json("err.json", io.error_to_json(ErrorMatrix.identity(1, gates.X)))
    # a perfect gate minus a SPAM deviation leaves negative diagonal entries
    with pytest.warns(RuntimeWarning, match="negative diagonal"):
        assert dispatch(["spam", "subtract", "--err", "err.json", "--spam", "spam.json", "--output", "o.json"]) == 0
    io.write_json("bad.json", io.calibration_to_json(CalibrationSet.synthetic(spam, ["I", "X"])))
    assert dispatch(["spam", "identify", "--cal", "bad.json"]) == 2


def test_cli_exit_codes(tmp_path, monkeypatch, capsys):
    monkeypatch.chdir(tmp_path)
    assert dispatch(["from-unitary", "--gate", "NOPE"]) == 1
    payload = json.loads(capsys.readouterr().err.strip().splitlines()[-1])
    assert "error" in payload
    assert dispatch(["report", "--err", "missing.json"]) == 1
    assert dispatch(["frobnicate"]) == 64
    assert dispatch([]) == 64
    (tmp_path / "junk.json").write_text("{not json")
    assert dispatch(["report", "--err", "junk.json"]) == 1
