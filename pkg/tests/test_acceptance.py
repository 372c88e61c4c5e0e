"""Acceptance suite: one test per criterion, each printing a single PASS/FAIL line.

Run alone with ``pytest tests/test_acceptance.py -v -s`` (the summary lines
are also repeated at the end of the pytest report) or as a script with
``python3 tests/test_acceptance.py``.
"""
import sys
import warnings
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).parent))

import oracles  # noqa: E402
from acceptance_log import record  # noqa: E402
from channels import near_identity_channel, random_channel, random_hermitian, random_unitary  # noqa: E402

from chierr import (  # noqa: E402
    Convention,
    ErrorMatrix,
    chi_from_kraus,
    chi_from_unitary,
    compose_errors_first_order,
    compose_exact,
    cz_corrections,
    gates,
    iterate_cz_correction,
    kraus_decompose,
    to_error_matrix,
)
from chierr.composition import composed_fidelity_exact  # noqa: E402
from chierr.lindblad import (  # noqa: E402
    GateSchedule,
    LindbladChannel,
    Segment,
    average_density,
    exact_channel_chi,
    first_order_error,
    first_order_fidelity,
    propagate_density,
    qubit_decoherence,
    schedule_unitary,
    three_level_relaxation,
    trajectory_channel_estimate,
)
from chierr.lindblad.analytic import short_time  # noqa: E402
from chierr.pauli import build_basis  # noqa: E402
from chierr.spam import (  # noqa: E402
    CalibrationSet,
    SpamModel,
    identify_spam,
    spam_fidelity_ratio,
    spam_forward,
    subtract_spam,
)
from chierr.tomography import TomographySetup, reconstruct_chi, run_qpt_experiment, simulate_dataset  # noqa: E402


def maxdiff(a, b):
    return float(np.abs(np.asarray(a) - np.asarray(b)).max())


def _exact_error(schedule):
    return to_error_matrix(exact_channel_chi(schedule), schedule_unitary(schedule))


# ---------------------------------------------------------------------------


def test_criterion_01_unitary_tables():
    worst = 0.0
    for phi in np.linspace(-np.pi, np.pi, 13):
        worst = max(worst, maxdiff(chi_from_unitary(np.diag([1, np.exp(1j * phi)])), oracles.z_rotation(phi)))
        u = np.kron(np.diag([1, np.exp(1j * phi)]), np.eye(2))
        worst = max(worst, maxdiff(chi_from_unitary(u), oracles.z_rotation_first_qubit(phi)))
        cp = np.diag([1, 1, 1, np.exp(1j * phi)])
        worst = max(worst, maxdiff(chi_from_unitary(cp), oracles.controlled_phase(phi)))
    cz = chi_from_unitary(gates.CZ)
    cz_pm_quarter = np.allclose(np.abs(cz[np.abs(cz) > 1e-12]), 0.25, atol=1e-12) and np.sum(np.abs(cz) > 1e-12) == 16
    worst = max(worst, maxdiff(chi_from_unitary(gates.CNOT), oracles.cnot()))
    worst = max(worst, maxdiff(chi_from_unitary(gates.SQRT_ISWAP), oracles.sqrt_iswap()))
    ok = record(1, worst <= 1e-12 and cz_pm_quarter, f"max |chi - table| = {worst:.2e} (tol 1e-12)")
    assert ok


def test_criterion_02_decoherence_tables():
    t1 = 1.0
    worst_kraus = worst_exact = worst_thermal = 0.0
    for t in (0.01, 0.1, 0.5, 2.0):
        for e_over_t in (np.inf, 3.0, 0.7):
            tab = oracles.relaxation(t, t1, e_over_t)
            worst_kraus = max(worst_kraus, maxdiff(chi_from_kraus(oracles.relaxation_kraus(t, t1, e_over_t)), tab))
            up, down = oracles.rates(t1, e_over_t)
            chans = [LindbladChannel(down, np.array([[0, 1], [0, 0]]))]
            if up > 0:
                chans.append(LindbladChannel(up, np.array([[0, 0], [1, 0]])))
            dev = maxdiff(exact_channel_chi(GateSchedule.constant(t, channels=chans)), tab)
            worst_exact = max(worst_exact, dev)
            if not np.isinf(e_over_t):
                worst_thermal = max(worst_thermal, dev)
            for t_phi in (0.3, 3.0):
                # dephasing with B = Z at rate 1/(2 T_phi) gives <cos phi> = exp(-t/T_phi)
                cos_avg = np.exp(-t / t_phi)
                both = GateSchedule.constant(t, channels=chans + [LindbladChannel(1 / (2 * t_phi), np.diag([1, -1]))])
                dev = maxdiff(exact_channel_chi(both), oracles.combined(t, t1, e_over_t, cos_avg))
                worst_exact = max(worst_exact, dev)
                if not np.isinf(e_over_t):
                    worst_thermal = max(worst_thermal, dev)
                kraus = [a @ b for a in oracles.dephasing_kraus(cos_avg)
                         for b in oracles.relaxation_kraus(t, t1, e_over_t)]
                worst_kraus = max(worst_kraus, maxdiff(chi_from_kraus(kraus), oracles.combined(t, t1, e_over_t, cos_avg)))
    for cos_avg in (1.0, 0.9, 0.3, 0.0, -0.4, -1.0):
        worst_kraus = max(worst_kraus, maxdiff(chi_from_kraus(oracles.dephasing_kraus(cos_avg)),
                                               oracles.dephasing(cos_avg)))
    # non-exponential dephasing: piecewise rates reproduce any decreasing <cos phi>(t)
    segs = (Segment(0.2, np.zeros((2, 2)), (LindbladChannel(0.1, np.diag([1, -1])),)),
            Segment(0.3, np.zeros((2, 2)), (LindbladChannel(1.7, np.diag([1, -1])),)))
    cos_avg = np.exp(-2 * (0.1 * 0.2 + 1.7 * 0.3))
    worst_exact = max(worst_exact, maxdiff(exact_channel_chi(GateSchedule(segs)), oracles.dephasing(cos_avg)))

    # short-time table: relative error per non-identity element at t = 0.01 T1
    t, t_phi = 0.01, 2.0
    worst_rel = 0.0
    for e_over_t in (np.inf, 2.0):
        exact = oracles.combined(t, t1, e_over_t, np.exp(-t / t_phi))
        approx = oracles.short_time(t, t1, e_over_t, np.exp(-t / t_phi))
        dev_exact = exact - np.diag([1, 0, 0, 0])
        dev_approx = approx - np.diag([1, 0, 0, 0])
        mask = np.abs(dev_exact) > 1e-15
        worst_rel = max(worst_rel, float((np.abs(dev_approx - dev_exact)[mask] / np.abs(dev_exact[mask])).max()))
        worst_kraus = max(worst_kraus, maxdiff(short_time(t, t1, e_over_t, np.exp(-t / t_phi)), approx))
    rel_tol = 2 * t / min(t1, t_phi)
    ok = worst_kraus <= 1e-10 and worst_exact <= 1e-10 and worst_rel <= rel_tol
    record(2, ok, f"kraus {worst_kraus:.1e}, lindblad {worst_exact:.1e} of which finite-temperature "
                  f"{worst_thermal:.1e} (tol 1e-10); "
                  f"short-time rel {worst_rel:.2e} (tol {rel_tol:.0e})")
    assert ok


def _random_two_qubit_schedule(rng, gamma_t):
    t_g = 1.0
    t1 = rng.uniform(0.5, 2.0, 2)
    t_phi = rng.uniform(0.5, 2.0, 2)
    chans = qubit_decoherence(2, t1=list(t1), t_phi=list(t_phi))
    total = sum(ch.rate for ch in chans) * t_g
    scale = gamma_t / total
    t1, t_phi = t1 / scale, t_phi / scale
    chans = qubit_decoherence(2, t1=list(t1), t_phi=list(t_phi))
    n_seg = int(rng.integers(1, 4))
    durations = rng.dirichlet(np.ones(n_seg)) * t_g
    segs = tuple(Segment(dt, random_hermitian(rng, 4, 3.0), tuple(chans)) for dt in durations)
    return GateSchedule(segs), (t_g, t1, t_phi)


def test_criterion_03_first_order_lindblad():
    rng = np.random.default_rng(3)
    worst_ratio = worst_fid = 0.0
    for _ in range(12):
        gt = rng.uniform(0.002, 0.02)
        sched, (t_g, t1, t_phi) = _random_two_qubit_schedule(rng, gt)
        approx = first_order_error(sched)
        exact = _exact_error(sched)
        worst_ratio = max(worst_ratio, maxdiff(approx.chi, exact.chi) / (2 * gt**2))
        expected = oracles.two_qubit_infidelity(t_g, t1[0], t1[1], t_phi[0], t_phi[1])
        worst_fid = max(worst_fid, abs(1 - first_order_fidelity(sched) - expected))
    ok = worst_ratio <= 1 and worst_fid <= 1e-14
    record(3, ok, f"max dev / 2(sum G t)^2 = {worst_ratio:.3f} (<= 1); "
                  f"|1-F - sum t/2T| = {worst_fid:.1e} (tol 1e-14)")
    assert ok


def test_criterion_04_hamiltonian_independence():
    rng = np.random.default_rng(4)
    gt = 0.02
    fid_changes = 0
    worst_ratio = 0.0
    for _ in range(10):
        sched, _ = _random_two_qubit_schedule(rng, gt)
        bare = sched.with_hamiltonians([np.zeros((4, 4))] * len(sched.segments))
        for _ in range(3):
            other = sched.with_hamiltonians([random_hermitian(rng, 4, 5.0) for _ in sched.segments])
            fid_changes += first_order_fidelity(other) != first_order_fidelity(bare)
            f_bare = _exact_error(bare).fidelity
            f_other = _exact_error(other).fidelity
            worst_ratio = max(worst_ratio, abs(f_other - f_bare) / gt**2)
    ok = fid_changes == 0 and worst_ratio <= 1
    record(4, ok, f"first-order F changed in {fid_changes} cases (must be 0); "
                  f"max |dF_exact| / (sum G t)^2 = {worst_ratio:.3f} (<= 1)")
    assert ok


def test_criterion_05_trajectories():
    n_traj = 100_000
    t1, t_phi, t = 1.0, 1.0, 0.1
    lower = np.array([[0, 1], [0, 0]])
    h = 0.5 * gates.X  # some driving so the channel is not diagonal in the Pauli basis
    cases = {
        "relaxation": GateSchedule.constant(t, h, [LindbladChannel(1 / t1, lower)]),
        "dephasing": GateSchedule.constant(t, h, [LindbladChannel(1 / (2 * t_phi), np.diag([1, -1]))]),
        "combined": GateSchedule.constant(t, h, qubit_decoherence(1, t1=t1, t_phi=t_phi)),
        "3-level": GateSchedule.constant(t, np.zeros((4, 4)), three_level_relaxation(t1, dim=4)),
    }
    devs = {}
    for seed, (name, sched) in enumerate(cases.items()):
        est = trajectory_channel_estimate(sched, n_traj, rng_seed=100 + seed)
        devs[name] = maxdiff(est, exact_channel_chi(sched))

    # one-operator vs two-operator 3-level relaxation: d rho_01/dt differs by (sqrt 2 / T1) rho_12
    psi = np.ones(3) / np.sqrt(3)
    rho0 = np.outer(psi, psi.conj())
    single = GateSchedule.constant(t, np.zeros((3, 3)), three_level_relaxation(t1, "single"))
    double = GateSchedule.constant(t, np.zeros((3, 3)), three_level_relaxation(t1, "two_channel"))
    exact_gap = propagate_density(single, rho0)[0, 1] - propagate_density(double, rho0)[0, 1]
    initial_rate_gap = np.sqrt(2) / t1 * rho0[1, 2]
    traj_gap = (average_density(single, psi, n_traj, 7)[0, 1] - average_density(double, psi, n_traj, 8)[0, 1])
    sigma = np.sqrt(2 * 0.5 / n_traj)  # |rho_01| estimator spread is below 1/2 per sample
    gap_ok = abs(traj_gap - exact_gap) <= 3 * sigma and abs(exact_gap / t - initial_rate_gap) <= 0.1 * initial_rate_gap

    ok = max(devs.values()) <= 5e-3 and gap_ok
    detail = ", ".join(f"{k} {v:.1e}" for k, v in devs.items())
    record(5, ok, f"max |chi_traj - chi_exact|: {detail} (tol 5e-3); rho_01 gap traj {traj_gap.real:.4f} "
                  f"vs exact {exact_gap.real:.4f} (sqrt2 rho_12 t/T1 = {initial_rate_gap.real * t:.4f})")
    assert ok


def test_criterion_06_composition():
    t, t1, cos_avg = 0.3, 1.0, 0.8
    comp = compose_exact(oracles.dephasing(cos_avg), oracles.relaxation(t, t1, 1.5))
    table_dev = maxdiff(comp, oracles.combined(t, t1, 1.5, cos_avg))

    rng = np.random.default_rng(6)
    asym = 0
    worst_ratio = 0.0
    n_pairs = 1000
    for _ in range(n_pairs):
        n = int(rng.integers(1, 3))
        p1, p2 = 10 ** rng.uniform(-4, -2, 2)
        # decoherence-dominated: no-jump deviation (coherent and Bayesian parts) of order the jump weight
        c1 = near_identity_channel(rng, n, p1)
        c2 = near_identity_channel(rng, n, p2)
        eye = np.eye(2**n)
        e1 = ErrorMatrix(c1, Convention.ERROR_AFTER, eye)
        e2 = ErrorMatrix(c2, Convention.ERROR_AFTER, eye)
        asym += composed_fidelity_exact(e1, e2) != composed_fidelity_exact(e2, e1)
        approx = compose_errors_first_order(e1, e2).chi
        bound = 5 * (1 - c1[0, 0].real) * (1 - c2[0, 0].real)
        worst_ratio = max(worst_ratio, maxdiff(approx, compose_exact(c2, c1)) / bound)
    ok = table_dev <= 1e-12 and asym == 0 and worst_ratio <= 1
    record(6, ok, f"table {table_dev:.1e} (tol 1e-12); asymmetric fidelities {asym}; "
                  f"{n_pairs} pairs, max first-order error / 5(1-F1)(1-F2) = {worst_ratio:.3f} (<= 1)")
    assert ok


def _cz_with_phase_error(phi1, phi2, phi_cz, decoherence=None):
    u_err = np.diag(np.exp(-1j * np.array([0, phi1, phi2, phi1 + phi2 + phi_cz])))
    chi = chi_from_unitary(u_err @ gates.CZ)
    if decoherence is not None:
        chi = compose_exact(decoherence, chi)
    return to_error_matrix(chi, gates.CZ)


def test_criterion_07_cz_correction():
    rng = np.random.default_rng(7)
    basis = build_basis(2)
    rows = [basis.index(k) for k in ("IZ", "ZI", "ZZ")]
    idle = GateSchedule.constant(0.01, channels=qubit_decoherence(2, t1=1.0, t_phi=1.5))
    decoh = exact_channel_chi(idle)
    worst_angle = worst_resid = 0.0
    for k in range(40):
        phis = rng.uniform(-0.2, 0.2, 3)
        err = _cz_with_phase_error(*phis, decoherence=decoh if k % 2 else None)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            corr = cz_corrections(err)
            refined = iterate_cz_correction(err)
        got = np.array([corr.phi1, corr.phi2, corr.phi_cz])
        worst_angle = max(worst_angle, np.abs(got - phis).max() / (5 * np.abs(phis).max() ** 2))
        after = compose_exact(chi_from_unitary(refined.unitary()), err.chi)
        worst_resid = max(worst_resid, np.abs(after[rows, 0].imag).max() / (1e-3 * (1 - err.fidelity)))

    # gain prediction in the decoherence-dominated regime
    idle = GateSchedule.constant(0.04, channels=qubit_decoherence(2, t1=1.0, t_phi=1.0))
    decoh = exact_channel_chi(idle)
    worst_gain = 0.0
    for _ in range(20):
        phis = rng.uniform(-0.04, 0.04, 3)
        err = _cz_with_phase_error(*phis, decoherence=decoh)
        corr = cz_corrections(err)
        after = compose_exact(chi_from_unitary(corr.unitary()), err.chi)
        realized = after[0, 0].real - err.fidelity
        worst_gain = max(worst_gain, abs(realized - corr.predicted_gain) / realized)
    ok = worst_angle <= 1 and worst_resid <= 1 and worst_gain <= 0.2
    record(7, ok, f"angle error / 5|phi|^2 = {worst_angle:.3f} (<= 1); residual Im / 1e-3(1-F) = "
                  f"{worst_resid:.1e} (<= 1); gain relative error {worst_gain:.3f} (<= 0.2)")
    assert ok


def _spam_round_trip(rng, n, targets):
    spam = SpamModel(near_identity_channel(rng, n, 2e-3, coherent=1e-3),
                     near_identity_channel(rng, n, 3e-3, coherent=1e-3))
    model = identify_spam(CalibrationSet.synthetic(spam, mode="first_order"))
    out = {}
    for name in targets:
        u = gates.gate(name)
        err_true = ErrorMatrix(near_identity_channel(rng, n, 5e-3, coherent=2e-3), Convention.ERROR_AFTER, u)
        measured = spam_forward(err_true, spam, "first_order")
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            recovered = subtract_spam(measured, model)
        out[name] = maxdiff(recovered.chi, err_true.chi)
    return spam, out


def test_criterion_08_spam_round_trip():
    rng = np.random.default_rng(8)
    devs = {}
    _, d1 = _spam_round_trip(rng, 1, ["X", "√Y", "Z(0.7)", "RX(1.1)"])
    devs.update({f"N1 {k}": v for k, v in d1.items()})
    _, d2 = _spam_round_trip(rng, 2, ["X⊗√Y", "CZ", "CNOT", "√iSWAP"])
    devs.update({f"N2 {k}": v for k, v in d2.items()})

    worst_ratio = 0.0
    for n in (1, 2):
        for _ in range(10):
            spam = SpamModel(near_identity_channel(rng, n, 2e-3), near_identity_channel(rng, n, 3e-3))
            u = random_unitary(rng, 2**n)
            err_true = ErrorMatrix(near_identity_channel(rng, n, 1e-2), Convention.ERROR_AFTER, u)
            f_gate = spam_forward(err_true, spam, "exact").fidelity
            f_id = spam_forward(ErrorMatrix.identity(n, u), spam, "exact").fidelity
            est = spam_fidelity_ratio(f_gate, f_id)
            worst_ratio = max(worst_ratio, abs(est - err_true.fidelity) / (5 * (1 - err_true.fidelity) ** 2))
    worst = max(devs.values())
    ok = worst <= 1e-10 and worst_ratio <= 1
    failing = ", ".join(f"{k} {v:.1e}" for k, v in devs.items() if v > 1e-10) or "none"
    record(8, ok, f"max recovery error {worst:.1e} (tol 1e-10; failing: {failing}); "
                  f"fidelity-ratio error / 5(1-F)^2 = {worst_ratio:.3f} (<= 1)")
    assert ok


def test_criterion_09_tomography():
    rng = np.random.default_rng(9)
    worst_rt = worst_routes = 0.0
    for n in (1, 2):
        setup = TomographySetup(n)
        for _ in range(50):
            chi = random_channel(rng, n)
            worst_rt = max(worst_rt, maxdiff(reconstruct_chi(simulate_dataset(chi, None, setup)), chi))
            u = random_unitary(rng, 2**n)
            for conv in (Convention.ERROR_AFTER, Convention.ERROR_BEFORE):
                a = run_qpt_experiment(chi, u, convention=conv, route="chi")
                b = run_qpt_experiment(chi, u, convention=conv, route="rho")
                worst_routes = max(worst_routes, maxdiff(a.chi, b.chi))
    ok = worst_rt <= 1e-10 and worst_routes <= 1e-10
    record(9, ok, f"round trip {worst_rt:.1e}, route agreement {worst_routes:.1e} (tol 1e-10)")
    assert ok


def test_criterion_10_structural_bounds():
    rng = np.random.default_rng(10)
    counts = {"cauchy-schwarz": 0, "re-column": 0, "lambda0": 0, "trace": 0}
    re_fail_by_kind = {}
    worst_re = 0.0
    n_channels = 1200
    for k in range(n_channels):
        n = 1 + k % 2
        p = 10 ** rng.uniform(-4, -1)
        coherent = 0.0 if k % 4 < 2 else 10 ** rng.uniform(-3, -1)
        u = random_unitary(rng, 2**n)
        chi = near_identity_channel(rng, n, p, coherent=coherent, n_jumps=int(rng.integers(1, 4)), unitary=u)
        err = to_error_matrix(chi, u, Convention.ERROR_AFTER if k % 3 else Convention.ERROR_BEFORE)
        c = err.chi
        lam = kraus_decompose(err).weights
        diag = np.sqrt(np.clip(np.diag(c).real, 0, None))
        counts["cauchy-schwarz"] += bool((np.abs(c) > np.outer(diag, diag) + 1e-10).any())
        excess = float((np.abs(c[1:, 0].real) - (1 - lam.max()) / 2).max())
        if excess > 1e-10:
            counts["re-column"] += 1
            kind = f"N={n}, {'coherent' if coherent else 'incoherent'}"
            re_fail_by_kind[kind] = re_fail_by_kind.get(kind, 0) + 1
            worst_re = max(worst_re, excess)
        counts["lambda0"] += bool(lam.max() < c[0, 0].real - 1e-12)
        counts["trace"] += bool(abs(lam.sum() - 1) > 1e-10)
    ok = sum(counts.values()) == 0
    detail = ", ".join(f"{k} violations {v}" for k, v in counts.items())
    if re_fail_by_kind:
        detail += f"; Re-column failures by kind {re_fail_by_kind}, worst excess {worst_re:.1e}"
    record(10, ok, f"{n_channels} channels: {detail}")
    assert ok


if __name__ == "__main__":
    import traceback

    failed = 0
    for name, fn in sorted(globals().items()):
        if name.startswith("test_criterion"):
            try:
                fn()
            except AssertionError:
                failed += 1
            except Exception:
                failed += 1
                traceback.print_exc()
    sys.exit(1 if failed else 0)
