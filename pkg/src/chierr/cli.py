"""Command-line interface (``chi``).

Exit codes: 0 success, 1 validation error, 2 numerical failure, 64 usage
error.  Errors are written to stderr as a JSON object.  Every run writes a
manifest ``<output>.manifest.json`` (or ``--manifest PATH``) recording the
command, input digests, seed, version and wall-clock time.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import hashlib
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__, config, io
from .composition import Mode, compose_sequence
from .correction import Placement, cz_corrections, iterate_correction, iterate_cz_correction, suggest_correction
from .error_matrix import Convention, as_convention, from_error_matrix, to_error_matrix
from .exceptions import NumericalError, ValidationError
from .gates import gate as gate_by_name
from .lindblad import (
    exact_channel_chi,
    first_order_error,
    schedule_unitary,
    trajectory_channel_estimate,
)
from .process import chi_from_unitary
from .report import summarize
from .rng import default_seed
from .spam import identify_spam, identify_spam_subset, subtract_spam
from .tomography import TomographySetup, reconstruct_chi, run_qpt_experiment, simulate_dataset

EXIT_OK, EXIT_VALIDATION, EXIT_NUMERICAL, EXIT_USAGE = 0, 1, 2, 64


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}\n{self.format_usage()}")


class _Run:
    """Collects input digests and writes outputs for one invocation."""

    def __init__(self, argv, args):
        self.argv = list(argv)
        self.args = args
        self.inputs = {}
        self.outputs = []
        self.start = time.time()

    def read(self, path):
        data = Path(path).read_bytes()
        self.inputs[str(path)] = hashlib.sha256(data).hexdigest()
        return io.read_json(path)

    def emit(self, obj):
        text = io.dumps(obj)
        out = getattr(self.args, "output", None)
        if out:
            Path(out).write_text(text, encoding="utf-8")
            self.outputs.append(str(out))
        else:
            sys.stdout.write(text)

    def manifest(self):
        path = getattr(self.args, "manifest", None)
        out = getattr(self.args, "output", None)
        if path is None:
            path = f"{out}.manifest.json" if out else f"chi-{self.args.command}.manifest.json"
        io.write_json(path, {
            "command": self.argv,
            "inputs": self.inputs,
            "outputs": self.outputs,
            "seed": getattr(self.args, "seed", None),
            "version": __version__,
            "started": _dt.datetime.fromtimestamp(self.start, _dt.timezone.utc).isoformat(),
            "wall_clock_seconds": time.time() - self.start,
        })


# ---------------------------------------------------------------------------
# helpers


def _unitary(run, args, name_attr="gate", file_attr="unitary"):
    name = getattr(args, name_attr, None)
    path = getattr(args, file_attr, None)
    if name and path:
        raise UsageError(f"give either --{name_attr} or --{file_attr}, not both")
    if name:
        try:
            return gate_by_name(name)
        except (KeyError, ValueError) as exc:
            raise ValidationError(f"unknown gate {name!r}") from exc
    if path:
        return io.unitary_from_json(run.read(path))
    raise UsageError(f"one of --{name_attr} / --{file_attr} is required")


def _error(run, path):
    return io.error_from_json(run.read(path))


def _parse_set(text, n_qubits):
    if not text:
        return None
    return [s.strip() for s in text.split(",") if s.strip()]


# ---------------------------------------------------------------------------
# commands


def cmd_from_unitary(run, args):
    u = _unitary(run, args, "gate", "input")
    run.emit(io.process_to_json(chi_from_unitary(u)))


def cmd_to_err(run, args):
    chi = io.matrix_from_json(run.read(args.chi))
    if not isinstance(chi, np.ndarray):
        chi = from_error_matrix(chi)
    u = _unitary(run, args)
    run.emit(io.error_to_json(to_error_matrix(chi, u, args.convention)))


def cmd_compose(run, args):
    gates = []
    for path in args.gates:
        data = run.read(path)
        items = data if isinstance(data, list) else [data]
        gates.extend(io.gate_from_json(g) for g in items)
    run.emit(io.gate_to_json(compose_sequence(gates, Mode.parse(args.mode))))


def cmd_correct(run, args):
    err = _error(run, args.err)
    if args.cz:
        corr = (iterate_cz_correction if args.iterate else cz_corrections)(err, correct_cz=not args.no_cz_angle)
        run.emit(io.cz_to_json(corr))
        return
    cset = _parse_set(args.set, err.n_qubits)
    placement = Placement(args.placement)
    if args.iterate:
        plan = iterate_correction(from_error_matrix(err), err.reference_unitary, cset,
                                  max_iters=args.max_iters, tol=args.iter_tol, placement=placement)
    else:
        plan = suggest_correction(err, cset, placement)
    run.emit(io.plan_to_json(plan, err.n_qubits))


def cmd_lindblad(run, args):
    sched = io.schedule_from_json(run.read(args.schedule))
    u = schedule_unitary(sched)
    if args.mode == "first-order":
        err = first_order_error(sched, args.convention, second_order=args.second_order)
        run.emit(io.process_to_json(from_error_matrix(err)) if args.raw else io.error_to_json(err))
        return
    if args.mode == "exact":
        chi = exact_channel_chi(sched)
    else:
        chi = trajectory_channel_estimate(sched, args.ntraj, args.seed, workers=args.threads)
    run.emit(io.process_to_json(chi) if args.raw else io.error_to_json(to_error_matrix(chi, u, args.convention)))


def cmd_spam_identify(run, args):
    cal = io.calibration_from_json(run.read(args.cal))
    if args.subset_size:
        res = identify_spam_subset(cal, args.seed, args.subset_size, report=True)
    else:
        res = identify_spam(cal, report=True)
    out = io.spam_to_json(res.model)
    out["residual"] = res.residual
    out["null_dimension"] = res.null_dimension
    out["validity"] = res.model.validity()
    run.emit(out)


def cmd_spam_subtract(run, args):
    err = _error(run, args.err)
    spam = io.spam_from_json(run.read(args.spam))
    run.emit(io.error_to_json(subtract_spam(err, spam, args.mode.replace("-", "_"))))


def _channel(run, args):
    given = [x for x in (args.gate, args.chi, args.schedule) if x]
    if len(given) != 1:
        raise UsageError("give exactly one of --gate, --chi, --schedule")
    if args.gate:
        return chi_from_unitary(gate_by_name(args.gate))
    if args.chi:
        m = io.matrix_from_json(run.read(args.chi))
        return m if isinstance(m, np.ndarray) else from_error_matrix(m)
    return io.schedule_from_json(run.read(args.schedule))


def _shots(text):
    if text in (None, "inf", "infinite", "none"):
        return None
    value = int(text)
    if value < 1:
        raise ValidationError("shots must be positive")
    return value


def cmd_tomo_simulate(run, args):
    channel = _channel(run, args)
    if not isinstance(channel, np.ndarray):
        channel = exact_channel_chi(channel)
    spam = io.spam_from_json(run.read(args.spam)) if args.spam else None
    n = int(round(np.log(channel.shape[0]) / np.log(4)))
    ds = simulate_dataset(channel, spam, TomographySetup(n, _shots(args.shots)), args.seed)
    run.emit(io.dataset_to_json(ds))


def cmd_tomo_reconstruct(run, args):
    ds = io.dataset_from_json(run.read(args.data))
    run.emit(io.process_to_json(reconstruct_chi(ds, project=args.project)))


def cmd_tomo_run(run, args):
    channel = _channel(run, args)
    if args.desired:
        u = gate_by_name(args.desired)
    elif args.gate:
        u = gate_by_name(args.gate)
    elif not isinstance(channel, np.ndarray):
        u = schedule_unitary(channel)
    else:
        raise UsageError("--desired is required with --chi")
    spam = io.spam_from_json(run.read(args.spam)) if args.spam else None
    err = run_qpt_experiment(channel, u, spam, shots=_shots(args.shots), seed=args.seed,
                             convention=args.convention, route=args.route, project=args.project)
    run.emit(io.error_to_json(err))


def cmd_report(run, args):
    err = _error(run, args.err)
    run.emit(summarize(err, args.top))


def cmd_plot_data(run, args):
    m = io.matrix_from_json(run.read(args.matrix))
    io.emit_plot_data(m, args.output)
    run.outputs.append(str(args.output))


# ---------------------------------------------------------------------------
# parser


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=None, help="RNG seed (default: $CHI_SEED or 0)")
    common.add_argument("--tol", type=float, default=None, help="global validation tolerance")
    common.add_argument("--threads", type=int, default=1, help="worker threads for Monte-Carlo work")
    common.add_argument("--manifest", default=None, help="manifest path (default: <output>.manifest.json)")

    p = _Parser(prog="chi", description="Process- and error-matrix analysis for quantum gates.")
    p.add_argument("--version", action="version", version=f"chi {__version__}")
    sub = p.add_subparsers(dest="command", parser_class=_Parser)

    def add(name, func, help_, aliases=()):
        sp = sub.add_parser(name, help=help_, parents=[common], aliases=list(aliases))
        sp.set_defaults(func=func, command=name)
        return sp

    sp = add("from-unitary", cmd_from_unitary, "process matrix of a unitary", aliases=["chi"])
    sp.add_argument("--input", help="unitary JSON")
    sp.add_argument("--gate", help="built-in gate name, e.g. CNOT, 'Z(0.3)', 'X⊗√Y'")
    sp.add_argument("--output")

    sp = add("to-err", cmd_to_err, "factor a desired unitary out of a process matrix", aliases=["err"])
    sp.add_argument("--chi", required=True)
    sp.add_argument("--unitary")
    sp.add_argument("--gate")
    sp.add_argument("--convention", default="after", choices=["after", "before", "error_after", "error_before"])
    sp.add_argument("--output")

    sp = add("compose", cmd_compose, "compose gates with errors in time order")
    sp.add_argument("gates", nargs="+", help="GateWithError JSON files (or arrays of them)")
    sp.add_argument("--mode", default="exact", choices=["exact", "first-order", "additive"])
    sp.add_argument("--output")

    sp = add("correct", cmd_correct, "suggest a unitary correction")
    sp.add_argument("--err", required=True)
    sp.add_argument("--set", help="comma-separated correctable Pauli labels (default: all)")
    sp.add_argument("--cz", action="store_true", help="CZ example: Z-phase corrections")
    sp.add_argument("--no-cz-angle", action="store_true", help="with --cz, correct only the single-qubit phases")
    sp.add_argument("--iterate", action="store_true", help="refine by exact composition")
    sp.add_argument("--max-iters", type=int, default=10)
    sp.add_argument("--iter-tol", type=float, default=1e-10)
    sp.add_argument("--placement", default="after_gate", choices=[p.value for p in Placement])
    sp.add_argument("--output")

    sp = add("lindblad", cmd_lindblad, "error matrix of a decoherent gate schedule")
    sp.add_argument("--schedule", required=True)
    sp.add_argument("--mode", default="exact", choices=["exact", "first-order", "trajectories"])
    sp.add_argument("--convention", default="after", choices=["after", "before", "error_after", "error_before"])
    sp.add_argument("--ntraj", type=int, default=100_000)
    sp.add_argument("--second-order", action="store_true")
    sp.add_argument("--raw", action="store_true", help="write the full process matrix instead")
    sp.add_argument("--output")

    spam = sub.add_parser("spam", help="SPAM identification and subtraction")
    spam_sub = spam.add_subparsers(dest="spam_command", parser_class=_Parser)
    sp = spam_sub.add_parser("identify", parents=[common], help="identify SPAM from calibration data")
    sp.set_defaults(func=cmd_spam_identify, command="spam-identify")
    sp.add_argument("--cal", required=True)
    sp.add_argument("--subset-size", type=int, default=None)
    sp.add_argument("--output")
    sp = spam_sub.add_parser("subtract", parents=[common], help="remove SPAM from an error matrix")
    sp.set_defaults(func=cmd_spam_subtract, command="spam-subtract")
    sp.add_argument("--err", required=True)
    sp.add_argument("--spam", required=True)
    sp.add_argument("--mode", default="full", choices=["full", "prep-negligible", "meas-negligible"])
    sp.add_argument("--output")

    tomo = sub.add_parser("tomo", help="simulated process tomography")
    tomo_sub = tomo.add_subparsers(dest="tomo_command", parser_class=_Parser)

    def channel_args(sp):
        sp.add_argument("--gate")
        sp.add_argument("--chi")
        sp.add_argument("--schedule")
        sp.add_argument("--spam")
        sp.add_argument("--shots", default="inf")
        sp.add_argument("--output")

    sp = tomo_sub.add_parser("simulate", parents=[common], help="simulate a tomography dataset")
    sp.set_defaults(func=cmd_tomo_simulate, command="tomo-simulate")
    channel_args(sp)
    sp = tomo_sub.add_parser("reconstruct", parents=[common], help="linear-inversion reconstruction")
    sp.set_defaults(func=cmd_tomo_reconstruct, command="tomo-reconstruct")
    sp.add_argument("--data", required=True)
    sp.add_argument("--project", action="store_true")
    sp.add_argument("--output")
    sp = tomo_sub.add_parser("run", parents=[common], help="simulate, reconstruct and extract the error matrix")
    sp.set_defaults(func=cmd_tomo_run, command="tomo-run")
    channel_args(sp)
    sp.add_argument("--desired", help="desired gate name (default: --gate or the schedule unitary)")
    sp.add_argument("--convention", default="after", choices=["after", "before", "error_after", "error_before"])
    sp.add_argument("--route", default="chi", choices=["chi", "rho"])
    sp.add_argument("--project", action="store_true")

    sp = add("report", cmd_report, "summary of an error matrix")
    sp.add_argument("--err", required=True)
    sp.add_argument("--top", type=int, default=10)
    sp.add_argument("--output")

    sp = add("plot-data", cmd_plot_data, "CSV of matrix elements for bar charts")
    sp.add_argument("--matrix", required=True)
    sp.add_argument("--output", required=True)
    return p


def _fail(code, exc):
    payload = {"error": type(exc).__name__, "message": str(exc)}
    details = getattr(exc, "details", None)
    if details:
        payload["details"] = json.loads(json.dumps(details, default=str))
    sys.stderr.write(json.dumps(payload) + "\n")
    return code


def dispatch(argv) -> int:
    argv = list(argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        if not hasattr(args, "func"):
            raise UsageError(parser.format_usage())
    except UsageError as exc:
        sys.stderr.write(str(exc) if str(exc).endswith("\n") else f"{exc}\n")
        return EXIT_USAGE
    if args.seed is None:
        args.seed = default_seed()
    if args.tol is not None:
        config.VALIDATION_TOL = args.tol
        config.UNITARY_TOL = args.tol
    run = _Run(argv, args)
    try:
        args.func(run, args)
    except UsageError as exc:
        sys.stderr.write(f"{exc}\n")
        return EXIT_USAGE
    except (ValidationError, KeyError, FileNotFoundError, IsADirectoryError) as exc:
        return _fail(EXIT_VALIDATION, exc)
    except (NumericalError, np.linalg.LinAlgError, ZeroDivisionError) as exc:
        return _fail(EXIT_NUMERICAL, exc)
    run.manifest()
    return EXIT_OK


def main(argv=None) -> int:
    return dispatch(sys.argv[1:] if argv is None else argv)


if __name__ == "__main__":
    sys.exit(main())
