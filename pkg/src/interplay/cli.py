"""Command-line entry points: simulate, validate, classify, render.

Exit codes: 0 on success (a run that leaves the domain is a valid outcome),
1 on usage or parameter errors, 2 on I/O errors.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from . import analysis, render, storage
from .core import (
    DEFAULT_ROW_TOLERANCE,
    DomainViolation,
    NonFiniteError,
    Status,
    validate_opinion_matrix,
)
from .dynamics import SimulationConfig, appraisal_update, simulate
from .montecarlo import ExperimentParams, generic_initial, run_experiment

log = logging.getLogger("interplay")

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_IO = 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _add_input(p: argparse.ArgumentParser) -> None:
    g = p.add_argument_group("input (exactly one source)")
    g.add_argument("--matrix", help="inline JSON matrix, e.g. '[[1,2],[3,4]]'")
    g.add_argument("--input", help="matrix file (.json nested list, or CSV/whitespace text)")
    g.add_argument("--generate", action="store_true",
                   help="draw a generic initial matrix from --n/--m/--support/--seed")
    g.add_argument("--n", type=int, default=9)
    g.add_argument("--m", type=int, default=6)
    g.add_argument("--support", type=float, default=1.0)
    g.add_argument("--seed", type=int, default=0)


def _add_common(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="JSON file of option values; flags given explicitly win")
    p.add_argument("--out-dir", default="out")
    p.add_argument("-v", "--verbose", action="store_true")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="interplay", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("simulate", help="iterate the model and export the trajectory")
    _add_input(p)
    _add_common(p)
    p.add_argument("--max-steps", type=int, default=1000)
    p.add_argument("--tol", type=float, default=1e-9, help="convergence tolerance on max |dY|")
    p.add_argument("--record-every", type=int, default=1)
    p.add_argument("--row-tol", type=float, default=DEFAULT_ROW_TOLERANCE,
                   help="rows with 1-norm at or below this leave the domain")
    p.add_argument("--format", choices=("json", "csv", "both"), default="json")
    p.add_argument("--window-start", type=int, default=analysis.WINDOW_START)
    p.add_argument("--window-end", type=int, default=analysis.WINDOW_END)
    p.add_argument("--threshold", type=float, default=analysis.NONVANISHING_THRESHOLD)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("validate", help="Monte Carlo check of the non-vanishing condition")
    _add_common(p)
    p.add_argument("--runs", type=int, default=1000)
    p.add_argument("--n", type=int, default=9)
    p.add_argument("--m", type=int, default=4)
    p.add_argument("--support", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--window-start", type=int, default=analysis.WINDOW_START)
    p.add_argument("--window-end", type=int, default=analysis.WINDOW_END)
    p.add_argument("--threshold", type=float, default=analysis.NONVANISHING_THRESHOLD)
    p.add_argument("--epsilon", type=float, default=0.01)
    p.add_argument("--xi", type=float, default=0.01)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("classify", help="run the balance / consensus / equilibrium predicates")
    _add_input(p)
    _add_common(p)
    p.add_argument("--kind", choices=("opinion", "appraisal"), default="opinion")
    p.add_argument("--tol", type=float, default=1e-9, help="value tolerance")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("render", help="grayscale heatmaps of a saved trajectory")
    _add_common(p)
    p.add_argument("--trajectory", required=True, help="trajectory JSON written by 'simulate'")
    p.add_argument("--frames", default="0,1,mid,final")
    p.add_argument("--cell", type=int, default=render.DEFAULT_CELL, help="pixels per entry")
    p.set_defaults(func=cmd_render)
    parser.subcommands = sub.choices
    return parser


def _read_input(args) -> np.ndarray:
    sources = [args.matrix is not None, args.input is not None, bool(args.generate)]
    if sum(sources) != 1:
        raise UsageError("give exactly one of --matrix, --input, --generate")
    if args.matrix is not None:
        try:
            return np.array(json.loads(args.matrix), dtype=np.float64, ndmin=2)
        except (json.JSONDecodeError, ValueError, TypeError) as exc:
            raise UsageError(f"cannot parse --matrix: {exc}") from exc
    if args.input is not None:
        return storage.load_matrix(args.input)
    return np.array(generic_initial(args.n, args.m, args.support, args.seed))


def _jsonable(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    return str(obj)


def _verdict_dict(v) -> dict:
    if isinstance(v, analysis.BalanceVerdict):
        return {
            "balanced": v.balanced,
            "partition": None if v.partition is None else v.partition.tolist(),
            "witness": None if v.witness is None else {"kind": v.witness.kind, "index": list(v.witness.index)},
        }
    return {"kind": v.kind.value, "partition": None if v.partition is None else v.partition.tolist()}


def _equilibrium(Y, tol) -> Optional[dict]:
    try:
        eq = analysis.classify_equilibrium(Y, tol)
    except analysis.NotAnEquilibrium as exc:
        return {"equilibrium": False, "column": exc.column, "reason": str(exc)}
    return {
        "equilibrium": True,
        "rho": eq.rho.tolist(),
        "coefficients": eq.coefficients.tolist(),
        "residual": eq.residual,
    }


def opinion_summary(Y: np.ndarray, tol: float) -> dict:
    return {
        "modulus_sign_consensus": _verdict_dict(analysis.modulus_sign_consensus(Y)),
        "modulus_consensus": _verdict_dict(analysis.modulus_consensus(Y, tol)),
        "next_appraisal_balance": _verdict_dict(analysis.is_socially_balanced_triads(appraisal_update(Y))),
        "equilibrium": _equilibrium(Y, tol),
    }


def cmd_simulate(args) -> int:
    config = SimulationConfig(
        max_steps=args.max_steps, convergence_tolerance=args.tol,
        row_tolerance=args.row_tol, record_every=args.record_every,
    )
    Y0 = validate_opinion_matrix(_read_input(args), config.row_tolerance)
    traj = simulate(Y0, config)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    if args.format in ("json", "both"):
        storage.save_trajectory(traj, out / "trajectory.json")
    if args.format in ("csv", "both"):
        storage.save_trajectory_csv(traj, out / "trajectory.csv")

    final = traj.final
    if traj.status is Status.DOMAIN_VIOLATION:
        log.warning("trajectory left the domain at step %d", traj.termination.step)
    summary_tol = max(args.tol, 1e-6)
    summary = {
        "termination": traj.termination.status.value,
        "termination_step": traj.termination.step,
        "steps_computed": final.t,
        "final_opinions": opinion_summary(final.Y, summary_tol),
        "final_appraisal_balance": None if final.X is None
        else _verdict_dict(analysis.is_socially_balanced_triads(final.X)),
    }
    try:
        summary["nonvanishing"] = analysis.nonvanishing_check(
            traj, args.window_start, args.window_end, args.threshold)
    except ValueError:
        summary["nonvanishing"] = None
    (out / "summary.json").write_text(json.dumps(summary, indent=1, default=_jsonable) + "\n")

    eq = summary["final_opinions"]["equilibrium"]
    print(f"termination: {summary['termination']} (step {summary['termination_step']}, "
          f"{summary['steps_computed']} steps computed)")
    print(f"consensus: {summary['final_opinions']['modulus_consensus']['kind']}; "
          f"sign pattern: {summary['final_opinions']['modulus_sign_consensus']['kind']}")
    bal = summary["final_appraisal_balance"]
    print(f"appraisal balanced: {None if bal is None else bal['balanced']}")
    if eq and eq["equilibrium"]:
        coeffs = ", ".join(f"{c:.6g}" for c in eq["coefficients"])
        print(f"equilibrium: rho={eq['rho']} coefficients=({coeffs})")
    else:
        print("equilibrium: none")
    print(f"wrote {out}")
    return EXIT_OK


def cmd_validate(args) -> int:
    params = ExperimentParams(
        n=args.n, m=args.m, a=args.support, runs=args.runs, master_seed=args.seed,
        window_start=args.window_start, window_end=args.window_end, threshold=args.threshold,
        epsilon=args.epsilon, xi=args.xi,
    )
    report = run_experiment(params, workers=args.workers)
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    storage.save_report(report, out / "report.json")
    print(f"runs: {report.N_completed}  successes: {report.successes}  p_hat: {report.p_hat:.6f}")
    print(f"chernoff minimum N (eps={params.epsilon}, xi={params.xi}): {report.chernoff_N_minimum}")
    if report.N_completed < report.chernoff_N_minimum:
        print("note: fewer runs than the Chernoff minimum for these eps/xi")
    return EXIT_OK


def cmd_classify(args) -> int:
    M = _read_input(args)
    if args.kind == "appraisal":
        if M.shape[0] != M.shape[1]:
            raise UsageError("appraisal matrix must be square")
        result = {
            "balance_triads": _verdict_dict(analysis.is_socially_balanced_triads(M, args.tol)),
            "balance_rows": _verdict_dict(analysis.is_socially_balanced_rows(M, args.tol)),
        }
    else:
        Y = validate_opinion_matrix(M)
        result = opinion_summary(Y, args.tol)
    text = json.dumps(result, indent=1, default=_jsonable)
    print(text)
    if args.out_dir:
        out = Path(args.out_dir)
        out.mkdir(parents=True, exist_ok=True)
        (out / "classify.json").write_text(text + "\n")
    return EXIT_OK


def cmd_render(args) -> int:
    path = Path(args.trajectory)
    if not path.is_file():
        raise FileNotFoundError(f"no trajectory at {path}")
    if args.cell < 1:
        raise UsageError("--cell must be >= 1")
    traj = storage.load_trajectory(path)
    for p in render.render_trajectory(traj, Path(args.out_dir), args.frames, args.cell):
        print(p)
    return EXIT_OK


def _apply_config_file(parser: argparse.ArgumentParser, argv: Sequence[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if not getattr(args, "config", None):
        return args
    values = json.loads(Path(args.config).read_text())
    if not isinstance(values, dict):
        raise UsageError("config file must hold a JSON object")
    sub = parser.subcommands[args.command]
    known = {a.dest for a in sub._actions}
    unknown = set(k.replace("-", "_") for k in values) - known
    if unknown:
        raise UsageError(f"unknown config keys: {', '.join(sorted(unknown))}")
    sub.set_defaults(**{k.replace("-", "_"): v for k, v in values.items()})
    return parser.parse_args(argv)


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = _apply_config_file(parser, argv)
        logging.basicConfig(
            level=logging.INFO if args.verbose else logging.WARNING,
            format="%(asctime)s [%(levelname)s] %(message)s",
        )
        return args.func(args)
    except (UsageError, DomainViolation, NonFiniteError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
