"""Command-line entry point: evolve, concurrence, scan, validate, graph.

Exit codes: 0 success, 1 validation failure, 2 usage error, 3 numerical failure.
Output goes to ``--output``, else to ``$COLLECTIVE_DECAY_OUTPUT_DIR/<name>``
when that variable is set, else to stdout.
"""

from __future__ import annotations

import argparse
import io
import json
import math
import os
import sys
from pathlib import Path

import numpy as np

from . import subspace_e1 as e1
from . import subspace_e2 as e2
from .errors import DomainError, NumericalFailure
from .hilbert import basis_state, ket_bra
from .oracle import EvolutionConfig, evolve_full
from .scaling import correlation_graph
from .validate import run_validation

OUTPUT_DIR_ENV = "COLLECTIVE_DECAY_OUTPUT_DIR"

EXIT_OK, EXIT_VALIDATION, EXIT_USAGE, EXIT_NUMERICAL = 0, 1, 2, 3

PRESETS = {
    "fig1": {"command": "concurrence", "e": 1, "n": [2, 6, 10, 14], "t_max": 1.0},
    "fig2": {"command": "scan", "e": 1, "n_min": 2, "n_max": 30},
    "fig3": {"command": "concurrence", "e": 1, "n": [2, 6, 10, 14], "t_max": 1.0},
    "fig5": {"command": "concurrence", "e": 2, "n": [4, 7, 10, 13], "t_max": 1.0},
}


def fmt(x) -> str:
    if isinstance(x, (bool, np.bool_)):
        return str(int(x))
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    if isinstance(x, str):
        return x
    return "%.17g" % (float(x) + 0.0)  # no negative zeros


def write_csv(header: list[str], rows: list[list]) -> str:
    buf = io.StringIO()
    buf.write(",".join(header) + "\n")
    for row in rows:
        buf.write(",".join(fmt(v) for v in row) + "\n")
    return buf.getvalue()


def write_json(header: list[str], rows: list[list], meta: dict) -> str:
    def clean(v):
        if isinstance(v, (bool, np.bool_)):
            return bool(v)
        if isinstance(v, (int, np.integer)):
            return int(v)
        if isinstance(v, str):
            return v
        v = float(v)
        return v if math.isfinite(v) else str(v)

    doc = dict(meta, columns=header, rows=[[clean(v) for v in row] for row in rows])
    return json.dumps(doc, indent=2) + "\n"


def emit(text: str, args, name: str) -> None:
    path = args.output
    if path is None and os.environ.get(OUTPUT_DIR_ENV):
        path = Path(os.environ[OUTPUT_DIR_ENV]) / name
    if path is None:
        sys.stdout.write(text)
        return
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", newline="\n") as fh:
        fh.write(text)


def _table(args, header, rows, meta, stem) -> None:
    if args.format == "json":
        emit(write_json(header, rows, meta), args, stem + ".json")
    elif args.format == "csv":
        emit(write_csv(header, rows), args, stem + ".csv")
    else:
        raise DomainError(f"format {args.format!r} is only available for graphs")


def _check_ns(e: int, ns: list[int]) -> None:
    if e not in (1, 2):
        raise DomainError(f"--e must be 1 or 2, got {e}")
    need = 2 if e == 1 else 4
    for n in ns:
        if n < need:
            raise DomainError(f"e={e} requires n >= {need}, got n={n}")


def time_grid(args) -> np.ndarray:
    if args.samples < 2:
        raise DomainError("--samples must be >= 2")
    if not args.t_max > 0:
        raise DomainError("--t-max must be positive")
    if not args.rate > 0:
        raise DomainError("--rate must be positive")
    return np.linspace(0.0, args.t_max, args.samples)


def _coefficients(e: int, n: int, t: float) -> np.ndarray:
    if e == 1:
        return e1.coefficients_closed_form(n, t).as_array()
    return e2.closed_form_b(n, t).b


def _reconstruct(e: int, n: int, t: float) -> np.ndarray:
    if e == 1:
        return e1.reconstruct(e1.coefficients_closed_form(n, t))
    return e2.reconstruct(e2.closed_form_b(n, t))


def cmd_evolve(args) -> int:
    ns = args.n
    _check_ns(args.e, ns)
    times = time_grid(args)
    scaled = args.rate * times
    names = [f"a{i}" for i in range(4)] if args.e == 1 else [f"b{i}" for i in range(10)]
    header = (["n"] if len(ns) > 1 else []) + ["t"] + names + (["max_abs_dev"] if args.oracle else [])
    rows = []
    for n in ns:
        devs = None
        if args.oracle:
            psi = basis_state(n, list(range(1, args.e + 1)))
            cfg = EvolutionConfig(t_final=float(scaled[-1]), dt=args.dt, tolerance=args.tolerance)
            traj = evolve_full(ket_bra(psi, psi), cfg, times=scaled)
            devs = [float(np.max(np.abs(_reconstruct(args.e, n, t) - rho))) for t, rho in zip(scaled, traj.states)]
        for i, (t, s) in enumerate(zip(times, scaled)):
            row = ([n] if len(ns) > 1 else []) + [t] + list(_coefficients(args.e, n, float(s)))
            if devs is not None:
                row.append(devs[i])
            rows.append(row)
    meta = {"command": "evolve", "e": args.e, "n": ns, "rate": args.rate}
    _table(args, header, rows, meta, f"evolve_e{args.e}_n{'-'.join(map(str, ns))}")
    return EXIT_OK


def cmd_concurrence(args) -> int:
    ns = args.n
    _check_ns(args.e, ns)
    times = time_grid(args)
    multi = len(ns) > 1
    header = (["n"] if multi else []) + ["t", "C_excited_ground", "C_ground_ground"]
    degenerate = args.e == 1 and min(ns) < 3
    if args.e == 2:
        header.append("C_excited_excited")
    if degenerate:
        # no ground-ground pair exists at n = 2; the formula value is still reported
        header.append("degenerate")
    rows = []
    for n in ns:
        for t in times:
            s = float(args.rate * t)
            if args.e == 1:
                vals = [e1.concurrence_formula(n, s, e1.EXCITED_GROUND), e1.concurrence_formula(n, s, e1.GROUND_GROUND)]
            else:
                vals = [e2.concurrence_e2(n, s, c) for c in (e2.EXCITED_GROUND, e2.GROUND_GROUND, e2.EXCITED_EXCITED)]
            row = ([n] if multi else []) + [t] + vals
            if degenerate:
                row.append(n < 3)
            rows.append(row)
    meta = {"command": "concurrence", "e": args.e, "n": ns, "rate": args.rate}
    _table(args, header, rows, meta, f"concurrence_e{args.e}_n{'-'.join(map(str, ns))}")
    return EXIT_OK


def cmd_scan(args) -> int:
    n_min = args.n_min if args.n_min is not None else (2 if args.e == 1 else 4)
    n_max = args.n_max if args.n_max is not None else n_min + 10
    _check_ns(args.e, [n_min])
    if n_max < n_min:
        raise DomainError("--n-max must be >= --n-min")
    rows = []
    if args.e == 1:
        header = ["n", "C_kj_inf", "C_jm_inf", "source", "degenerate"]
        if args.oracle:
            from .scaling import class_weights

            for n in range(n_min, n_max + 1):
                w = class_weights(1, n, oracle=True)
                rows.append([n, w["excited_ground"], w["ground_ground"], "oracle", n < 3])
        else:
            for r in e1.stationary_scan(n_min, n_max):
                rows.append([r.n, r.c_kj, r.c_jm, "analytic", r.degenerate])
    else:
        header = ["n", "C_kj_inf", "C_jm_inf", "source", "printed_C_kj_inf", "printed_C_jm_inf"]
        for r in e2.stationary_scan(n_min, n_max, oracle=args.oracle):
            if r.oracle_kj is not None:
                rows.append([r.n, r.oracle_kj, r.oracle_jm, "oracle", r.printed_kj, r.printed_jm])
            else:
                rows.append([r.n, r.c_kj, r.c_jm, "analytic", r.printed_kj, r.printed_jm])
    meta = {"command": "scan", "e": args.e, "n_min": n_min, "n_max": n_max}
    _table(args, header, rows, meta, f"scan_e{args.e}_n{n_min}-{n_max}")
    return EXIT_OK


def cmd_validate(args) -> int:
    report = run_validation(full=args.full)
    emit(json.dumps(report, indent=2) + "\n", args, "validate.json")
    failed = [name for name, c in report["checks"].items() if not c["passed"]]
    for name in failed:
        print(f"FAILED: {name}", file=sys.stderr)
    return EXIT_OK if not failed else EXIT_VALIDATION


def cmd_graph(args) -> int:
    if len(args.n) != 1:
        raise DomainError("graph takes a single --n")
    (n,) = args.n
    _check_ns(args.e, [n])
    threshold = args.threshold if args.threshold == "auto" else _parse_threshold(args.threshold)
    g = correlation_graph(args.e, n, threshold, oracle=args.oracle)
    if args.format == "json":
        emit(g.to_json(), args, f"graph_e{args.e}_n{n}.json")
    else:
        emit(g.to_dot(), args, f"graph_e{args.e}_n{n}.dot")
    return EXIT_OK


def _parse_threshold(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise DomainError(f"--threshold must be a number or 'auto', got {text!r}") from None


COMMANDS = {
    "evolve": cmd_evolve,
    "concurrence": cmd_concurrence,
    "scan": cmd_scan,
    "validate": cmd_validate,
    "graph": cmd_graph,
}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--e", type=int, default=1, help="number of initial excitations (1 or 2)")
    common.add_argument("--n", type=int, nargs="+", default=None, help="system size(s)")
    common.add_argument("--t-max", type=float, default=5.0)
    common.add_argument("--samples", type=int, default=101)
    common.add_argument("--dt", type=float, default=None, help="oracle RK4 step")
    common.add_argument("--tolerance", type=float, default=1e-10)
    common.add_argument("--rate", type=float, default=1.0, help="decay rate; time axis is rescaled by it")
    common.add_argument("--format", choices=("csv", "json", "dot"), default=None)
    common.add_argument("--output", default=None, help="output file (default: stdout or $%s)" % OUTPUT_DIR_ENV)
    common.add_argument("--oracle", action="store_true", help="cross-check against full-space evolution")
    common.add_argument("--preset", choices=sorted(PRESETS), default=None)

    parser = argparse.ArgumentParser(prog="collective-decay", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("evolve", parents=[common], help="subspace coefficients vs time")
    sub.add_parser("concurrence", parents=[common], help="pair concurrences vs time")
    p = sub.add_parser("scan", parents=[common], help="stationary concurrences vs n")
    p.add_argument("--n-min", type=int, default=None)
    p.add_argument("--n-max", type=int, default=None)
    p = sub.add_parser("validate", parents=[common], help="run the self-check suite")
    p.add_argument("--full", action="store_true", help="extend oracle grids to n = 8")
    p = sub.add_parser("graph", parents=[common], help="stationary entanglement graph")
    p.add_argument("--threshold", default="auto", help="edge threshold in (0, 1) or 'auto'")
    return parser


def _apply_preset(args) -> None:
    preset = PRESETS[args.preset]
    if preset["command"] != args.command:
        raise DomainError(f"preset {args.preset} belongs to the {preset['command']!r} command")
    for key, value in preset.items():
        if key != "command":
            setattr(args, key, value)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.preset:
            _apply_preset(args)
        if args.n is None:
            args.n = [4 if args.e == 2 else 2]
        if args.format is None:
            args.format = "dot" if args.command == "graph" else "csv"
        return COMMANDS[args.command](args)
    except DomainError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalFailure as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
