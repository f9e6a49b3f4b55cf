"""Command line interface: ``solve``, ``simulate``, ``figure`` and ``verify``."""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from pathlib import Path

from . import equilibrium as eqm
from .dynamics import DEFAULT_MAX_ITERS, DEFAULT_TOL, SCHEDULES, NGameParams, iterate
from .errors import DomainError, MinerDilemmaError
from .game import GameParams
from .sweeps import PANELS, figure_sweep, write_csv
from .verification import run_suite

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_BAD_INPUT = 2
EXIT_NOT_CONVERGED = 3


def _float(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a number: {text!r}")
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"not a finite number: {text!r}")
    return value


def _float_list(text: str) -> list[float]:
    return [_float(part) for part in text.split(",") if part.strip()]


def _bad_input(exc: Exception) -> int:
    print(f"error: {exc}", file=sys.stderr)
    return EXIT_BAD_INPUT


def equilibrium_record(params: GameParams, e: eqm.Equilibrium) -> dict:
    return {
        "m1": params.m1,
        "m2": params.m2,
        "t": params.t,
        "p": params.p,
        "kind": e.kind.value,
        "x1": e.x1,
        "x2": e.x2,
        "y_star": e.y_star,
        "ppoa": e.ppoa,
    }


def cmd_solve(args) -> int:
    try:
        params = GameParams(args.m1, args.m2, args.t, args.p)
        e = eqm.solve(params)
    except DomainError as exc:
        return _bad_input(exc)
    record = equilibrium_record(params, e)
    if args.json:
        print(json.dumps(record))
    else:
        print(f"kind: {e.kind.value}")
        for key in ("x1", "x2", "y_star", "ppoa"):
            print(f"{key}: {record[key]!r}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    try:
        params = NGameParams(tuple(args.pools), args.t, args.p)
        res = iterate(params, tol=args.tol, max_iters=args.max_iters, schedule=args.schedule)
    except DomainError as exc:
        return _bad_input(exc)
    n = params.n
    if args.csv:
        writer = csv.writer(sys.stdout, lineterminator="\n")
        writer.writerow(["attacker", "victim", "x"])
        for i in range(n):
            for j in range(n):
                if i != j:
                    writer.writerow([i, j, repr(float(res.matrix[i, j]))])
    elif args.json:
        print(json.dumps({
            "pools": list(params.pool_powers),
            "t": params.t,
            "p": params.p,
            "schedule": res.schedule,
            "matrix": res.matrix.tolist(),
            "rewards": res.rewards.tolist(),
            "iterations": res.iterations,
            "converged": res.converged,
            "ppoa": res.ppoa,
        }))
    else:
        print("matrix (row i = power pool i sends into each pool):")
        for i in range(n):
            print("  " + " ".join(f"{v!r}" for v in res.matrix[i].tolist()))
        print("rewards: " + " ".join(repr(v) for v in res.rewards.tolist()))
        print(f"iterations: {res.iterations}")
        print(f"converged: {str(res.converged).lower()}")
        print(f"ppoa: {res.ppoa!r}")
    if not res.converged and not args.allow_nonconverged:
        print(f"error: no convergence after {res.iterations} sweeps "
              f"(last change {res.last_change})", file=sys.stderr)
        return EXIT_NOT_CONVERGED
    return EXIT_OK


def cmd_figure(args) -> int:
    spec = PANELS[args.panel]
    if args.axis1:
        spec = spec.with_axis(0, args.axis1)
    if args.axis2:
        spec = spec.with_axis(1, args.axis2)
    try:
        rows = figure_sweep(args.panel, spec, tol=args.tol, max_iters=args.max_iters,
                            schedule=args.schedule, workers=args.workers)
    except DomainError as exc:
        return _bad_input(exc)
    out_dir = Path(args.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    path = out_dir / f"figure_{args.panel}.csv"
    write_csv(rows, spec.axis_names, path)
    failed = sum(1 for r in rows if r["error"])
    stalled = sum(1 for r in rows if not r["converged"])
    violations = sum(1 for r in rows if r["conjecture_violation"])
    print(f"wrote {path}: {len(rows)} points, {stalled} not converged, "
          f"{failed} failed, {violations} conjecture violations")
    return EXIT_OK


def cmd_verify(args) -> int:
    print(f"seed: {args.seed}")
    print(f"cases: {args.cases}")
    results = run_suite(cases=args.cases, seed=args.seed)
    for res in results:
        print(res.line())
    return EXIT_OK if all(r.passed for r in results) else EXIT_VERIFY_FAILED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="minerdilemma",
        description="Pure Nash equilibria and price of anarchy of pool block-withholding games.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="equilibrium of a two-pool game")
    p.add_argument("--m1", type=_float, required=True, help="mining power of pool 1")
    p.add_argument("--m2", type=_float, required=True, help="mining power of pool 2")
    p.add_argument("--t", type=_float, default=0.0, help="mining power outside both pools")
    p.add_argument("--p", type=_float, default=0.0, help="betrayal fraction in [0, 1)")
    p.add_argument("--json", action="store_true", help="emit one JSON object")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("simulate", help="best-response dynamics of an N-pool game")
    p.add_argument("--pools", type=_float_list, required=True, help="comma-separated pool powers")
    p.add_argument("--t", type=_float, default=0.0)
    p.add_argument("--p", type=_float, default=0.0)
    p.add_argument("--tol", type=_float, default=DEFAULT_TOL)
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--schedule", choices=SCHEDULES, default="jacobi")
    out = p.add_mutually_exclusive_group()
    out.add_argument("--csv", action="store_true", help="one CSV row per (attacker, victim)")
    out.add_argument("--json", action="store_true")
    p.add_argument("--allow-nonconverged", action="store_true")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("figure", help="sweep one three-pool price-of-anarchy panel to CSV")
    p.add_argument("--panel", choices=sorted(PANELS), required=True)
    p.add_argument("--out-dir", default=".")
    p.add_argument("--axis1", type=_float_list, help="override values of the first swept axis")
    p.add_argument("--axis2", type=_float_list, help="override values of the second swept axis")
    p.add_argument("--tol", type=_float, default=DEFAULT_TOL)
    p.add_argument("--max-iters", type=int, default=DEFAULT_MAX_ITERS)
    p.add_argument("--schedule", choices=SCHEDULES, default="jacobi")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_figure)

    p = sub.add_parser("verify", help="run the seeded oracle property suite")
    p.add_argument("--cases", type=int, default=200)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except MinerDilemmaError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_VERIFY_FAILED


if __name__ == "__main__":
    sys.exit(main())
