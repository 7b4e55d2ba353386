"""Command-line entry point: solve one scenario, run a sweep, or run the
built-in validation suite."""

from __future__ import annotations

import argparse
import logging
import math
import sys
from pathlib import Path

from . import sweep as sweep_mod
from .assignment import no_pooling_solution, solve_ridepooling
from .flow import Request, RequestSet
from .graph import all_pairs_shortest_times, build_graph
from .temporal import WaitWindow, pair_probability, pair_probability_mc


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="poolflow",
        description="Two-person ride-pooling as a time-invariant network-flow model",
    )
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    commands = parser.add_subparsers(dest="command", required=True)

    solve = commands.add_parser("solve", help="solve a single scenario")
    solve.add_argument("--net", required=True, help="TNTP network file")
    solve.add_argument("--trips", required=True, help="TNTP trips file")
    solve.add_argument("--demand", type=float, required=True, help="total requests per hour")
    solve.add_argument("--tbar", type=float, required=True, help="waiting cap, minutes")
    solve.add_argument("--dbar", type=float, required=True, help="delay cap, minutes")
    solve.add_argument("--out", help="directory for artifact dumps")
    solve.add_argument("--seed", type=int, default=0)
    solve.add_argument("--self-pooling", action="store_true",
                       help="let a stream pool with itself")

    sweep = commands.add_parser("sweep", help="run a parameter sweep from a JSON spec")
    sweep.add_argument("--spec", required=True, help="JSON file with SweepSpec fields")
    sweep.add_argument("--out", required=True, help="CSV output path")
    sweep.add_argument("--timings", action="store_true",
                       help="append a wall_time_ms column (breaks byte-reproducibility)")

    validate = commands.add_parser("validate", help="run built-in oracle checks")
    validate.add_argument("--seed", type=int, default=0)
    validate.add_argument("--samples", type=int, default=200_000,
                          help="Monte Carlo samples per grid point")

    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
    )

    if args.command == "solve":
        return _cmd_solve(args)
    if args.command == "sweep":
        return _cmd_sweep(args)
    return _cmd_validate(args)


def _cmd_solve(args) -> int:
    report = sweep_mod.run_single(
        args.net, args.trips, args.demand, args.tbar, args.dbar,
        out_dir=args.out, self_pooling=args.self_pooling,
    )
    row = report.row
    print(f"requests: {len(report.requests)} streams, {args.demand:g}/h total")
    print(f"J          = {row.J:.4f} vehicle-min/h   (no pooling: {row.J_nopool:.4f})")
    print(f"J_tilde    = {row.J_tilde:.4f} vehicle-min/h")
    print(f"improvement          = {row.improvement_pct:.2f} %")
    print(f"pooled fraction      = {row.pooled_fraction_pct:.2f} %")
    print(f"rebalancing share    = {row.rebalancing_share_pct:.2f} %")
    print(f"greedy selections    = {row.iterations}")
    if args.out:
        print(f"artifacts written to {Path(args.out).resolve()}")
    return 0


def _cmd_sweep(args) -> int:
    spec = sweep_mod.SweepSpec.from_json(args.spec)
    rows = sweep_mod.run_sweep(spec, out_path=args.out, include_timings=args.timings)
    errors = sum(1 for r in rows if r.error)
    print(f"{len(rows)} cells -> {args.out}" + (f" ({errors} error rows)" if errors else ""))
    for row in rows:
        if row.error:
            print(f"  cell ({row.demand_total:g}, {row.t_bar:g}, {row.delta_bar:g}): {row.error}")
    return 1 if errors else 0


def _cmd_validate(args) -> int:
    """Quick self-checks: closed-form probability against Monte Carlo, and
    the hand-checked line-network scenario end to end."""
    failures = 0

    for i, (a, b, tbar_min) in enumerate(
        [(1.0, 1.0, 60.0 * math.log(2)), (2.0, 3.0, 30.0), (0.5, 4.0, 10.0), (6.0, 6.0, 5.0)]
    ):
        w = WaitWindow(tbar_min)
        exact = pair_probability(a, b, w)
        est, se = pair_probability_mc(a, b, w, samples=args.samples, seed=args.seed + i)
        ok = abs(exact - est) <= 3 * max(se, 1e-9)
        failures += not ok
        print(f"[{'PASS' if ok else 'FAIL'}] P({a},{b}, {tbar_min:g} min): "
              f"closed-form {exact:.6f} vs MC {est:.6f} (3se={3 * se:.6f})")

    g = build_graph(4, [(1, 2, 1), (2, 3, 1), (3, 4, 1), (2, 1, 1), (3, 2, 1), (4, 3, 1)])
    tbl = all_pairs_shortest_times(g)
    rs = RequestSet((Request(1, 3, 2.0), Request(2, 4, 2.0)))
    sol, pooled, _ = solve_ridepooling(g, tbl, rs, delay_cap=0.0, w=WaitWindow(600.0))
    base = no_pooling_solution(g, tbl, rs)
    improvement = 100 * (base.objective_J_tilde - sol.objective_J_tilde) / base.objective_J_tilde
    ok = pooled.pooled_fraction > 0.99 and abs(improvement - 25.0) < 0.5
    failures += not ok
    print(f"[{'PASS' if ok else 'FAIL'}] line-network nested pair: "
          f"pooled {100 * pooled.pooled_fraction:.2f} %, J_tilde improvement {improvement:.2f} %")

    print("validation " + ("FAILED" if failures else "passed"))
    return 1 if failures else 0


if __name__ == "__main__":
    sys.exit(main())
