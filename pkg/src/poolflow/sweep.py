"""Parameter sweeps over demand level, waiting window and delay cap.

Each sweep cell solves the no-pooling baseline and the ride-pooling
pipeline on the same scaled request set and reports travel-time and
fleet metrics. Output is a CSV with one row per cell; identical specs
produce byte-identical files (timings are opt-in precisely because they
would break that).
"""

from __future__ import annotations

import json
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path

from .assignment import (
    AssignmentState,
    dump_assignment_csv,
    greedy_assign,
    build_pooled_demand,
    no_pooling_solution,
)
from .flow import FlowSolution, RequestSet, solve_flow
from .graph import RoadGraph, TravelTimeTable, all_pairs_shortest_times
from .spatial import PairwiseTable, build_pairwise_table
from .temporal import WaitWindow
from .tntp import parse_tntp_network, parse_tntp_trips, scale_to_requests

logger = logging.getLogger(__name__)

CSV_FIELDS = (
    "demand_total",
    "t_bar",
    "delta_bar",
    "J",
    "J_tilde",
    "J_nopool",
    "improvement_pct",
    "pooled_fraction_pct",
    "rebalancing_share_pct",
    "iterations",
)


@dataclass(frozen=True)
class SweepSpec:
    """Grid definition: every combination of the three lists is solved."""

    demand_totals: tuple[float, ...]
    wait_caps: tuple[float, ...]  # minutes
    delay_caps: tuple[float, ...]  # minutes
    network_path: str
    trips_path: str
    seed: int = 0

    def __post_init__(self):
        if not self.demand_totals or not self.wait_caps or not self.delay_caps:
            raise ValueError("demand_totals, wait_caps and delay_caps must be nonempty")
        if any(x <= 0 for x in self.demand_totals):
            raise ValueError("demand totals must be positive")
        if any(x <= 0 for x in self.wait_caps):
            raise ValueError("waiting caps must be positive")
        if any(x < 0 for x in self.delay_caps):
            raise ValueError("delay caps must be nonnegative")
        for path in (self.network_path, self.trips_path):
            if not Path(path).is_file():
                raise FileNotFoundError(f"input file not found: {path}")

    @classmethod
    def from_json(cls, path: str | Path) -> "SweepSpec":
        raw = json.loads(Path(path).read_text())
        return cls(
            demand_totals=tuple(raw["demand_totals"]),
            wait_caps=tuple(raw["wait_caps"]),
            delay_caps=tuple(raw["delay_caps"]),
            network_path=raw["network_path"],
            trips_path=raw["trips_path"],
            seed=int(raw.get("seed", 0)),
        )


@dataclass
class SweepRow:
    """Metrics of one sweep cell. `error` is set (and the metric fields
    left at nan) when the cell failed."""

    demand_total: float
    t_bar: float
    delta_bar: float
    J: float = float("nan")
    J_tilde: float = float("nan")
    J_nopool: float = float("nan")
    improvement_pct: float = float("nan")
    pooled_fraction_pct: float = float("nan")
    rebalancing_share_pct: float = float("nan")
    iterations: int = 0
    wall_time_ms: float = float("nan")
    error: str = ""


@dataclass
class CellReport:
    """Everything run_single produced for one cell, for inspection."""

    row: SweepRow
    solution: FlowSolution
    baseline: FlowSolution
    requests: RequestSet


def _solve_cell(
    g: RoadGraph,
    tbl: TravelTimeTable,
    requests: RequestSet,
    baseline: FlowSolution,
    demand_total: float,
    t_bar: float,
    delta_bar: float,
    self_pooling: bool = False,
) -> tuple[SweepRow, FlowSolution, PairwiseTable, AssignmentState]:
    started = time.perf_counter()
    table = build_pairwise_table(tbl, requests, delta_bar)
    state = greedy_assign(requests, table, WaitWindow(t_bar), self_pooling=self_pooling)
    pooled = build_pooled_demand(requests, state, table, g.vertex_count)
    solution = solve_flow(g, tbl, pooled.d_rp)
    elapsed_ms = (time.perf_counter() - started) * 1000.0
    j_nopool = baseline.objective_J
    row = SweepRow(
        demand_total=demand_total,
        t_bar=t_bar,
        delta_bar=delta_bar,
        J=solution.objective_J,
        J_tilde=solution.objective_J_tilde,
        J_nopool=j_nopool,
        improvement_pct=100.0 * (j_nopool - solution.objective_J) / j_nopool if j_nopool > 0 else 0.0,
        pooled_fraction_pct=100.0 * pooled.pooled_fraction,
        rebalancing_share_pct=100.0 * solution.rebalancing_share,
        iterations=pooled.iterations,
        wall_time_ms=elapsed_ms,
    )
    return row, solution, table, state


def run_sweep(spec: SweepSpec, out_path: str | Path | None = None,
              include_timings: bool = False) -> list[SweepRow]:
    """Solve every (demand, t_bar, delta_bar) cell of the spec.

    A failing cell yields an error row and the sweep continues. When
    `out_path` is given the rows are also written as CSV.
    """
    g = parse_tntp_network(Path(spec.network_path).read_text())
    tbl = all_pairs_shortest_times(g)
    trips = parse_tntp_trips(Path(spec.trips_path).read_text())

    rows: list[SweepRow] = []
    for demand_total in spec.demand_totals:
        try:
            requests = scale_to_requests(trips, demand_total)
            baseline = no_pooling_solution(g, tbl, requests)
        except Exception as exc:  # noqa: BLE001 - cell errors must not kill the sweep
            logger.error("demand level %g failed: %s", demand_total, exc)
            for t_bar in spec.wait_caps:
                for delta_bar in spec.delay_caps:
                    rows.append(SweepRow(demand_total, t_bar, delta_bar, error=str(exc)))
            continue
        for t_bar in spec.wait_caps:
            for delta_bar in spec.delay_caps:
                try:
                    row, _, _, _ = _solve_cell(
                        g, tbl, requests, baseline, demand_total, t_bar, delta_bar
                    )
                except Exception as exc:  # noqa: BLE001
                    logger.error(
                        "cell (%g, %g, %g) failed: %s", demand_total, t_bar, delta_bar, exc
                    )
                    row = SweepRow(demand_total, t_bar, delta_bar, error=str(exc))
                rows.append(row)
    if out_path is not None:
        write_rows_csv(rows, out_path, include_timings=include_timings)
    return rows


def run_single(
    network_path: str | Path,
    trips_path: str | Path,
    demand_total: float,
    t_bar: float,
    delta_bar: float,
    out_dir: str | Path | None = None,
    self_pooling: bool = False,
) -> CellReport:
    """Solve one cell and optionally dump all artifacts for inspection."""
    g = parse_tntp_network(Path(network_path).read_text())
    tbl = all_pairs_shortest_times(g)
    trips = parse_tntp_trips(Path(trips_path).read_text())
    requests = scale_to_requests(trips, demand_total)
    baseline = no_pooling_solution(g, tbl, requests)
    row, solution, table, state = _solve_cell(
        g, tbl, requests, baseline, demand_total, t_bar, delta_bar, self_pooling
    )
    if out_dir is not None:
        out = Path(out_dir)
        out.mkdir(parents=True, exist_ok=True)
        table.dump_csv(out / "pairwise.csv")
        dump_assignment_csv(out / "assignment.csv", requests, state, table)
        _dump_flows_csv(out / "flows.csv", g, solution)
        write_rows_csv([row], out / "summary.csv", include_timings=True)
    return CellReport(row=row, solution=solution, baseline=baseline, requests=requests)


def _dump_flows_csv(path, g: RoadGraph, sol: FlowSolution) -> None:
    lines = ["arc,tail,head,travel_time,active_flow,rebalancing_flow"]
    active = sol.active_flows.sum(axis=1)
    for p, (tail, head, t) in enumerate(g.arcs):
        lines.append(
            f"{p},{tail},{head},{_fmt(t)},{_fmt(active[p])},{_fmt(sol.rebalancing_flow[p])}"
        )
    Path(path).write_text("\n".join(lines) + "\n")


def _fmt(value) -> str:
    if isinstance(value, float):
        if value != value:  # nan -> blank cell
            return ""
        return f"{value:.9g}"
    return str(value)


def write_rows_csv(rows: list[SweepRow], path: str | Path,
                   include_timings: bool = False) -> None:
    """Write sweep rows with the fixed column schema.

    Timings are excluded by default so that identical specs produce
    byte-identical files.
    """
    fields = CSV_FIELDS + (("wall_time_ms",) if include_timings else ())
    lines = [",".join(fields)]
    for row in rows:
        if row.error:
            values = [_fmt(row.demand_total), _fmt(row.t_bar), _fmt(row.delta_bar)]
            values += [""] * (len(fields) - 3)
        else:
            values = [_fmt(getattr(row, name)) for name in fields]
        lines.append(",".join(values))
    Path(path).write_text("\n".join(lines) + "\n")


def has_errors(rows: list[SweepRow]) -> bool:
    return any(row.error for row in rows)
