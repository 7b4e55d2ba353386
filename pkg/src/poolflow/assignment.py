"""Greedy ride-pooling assignment and the pooled demand matrix.

The greedy walks request pairs in order of decreasing cost saving and
bets each stream's remaining rate on its best partner; the expected
pooled share of that bet is kept, the rest returns to the pool. Because
pair savings never change once computed (a selected pair is simply
retired), the selection sequence equals a single descending sort, which
is how it is implemented.

Self-pooling (one stream paired with itself) is supported but off by
default: its savings always rank at the full direct travel time, so
with it enabled nearly all overlap is absorbed stream-internally before
any cross-pairing is considered, which is rarely the comparison of
interest. When enabled, residual accounting deducts both riders of a
self-pooled pair (2 * gamma) so that user rate stays conserved; the
`literal_self_deduction` switch restores the single-gamma deduction for
comparison runs.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass

import numpy as np

from .flow import DemandMatrix, FlowSolution, RequestSet, demand_from_requests, solve_flow
from .graph import RoadGraph, TravelTimeTable
from .spatial import PairwiseTable, build_pairwise_table
from .temporal import WaitWindow, pair_probability

logger = logging.getLogger(__name__)

_RATE_EPS = 1e-12


@dataclass(frozen=True)
class AssignmentState:
    """Result of the greedy assignment.

    beta[m, n] is the rate of stream m bet on partner n; gamma is the
    symmetric expected pooled rate; alpha_residual the unpooled rate per
    stream; delta_live the per-pair savings still open at termination
    (selected pairs are zeroed).
    """

    beta: np.ndarray
    gamma: np.ndarray
    alpha_residual: np.ndarray
    delta_live: np.ndarray
    selections: tuple[tuple[int, int], ...]
    self_pooling: bool
    literal_self_deduction: bool

    @property
    def iterations(self) -> int:
        return len(self.selections)


@dataclass(frozen=True)
class PooledDemandResult:
    """Equivalent demand matrix after pooling, with bookkeeping."""

    d_rp: DemandMatrix
    pooled_fraction: float
    iterations: int


def greedy_assign(
    rs: RequestSet,
    table: PairwiseTable,
    w: WaitWindow,
    self_pooling: bool = False,
    literal_self_deduction: bool = False,
) -> AssignmentState:
    """Compute the pooling assignment (beta, gamma) for all requests.

    Pairs with positive saving are processed in descending saving order
    (ties: lexicographically smallest index pair). A selected cross pair
    (m, n) bets both full residuals; the expected pooled rate
    min(beta_mn, beta_nm) * P(beta_mn, beta_nm) is deducted from both
    streams. Each pair is selected at most once.
    """
    count = len(rs)
    alpha = np.array([r.rate for r in rs])
    beta = np.zeros((count, count))
    gamma = np.zeros((count, count))
    residual = alpha.copy()
    delta_live = table.delta.copy()
    if not self_pooling and count:
        np.fill_diagonal(delta_live, 0.0)

    order = [
        (m, n)
        for m in range(count)
        for n in range(m, count)
        if delta_live[m, n] > 0
    ]
    order.sort(key=lambda mn: (-delta_live[mn[0], mn[1]], mn[0], mn[1]))

    selections: list[tuple[int, int]] = []
    for m, n in order:
        selections.append((m, n))
        if m == n:
            beta[m, m] = residual[m]
            g = beta[m, m] * pair_probability(beta[m, m], beta[m, m], w) / 2.0
            gamma[m, m] = g
            residual[m] -= g if literal_self_deduction else 2.0 * g
        else:
            beta[m, n] = residual[m]
            beta[n, m] = residual[n]
            g = min(beta[m, n], beta[n, m]) * pair_probability(beta[m, n], beta[n, m], w)
            gamma[m, n] = gamma[n, m] = g
            residual[m] -= g
            residual[n] -= g
        delta_live[m, n] = delta_live[n, m] = 0.0
    residual[np.abs(residual) <= _RATE_EPS * max(1.0, alpha.max(initial=1.0))] = 0.0
    if (residual < 0).any():
        raise AssertionError("negative residual rate after assignment")
    return AssignmentState(
        beta=beta,
        gamma=gamma,
        alpha_residual=residual,
        delta_live=delta_live,
        selections=tuple(selections),
        self_pooling=self_pooling,
        literal_self_deduction=literal_self_deduction,
    )


def build_pooled_demand(
    rs: RequestSet, state: AssignmentState, table: PairwiseTable, n: int
) -> PooledDemandResult:
    """Assemble the equivalent demand matrix: residual solo demand plus
    one vehicle-rate per pooled pair along its best configuration legs.

    Verifies user-rate conservation explicitly: total request rate must
    equal solo rate plus both riders of every pooled pair.
    """
    count = len(rs)
    alpha = np.array([r.rate for r in rs])
    entries = np.zeros((n, n))
    for idx, r in enumerate(rs):
        if state.alpha_residual[idx] > 0:
            entries[r.destination - 1, r.origin - 1] += state.alpha_residual[idx]

    pooled_users = 0.0
    for m in range(count):
        for nn in range(m, count):
            g = state.gamma[m, nn]
            if g <= 0:
                continue
            for a, b, _occ in table.best_legs(m, nn):
                entries[b - 1, a - 1] += g
            if m == nn:
                pooled_users += g if state.literal_self_deduction else 2.0 * g
            else:
                pooled_users += 2.0 * g

    total = float(alpha.sum())
    served = float(state.alpha_residual.sum()) + pooled_users
    if abs(served - total) > 1e-9 * max(1.0, total):
        raise ValueError(
            f"user-rate conservation violated: {served:.12g} served vs {total:.12g} requested"
        )
    entries[np.diag_indices(n)] = 0.0
    entries[np.diag_indices(n)] = -entries.sum(axis=0)
    d_rp = DemandMatrix(entries=entries)
    pooled_fraction = (total - float(state.alpha_residual.sum())) / total if total > 0 else 0.0
    return PooledDemandResult(
        d_rp=d_rp,
        pooled_fraction=pooled_fraction,
        iterations=state.iterations,
    )


def solve_ridepooling(
    g: RoadGraph,
    tbl: TravelTimeTable,
    rs: RequestSet,
    delay_cap: float,
    w: WaitWindow,
    self_pooling: bool = False,
    literal_self_deduction: bool = False,
) -> tuple[FlowSolution, PooledDemandResult, AssignmentState]:
    """End-to-end pipeline: pair table -> greedy assignment -> pooled
    demand -> network-flow solve."""
    table = build_pairwise_table(tbl, rs, delay_cap)
    state = greedy_assign(rs, table, w, self_pooling, literal_self_deduction)
    pooled = build_pooled_demand(rs, state, table, g.vertex_count)
    solution = solve_flow(g, tbl, pooled.d_rp)
    logger.debug(
        "ride-pooling solve: J=%.6g Jt=%.6g pooled=%.1f%% over %d selections",
        solution.objective_J,
        solution.objective_J_tilde,
        100 * pooled.pooled_fraction,
        state.iterations,
    )
    return solution, pooled, state


def no_pooling_solution(g: RoadGraph, tbl: TravelTimeTable, rs: RequestSet) -> FlowSolution:
    """Baseline solve with every request served solo."""
    return solve_flow(g, tbl, demand_from_requests(rs, g.vertex_count))


def dump_assignment_csv(path, rs: RequestSet, state: AssignmentState, table: PairwiseTable) -> None:
    """Audit dump: one row per selected pair."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["m", "n", "beta_mn", "beta_nm", "gamma_mn", "config_id"])
        for m, n in state.selections:
            writer.writerow([
                m, n,
                f"{state.beta[m, n]:.9g}", f"{state.beta[n, m]:.9g}",
                f"{state.gamma[m, n]:.9g}", int(table.best_config[m, n]),
            ])
