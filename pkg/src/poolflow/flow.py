"""Network-flow solve: route active demand, rebalance empty vehicles,
evaluate objectives.

Sign conventions, reconciled in this one place
----------------------------------------------
The demand matrix is stored in destination-row / origin-column layout:
``entries[d-1, o-1] = rate`` for a request o -> d, with each diagonal
entry the negated column sum. The incidence matrix B uses +1 where an
arc leaves a vertex and -1 where it enters. Vehicles physically travel
origin -> destination, so the active flow column for origin o has
divergence +rate at o and -rate at each destination, which means
``B @ X == -entries`` (note the minus). All conservation checks in this
module and its tests use that divergence form.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass

import numpy as np

from .graph import RoadGraph, TravelTimeTable, shortest_path_arcs

# below this rate a vertex imbalance is float dust, not demand
_IMBALANCE_EPS = 1e-12


@dataclass(frozen=True)
class Request:
    """One travel demand stream: `rate` users per hour from origin to
    destination."""

    origin: int
    destination: int
    rate: float

    def __post_init__(self):
        if self.origin == self.destination:
            raise ValueError(f"request origin equals destination ({self.origin})")
        if not self.rate > 0:
            raise ValueError(f"request rate must be positive, got {self.rate}")


@dataclass(frozen=True)
class RequestSet:
    """Ordered collection of requests with pairwise-distinct OD pairs."""

    requests: tuple[Request, ...]

    def __post_init__(self):
        seen: set[tuple[int, int]] = set()
        for r in self.requests:
            od = (r.origin, r.destination)
            if od in seen:
                raise ValueError(f"duplicate origin-destination pair {od}")
            seen.add(od)

    def __len__(self) -> int:
        return len(self.requests)

    def __iter__(self):
        return iter(self.requests)

    def total_rate(self) -> float:
        return float(sum(r.rate for r in self.requests))


@dataclass(frozen=True)
class DemandMatrix:
    """Signed vertex-by-vertex demand: entries[d-1, o-1] >= 0 is the
    request rate o -> d; every column sums to zero via the diagonal."""

    entries: np.ndarray

    def __post_init__(self):
        e = self.entries
        if e.ndim != 2 or e.shape[0] != e.shape[1]:
            raise ValueError(f"demand matrix must be square, got shape {e.shape}")
        off = e.copy()
        np.fill_diagonal(off, 0.0)
        if (off < 0).any():
            raise ValueError("off-diagonal demand entries must be nonnegative")
        col = e.sum(axis=0)
        scale = max(1.0, float(np.abs(off).sum()))
        if np.abs(col).max(initial=0.0) > 1e-9 * scale:
            raise ValueError("demand matrix columns must sum to zero")

    @property
    def vertex_count(self) -> int:
        return self.entries.shape[0]

    def off_diagonal(self) -> np.ndarray:
        out = self.entries.copy()
        np.fill_diagonal(out, 0.0)
        return out


def demand_from_requests(rs: RequestSet, n: int) -> DemandMatrix:
    """Assemble the signed demand matrix for a request set on n vertices."""
    entries = np.zeros((n, n))
    for r in rs:
        if not (1 <= r.origin <= n) or not (1 <= r.destination <= n):
            raise ValueError(
                f"request ({r.origin} -> {r.destination}) outside vertex range 1..{n}"
            )
        entries[r.destination - 1, r.origin - 1] += r.rate
    entries[np.diag_indices(n)] = -entries.sum(axis=0)
    return DemandMatrix(entries=entries)


@dataclass(frozen=True)
class FlowSolution:
    """Arc flows and objective values of one solve.

    `active_flows[:, i]` is the flow column serving requests that share
    origin i+1; `rebalancing_flow` is the empty-vehicle flow. Objectives
    are vehicle-minutes per hour of demand.
    """

    active_flows: np.ndarray
    rebalancing_flow: np.ndarray
    objective_J: float
    objective_J_tilde: float
    rebalancing_share: float


def solve_flow(g: RoadGraph, tbl: TravelTimeTable, d: DemandMatrix) -> FlowSolution:
    """Route every demand entry along its shortest path, then restore
    vehicle balance with a minimum-cost rebalancing flow.

    The two stages are exact: shortest-path routing is optimal for the
    active stage because arcs are uncapacitated with nonnegative costs,
    and the rebalancing stage solves the induced transportation problem
    with successive shortest paths.
    """
    n = g.vertex_count
    if d.vertex_count != n:
        raise ValueError(f"demand is {d.vertex_count}x{d.vertex_count}, graph has {n} vertices")
    t = g.travel_times()

    x = np.zeros((g.arc_count, n))
    dests, origins = np.nonzero(d.off_diagonal())
    for di, oi in zip(dests, origins):
        o, dest = oi + 1, di + 1
        rate = d.entries[di, oi]
        if not tbl.is_reachable(o, dest):
            raise ValueError(f"demanded pair {o} -> {dest} is unreachable")
        for p in shortest_path_arcs(g, tbl, o, dest):
            x[p, oi] += rate

    total_flow = x.sum(axis=1)
    divergence = _divergence(g, total_flow)
    x_r = _rebalance(g, tbl, divergence)

    j_tilde = float(t @ total_flow)
    reb_cost = float(t @ x_r)
    j = j_tilde + reb_cost
    share = reb_cost / j if j > 0 else 0.0
    return FlowSolution(
        active_flows=x,
        rebalancing_flow=x_r,
        objective_J=j,
        objective_J_tilde=j_tilde,
        rebalancing_share=share,
    )


def evaluate_objective(g: RoadGraph, sol: FlowSolution) -> tuple[float, float, float]:
    """Recompute (J, J_tilde, rebalancing_share) from the raw flows."""
    t = g.travel_times()
    j_tilde = float(t @ sol.active_flows.sum(axis=1))
    j = j_tilde + float(t @ sol.rebalancing_flow)
    share = (j - j_tilde) / j if j > 0 else 0.0
    return j, j_tilde, share


def _divergence(g: RoadGraph, arc_flow: np.ndarray) -> np.ndarray:
    """Per-vertex net outflow (B @ arc_flow) without materializing B."""
    div = np.zeros(g.vertex_count)
    for p, (tail, head, _) in enumerate(g.arcs):
        f = arc_flow[p]
        div[tail - 1] += f
        div[head - 1] -= f
    return div


def _rebalance(g: RoadGraph, tbl: TravelTimeTable, divergence: np.ndarray) -> np.ndarray:
    """Minimum-cost empty-vehicle flow canceling the active divergence.

    Vertices where vehicles pile up (negative divergence: request
    destinations) supply the transportation problem; vertices that shed
    vehicles (positive divergence: request origins) demand them. Costs
    are shortest-path travel times, so the bipartite optimum maps back
    onto arcs along shortest paths.
    """
    x_r = np.zeros(g.arc_count)
    scale = max(1.0, float(np.abs(divergence).sum()))
    eps = _IMBALANCE_EPS * scale
    sources = [v + 1 for v in range(len(divergence)) if divergence[v] < -eps]
    sinks = [v + 1 for v in range(len(divergence)) if divergence[v] > eps]
    if not sources and not sinks:
        return x_r
    supply = {v: -divergence[v - 1] for v in sources}
    demand = {v: divergence[v - 1] for v in sinks}

    plan = _transportation_ssp(tbl, sources, sinks, supply, demand, eps)
    for (s, k), amount in sorted(plan.items()):
        for p in shortest_path_arcs(g, tbl, s, k):
            x_r[p] += amount
    return x_r


def _transportation_ssp(
    tbl: TravelTimeTable,
    sources: list[int],
    sinks: list[int],
    supply: dict[int, float],
    demand: dict[int, float],
    eps: float,
) -> dict[tuple[int, int], float]:
    """Successive-shortest-path solve of the uncapacitated transportation
    problem on shortest-path costs. Returns shipped amounts per
    (source, sink) pair.

    Sources are drained one at a time in vertex order; each Dijkstra runs
    over reduced costs so every augmenting path is cost-minimal, which
    certifies optimality of the final plan (no residual arc ever carries
    negative reduced cost).
    """
    ns, nk = len(sources), len(sinks)
    cost = np.array([[tbl.time(s, k) for k in sinks] for s in sources])
    rem_supply = np.array([supply[s] for s in sources])
    rem_demand = np.array([demand[k] for k in sinks])
    if abs(rem_supply.sum() - rem_demand.sum()) > max(1e-9, eps * 16):
        raise ValueError(
            "rebalancing imbalance: total surplus "
            f"{rem_supply.sum():.6g} != total deficit {rem_demand.sum():.6g}"
        )
    flow = np.zeros((ns, nk))
    pi_s = np.zeros(ns)
    pi_k = np.zeros(nk)

    # each augmentation saturates a source, a sink, or zeroes a shipped
    # pair; the cap is a loud canary, never a silent exit
    max_rounds = 8 * (ns + nk + ns * nk) + 64
    rounds = 0
    for src in range(ns):
        while rem_supply[src] > eps:
            rounds += 1
            if rounds > max_rounds:
                raise RuntimeError("rebalancing did not converge within the augmentation cap")
            dist_s = np.full(ns, np.inf)
            dist_k = np.full(nk, np.inf)
            parent_k = np.full(nk, -1, dtype=int)  # source feeding this sink
            parent_s = np.full(ns, -1, dtype=int)  # sink refunding this source
            dist_s[src] = 0.0
            heap: list[tuple[float, int, int]] = [(0.0, 0, src)]
            target = -1
            done_s = [False] * ns
            done_k = [False] * nk
            while heap:
                dv, kind, idx = heapq.heappop(heap)
                if kind == 0:
                    if done_s[idx]:
                        continue
                    done_s[idx] = True
                    for j in range(nk):
                        c = cost[idx, j]
                        if not np.isfinite(c):
                            continue
                        nd = dv + max(c + pi_s[idx] - pi_k[j], 0.0)
                        if nd < dist_k[j]:
                            dist_k[j] = nd
                            parent_k[j] = idx
                            heapq.heappush(heap, (nd, 1, j))
                else:
                    if done_k[idx]:
                        continue
                    done_k[idx] = True
                    if rem_demand[idx] > eps:
                        target = idx
                        break
                    for i in range(ns):
                        if flow[i, idx] > eps:
                            nd = dv + max(-cost[i, idx] + pi_k[idx] - pi_s[i], 0.0)
                            if nd < dist_s[i]:
                                dist_s[i] = nd
                                parent_s[i] = idx
                                heapq.heappush(heap, (nd, 0, i))
            if target < 0:
                raise ValueError(
                    "rebalancing infeasible: surplus at vertex "
                    f"{sources[src]} cannot reach any remaining deficit vertex"
                )
            d_star = dist_k[target]
            pi_s += np.minimum(dist_s, d_star)
            pi_k += np.minimum(dist_k, d_star)

            # backtrack the alternating path: src ->f j1 ->b i1 ->f ... ->f target
            forward: list[tuple[int, int]] = []
            backward: list[tuple[int, int]] = []
            j = target
            while True:
                i = parent_k[j]
                forward.append((i, j))
                jb = parent_s[i]
                if jb < 0:
                    break
                backward.append((i, jb))
                j = jb
            delta = min(rem_supply[src], rem_demand[target])
            for i, jb in backward:
                delta = min(delta, flow[i, jb])
            if delta <= 0:
                raise RuntimeError("rebalancing augmentation stalled (zero step)")
            for i, j in forward:
                flow[i, j] += delta
            for i, jb in backward:
                flow[i, jb] -= delta
            rem_supply[src] -= delta
            rem_demand[target] -= delta
    if rem_demand.max(initial=0.0) > max(1e-9, eps * 16):
        raise ValueError("rebalancing infeasible: unmet deficit remains after all surplus shipped")
    return {
        (sources[i], sinks[j]): float(flow[i, j])
        for i in range(ns)
        for j in range(nk)
        if flow[i, j] > eps
    }
