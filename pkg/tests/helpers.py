"""Shared generators and independent brute-force oracles for the tests.

The oracles deliberately avoid the library's own algorithms: the
transportation oracle enumerates integer shipping plans, the pooling
oracle enumerates event permutations, and the allocation oracle searches
a discretized grid.
"""

from __future__ import annotations

import itertools

import numpy as np

from poolflow import Request, RequestSet, RoadGraph, build_graph


def random_strong_graph(rng: np.random.Generator, n: int, extra_arcs: int = 4,
                        max_time: int = 9) -> RoadGraph:
    """Random strongly-connected digraph with integer travel times.

    A directed cycle through a random vertex permutation guarantees
    strong connectivity; extra random arcs add shortcuts. Integer times
    keep oracle comparisons exact in floating point.
    """
    perm = list(rng.permutation(n) + 1)
    arcs = {}
    for i in range(n):
        tail, head = perm[i], perm[(i + 1) % n]
        arcs[(tail, head)] = float(rng.integers(1, max_time + 1))
    for _ in range(extra_arcs):
        tail, head = rng.integers(1, n + 1, size=2)
        if tail != head and (tail, head) not in arcs:
            arcs[(int(tail), int(head))] = float(rng.integers(1, max_time + 1))
    return build_graph(n, [(t, h, w) for (t, h), w in sorted(arcs.items())])


def random_requests(rng: np.random.Generator, n: int, count: int,
                    rates=None) -> RequestSet:
    """`count` requests with distinct OD pairs on vertices 1..n."""
    pairs = [(o, d) for o in range(1, n + 1) for d in range(1, n + 1) if o != d]
    chosen = rng.choice(len(pairs), size=min(count, len(pairs)), replace=False)
    requests = []
    for k, idx in enumerate(sorted(chosen)):
        o, d = pairs[idx]
        rate = 1.0 if rates is None else float(rates[k])
        requests.append(Request(o, d, rate))
    return RequestSet(tuple(requests))


def brute_force_transportation(cost: np.ndarray, supply: list[int],
                               demand: list[int]) -> float:
    """Minimum cost over all integer shipping plans with the given row
    and column totals. Exponential search, fine for totals <= ~8."""
    ns, nk = cost.shape
    best = [np.inf]

    def recurse(i: int, remaining_demand: list[int], acc: float):
        if acc >= best[0]:
            return
        if i == ns:
            if all(r == 0 for r in remaining_demand):
                best[0] = acc
            return
        # enumerate all ways to split supply[i] over the sinks
        def split(j: int, left: int, cost_so_far: float):
            if cost_so_far + acc >= best[0]:
                return
            if j == nk - 1:
                if left <= remaining_demand[j]:
                    if left == 0 or np.isfinite(cost[i, j]):
                        remaining_demand[j] -= left
                        recurse(i + 1, remaining_demand,
                                acc + cost_so_far + (left * cost[i, j] if left else 0.0))
                        remaining_demand[j] += left
                return
            top = min(left, remaining_demand[j])
            for amount in range(top + 1):
                if amount and not np.isfinite(cost[i, j]):
                    break
                remaining_demand[j] -= amount
                split(j + 1, left - amount,
                      cost_so_far + (amount * cost[i, j] if amount else 0.0))
                remaining_demand[j] += amount

        split(0, supply[i], 0.0)

    recurse(0, list(demand), 0.0)
    return float(best[0])


def brute_force_pair_cost(times: np.ndarray, m: Request, n: Request,
                          delay_cap: float) -> float:
    """Cheapest feasible way to serve requests m and n, enumerating all
    event orders where each rider boards before alighting and both are
    aboard at some point, plus the two-vehicle option.

    `times` is the 0-based all-pairs matrix.
    """
    def t(a: int, b: int) -> float:
        return float(times[a - 1, b - 1])

    best = t(m.origin, m.destination) + t(n.origin, n.destination)  # two vehicles
    events = [("m", 0), ("m", 1), ("n", 0), ("n", 1)]
    where = {("m", 0): m.origin, ("m", 1): m.destination,
             ("n", 0): n.origin, ("n", 1): n.destination}
    for order in itertools.permutations(events):
        pos = {e: i for i, e in enumerate(order)}
        if pos[("m", 0)] > pos[("m", 1)] or pos[("n", 0)] > pos[("n", 1)]:
            continue
        # both aboard somewhere: the later pickup precedes the earlier dropoff
        if max(pos[("m", 0)], pos[("n", 0)]) > min(pos[("m", 1)], pos[("n", 1)]):
            continue
        stops = [where[e] for e in order]
        cost = sum(t(stops[i], stops[i + 1]) for i in range(3))
        ok = True
        for rider, (o, d) in (("m", (m.origin, m.destination)),
                              ("n", (n.origin, n.destination))):
            ride = sum(t(stops[i], stops[i + 1])
                       for i in range(pos[(rider, 0)], pos[(rider, 1)]))
            if ride - t(o, d) > delay_cap + 1e-9:
                ok = False
                break
        if ok:
            best = min(best, cost)
    return best


def grid_allocation_optimum(deltas: dict[tuple[int, int], float],
                            alpha: np.ndarray, step: float) -> float:
    """Maximum total saving over grid-valued pooled allocations.

    Searches gamma values in multiples of `step` for every pair with
    positive saving, subject to each stream's rate budget (a self pair
    consumes twice its gamma). Branch-and-bound on the remaining upside.
    """
    pairs = sorted((mn for mn, d in deltas.items() if d > 0),
                   key=lambda mn: -deltas[mn])
    if not pairs:
        return 0.0
    values = [deltas[mn] for mn in pairs]
    best = [0.0]

    def upper_bound(idx: int, budget: np.ndarray) -> float:
        bound = 0.0
        for k in range(idx, len(pairs)):
            m, n = pairs[k]
            cap = budget[m] / 2 if m == n else min(budget[m], budget[n])
            bound += values[k] * cap
        return bound

    def recurse(idx: int, budget: np.ndarray, acc: float):
        if acc > best[0]:
            best[0] = acc
        if idx == len(pairs) or acc + upper_bound(idx, budget) <= best[0] + 1e-12:
            return
        m, n = pairs[idx]
        cap = budget[m] / 2 if m == n else min(budget[m], budget[n])
        steps = int(np.floor(cap / step + 1e-9))
        for k in range(steps, -1, -1):
            g = k * step
            budget2 = budget.copy()
            if m == n:
                budget2[m] -= 2 * g
            else:
                budget2[m] -= g
                budget2[n] -= g
            recurse(idx + 1, budget2, acc + g * values[idx])

    recurse(0, alpha.astype(float).copy(), 0.0)
    return float(best[0])
