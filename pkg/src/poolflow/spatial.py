"""Serving configurations for a request pair and their detour delays.

Two requests can share one vehicle in four orders (both riders aboard on
the middle segment), or travel separately. Legs are evaluated with
shortest-path travel times; a configuration is feasible when neither
rider's detour delay exceeds the cap. Delays measure in-vehicle detour
only, from the rider's own pickup; waiting before pickup is the temporal
module's concern.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .flow import Request, RequestSet
from .graph import TravelTimeTable

# delays within this band of zero are float dust from fractional arc
# times; clamping keeps feasibility decisions deterministic at the cap
_DELAY_EPS = 1e-9

# visit orders of the four shared configurations, as (role, endpoint)
# tags: m's origin/destination are ('m', 0)/('m', 1), likewise for n
_SHARED_ORDERS = (
    (("m", 0), ("n", 0), ("n", 1), ("m", 1)),
    (("m", 0), ("n", 0), ("m", 1), ("n", 1)),
    (("n", 0), ("m", 0), ("m", 1), ("n", 1)),
    (("n", 0), ("m", 0), ("n", 1), ("m", 1)),
)


@dataclass(frozen=True)
class PoolingConfig:
    """One way of serving a request pair.

    config_id 0 is no pooling: two independent single-occupancy legs.
    Ids 1..4 are the shared orders; legs whose endpoints coincide are
    collapsed, so a shared configuration has two or three legs.
    """

    config_id: int
    visit_order: tuple[int, ...]
    legs: tuple[tuple[int, int, int], ...]  # (from, to, occupancy)


@dataclass(frozen=True)
class ConfigEvaluation:
    """Cost and per-rider delays of one configuration of a pair."""

    config: PoolingConfig
    delay_m: float
    delay_n: float
    cost: float
    feasible: bool


def enumerate_configs(m: Request, n: Request) -> list[PoolingConfig]:
    """The five serving configurations for requests m and n.

    m == n is allowed and models one stream pooled with itself: the
    shared orders then collapse to a single double-occupancy leg.
    """
    ends = {("m", 0): m.origin, ("m", 1): m.destination,
            ("n", 0): n.origin, ("n", 1): n.destination}
    configs = [
        PoolingConfig(
            config_id=0,
            visit_order=(m.origin, m.destination, n.origin, n.destination),
            legs=((m.origin, m.destination, 1), (n.origin, n.destination, 1)),
        )
    ]
    for cid, order in enumerate(_SHARED_ORDERS, start=1):
        vertices = tuple(ends[tag] for tag in order)
        legs = []
        for i, occupancy in enumerate((1, 2, 1)):
            a, b = vertices[i], vertices[i + 1]
            if a != b:
                legs.append((a, b, occupancy))
        configs.append(PoolingConfig(config_id=cid, visit_order=vertices, legs=tuple(legs)))
    return configs


def evaluate_pair(
    tbl: TravelTimeTable, m: Request, n: Request, delay_cap: float
) -> tuple[ConfigEvaluation, float]:
    """Best feasible configuration for (m, n) and its cost saving.

    Returns the minimum-cost feasible configuration (no-pooling always
    qualifies; ties go to the smallest config_id) and
    delta = cost(no pooling) - cost(best) >= 0.
    """
    evaluations = [
        _evaluate_config(tbl, m, n, cfg, delay_cap) for cfg in enumerate_configs(m, n)
    ]
    best = min(
        (e for e in evaluations if e.feasible),
        key=lambda e: (e.cost, e.config.config_id),
    )
    delta = evaluations[0].cost - best.cost
    return best, max(delta, 0.0)


def _evaluate_config(
    tbl: TravelTimeTable, m: Request, n: Request, cfg: PoolingConfig, delay_cap: float
) -> ConfigEvaluation:
    for r in (m, n):
        if not tbl.is_reachable(r.origin, r.destination):
            raise ValueError(f"request endpoints {r.origin} -> {r.destination} unreachable")
    if cfg.config_id == 0:
        cost = tbl.time(m.origin, m.destination) + tbl.time(n.origin, n.destination)
        return ConfigEvaluation(config=cfg, delay_m=0.0, delay_n=0.0, cost=cost, feasible=True)
    order = cfg.visit_order
    hop = [tbl.time(order[i], order[i + 1]) for i in range(3)]
    if not all(np.isfinite(hop)):
        raise ValueError(f"configuration {cfg.config_id} visits an unreachable hop: {order}")
    cost = sum(hop)
    delay_m = _ride_delay(order, hop, m.origin, m.destination, tbl)
    # m == n: both riders trace the same endpoints, same zero detour
    delay_n = delay_m if m == n else _ride_delay(order, hop, n.origin, n.destination, tbl)
    feasible = delay_m <= delay_cap and delay_n <= delay_cap
    return ConfigEvaluation(config=cfg, delay_m=delay_m, delay_n=delay_n, cost=cost, feasible=feasible)


def _ride_delay(
    order: tuple[int, ...], hop: list[float], origin: int, dest: int, tbl: TravelTimeTable
) -> float:
    """Extra in-vehicle time versus the direct trip, riding `order` from
    the rider's pickup to their dropoff."""
    first = order.index(origin)
    last = 3 - tuple(reversed(order)).index(dest)  # last position of dest
    ride = sum(hop[first:last])
    delay = ride - tbl.time(origin, dest)
    if delay < -_DELAY_EPS:
        raise AssertionError(f"negative detour delay {delay} on order {order}")
    return 0.0 if abs(delay) <= _DELAY_EPS else delay


class PairwiseTable:
    """Best configuration and cost saving for every request pair.

    Backed by dense arrays over ordered index pairs; entry (m, n) mirrors
    (n, m) with rider roles swapped. Self pairs (m, m) are included so a
    stream can be considered for pooling with itself.
    """

    def __init__(
        self,
        rs: RequestSet,
        delay_cap: float,
        best_config: np.ndarray,
        cost: np.ndarray,
        delay_m: np.ndarray,
        delay_n: np.ndarray,
        delta: np.ndarray,
    ):
        self.requests = rs
        self.delay_cap = delay_cap
        self.best_config = best_config
        self.cost = cost
        self.delay_m = delay_m
        self.delay_n = delay_n
        self.delta = delta

    def __len__(self) -> int:
        return len(self.requests)

    def entry(self, m: int, n: int) -> tuple[ConfigEvaluation, float]:
        """Materialize the (m, n) entry (0-based request indices)."""
        rm, rn = self.requests.requests[m], self.requests.requests[n]
        cfg = enumerate_configs(rm, rn)[int(self.best_config[m, n])]
        ev = ConfigEvaluation(
            config=cfg,
            delay_m=float(self.delay_m[m, n]),
            delay_n=float(self.delay_n[m, n]),
            cost=float(self.cost[m, n]),
            feasible=True,
        )
        return ev, float(self.delta[m, n])

    def best_legs(self, m: int, n: int) -> tuple[tuple[int, int, int], ...]:
        rm, rn = self.requests.requests[m], self.requests.requests[n]
        return enumerate_configs(rm, rn)[int(self.best_config[m, n])].legs

    def dump_csv(self, path) -> None:
        """Debug dump over unordered pairs, one row per m <= n."""
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["m", "n", "best_config_id", "delay_m", "delay_n", "cost", "delta_J_tilde"])
            count = len(self)
            for m in range(count):
                for n in range(m, count):
                    writer.writerow([
                        m, n, int(self.best_config[m, n]),
                        f"{self.delay_m[m, n]:.9g}", f"{self.delay_n[m, n]:.9g}",
                        f"{self.cost[m, n]:.9g}", f"{self.delta[m, n]:.9g}",
                    ])


def build_pairwise_table(
    tbl: TravelTimeTable, rs: RequestSet, delay_cap: float
) -> PairwiseTable:
    """Evaluate every pair (including self pairs) against the delay cap.

    Vectorized over all ordered pairs: costs and delays of the four
    shared orders come from fancy-indexed slices of the travel-time
    matrix, then infeasible configurations are masked out and the
    cheapest remaining one wins (smallest config_id on ties).
    """
    count = len(rs)
    if count == 0:
        empty = np.zeros((0, 0))
        return PairwiseTable(rs, delay_cap, empty.astype(np.int8), empty, empty, empty, empty)

    o = np.array([r.origin - 1 for r in rs])
    d = np.array([r.destination - 1 for r in rs])
    t = tbl.times
    direct = t[o, d]  # per-request direct times
    if not np.all(np.isfinite(direct)):
        bad = int(np.argmax(~np.isfinite(direct)))
        r = rs.requests[bad]
        raise ValueError(f"request endpoints {r.origin} -> {r.destination} unreachable")
    oo = t[np.ix_(o, o)]
    od = t[np.ix_(o, d)]
    dd = t[np.ix_(d, d)]
    if not (np.all(np.isfinite(oo)) and np.all(np.isfinite(od)) and np.all(np.isfinite(dd))):
        raise ValueError("some request endpoints are mutually unreachable")

    tm_m = direct[:, None]  # direct time of m, broadcast over n
    tm_n = direct[None, :]

    # visit orders, with [i, j] the (m=i, n=j) entry:
    # 1: om on dn dm   2: om on dm dn   3: on om dm dn   4: on om dn dm
    cost = np.empty((5, count, count))
    delay_m = np.zeros_like(cost)
    delay_n = np.zeros_like(cost)
    cost[0] = tm_m + tm_n

    cost[1] = oo + tm_n + dd.T
    delay_m[1] = cost[1] - tm_m

    cost[2] = oo + od.T + dd
    delay_m[2] = oo + od.T - tm_m
    delay_n[2] = od.T + dd - tm_n

    cost[3] = oo.T + tm_m + dd
    delay_n[3] = cost[3] - tm_n

    cost[4] = oo.T + od + dd.T
    delay_m[4] = od + dd.T - tm_m
    delay_n[4] = oo.T + od - tm_n

    if delay_m.min() < -_DELAY_EPS or delay_n.min() < -_DELAY_EPS:
        raise AssertionError("negative detour delay in pairwise table")
    delay_m[np.abs(delay_m) <= _DELAY_EPS] = 0.0
    delay_n[np.abs(delay_n) <= _DELAY_EPS] = 0.0

    feasible = (delay_m <= delay_cap) & (delay_n <= delay_cap)
    feasible[0] = True
    masked = np.where(feasible, cost, np.inf)
    best = masked.argmin(axis=0)  # first minimum: smallest config_id
    take = np.ogrid[:count, :count]
    best_cost = masked[best, take[0], take[1]]
    delta = np.maximum(cost[0] - best_cost, 0.0)
    return PairwiseTable(
        rs,
        delay_cap,
        best.astype(np.int8),
        best_cost,
        delay_m[best, take[0], take[1]],
        delay_n[best, take[0], take[1]],
        delta,
    )
