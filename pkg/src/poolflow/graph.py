"""Directed road network with all-pairs shortest travel times.

Vertices are numbered 1..n. The arc list order is the canonical arc
indexing used everywhere else (columns of the incidence matrix, entries
of flow vectors). Travel times are minutes and may be fractional.
"""

from __future__ import annotations

import heapq
import logging
from dataclasses import dataclass, field

import numpy as np

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RoadGraph:
    """Immutable directed graph with per-arc travel times.

    `arcs[p] = (tail, head, travel_time)`: the arc indexed p leaves `tail`
    and enters `head`. Vertex ids run 1..vertex_count.
    """

    vertex_count: int
    arcs: tuple[tuple[int, int, float], ...]
    _arc_index: dict[tuple[int, int], int] = field(repr=False, compare=False, default_factory=dict)
    _out: dict[int, list[tuple[int, float]]] = field(repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        index: dict[tuple[int, int], int] = {}
        out: dict[int, list[tuple[int, float]]] = {v: [] for v in range(1, self.vertex_count + 1)}
        for p, (tail, head, time) in enumerate(self.arcs):
            index[(tail, head)] = p
            out[tail].append((head, time))
        for v in out:
            out[v].sort()
        object.__setattr__(self, "_arc_index", index)
        object.__setattr__(self, "_out", out)

    @property
    def arc_count(self) -> int:
        return len(self.arcs)

    def arc_index(self, tail: int, head: int) -> int:
        return self._arc_index[(tail, head)]

    def out_arcs(self, vertex: int) -> list[tuple[int, float]]:
        """Arcs leaving `vertex` as (head, travel_time), sorted by head id."""
        return self._out[vertex]

    def travel_times(self) -> np.ndarray:
        """Arc travel times in arc-index order."""
        return np.array([a[2] for a in self.arcs], dtype=float)

    def incidence_matrix(self) -> np.ndarray:
        """|V| x |A| incidence matrix: +1 where the arc leaves the vertex,
        -1 where it enters (row i is vertex i+1)."""
        b = np.zeros((self.vertex_count, len(self.arcs)), dtype=np.int8)
        for p, (tail, head, _) in enumerate(self.arcs):
            b[tail - 1, p] = 1
            b[head - 1, p] = -1
        return b


def build_graph(vertex_count: int, arcs: list[tuple[int, int, float]]) -> RoadGraph:
    """Validate and build a RoadGraph.

    Rejects self-loops, duplicate (tail, head) pairs, out-of-range vertex
    ids and negative or non-finite travel times.
    """
    if vertex_count < 1:
        raise ValueError(f"vertex_count must be positive, got {vertex_count}")
    seen: set[tuple[int, int]] = set()
    cleaned: list[tuple[int, int, float]] = []
    for tail, head, time in arcs:
        if not (1 <= tail <= vertex_count) or not (1 <= head <= vertex_count):
            raise ValueError(
                f"arc ({tail}, {head}) has a vertex id outside 1..{vertex_count}"
            )
        if tail == head:
            raise ValueError(f"self-loop arc ({tail}, {head}) is not allowed")
        if (tail, head) in seen:
            raise ValueError(f"duplicate arc ({tail}, {head})")
        time = float(time)
        if not np.isfinite(time) or time < 0:
            raise ValueError(f"arc ({tail}, {head}) has invalid travel time {time}")
        seen.add((tail, head))
        cleaned.append((tail, head, time))
    return RoadGraph(vertex_count=vertex_count, arcs=tuple(cleaned))


@dataclass(frozen=True)
class TravelTimeTable:
    """All-pairs shortest travel times plus next-hop routing table.

    `times[i-1, j-1]` is the minimal travel time from vertex i to j
    (np.inf when unreachable). `next_hop[i-1, j-1]` is the first vertex
    after i on the chosen shortest path to j (0 when unreachable, j on
    the diagonal). Between equal-cost paths the one whose next hop has
    the smallest vertex id wins, applied recursively.
    """

    times: np.ndarray
    next_hop: np.ndarray

    def time(self, origin: int, dest: int) -> float:
        return float(self.times[origin - 1, dest - 1])

    def is_reachable(self, origin: int, dest: int) -> bool:
        return np.isfinite(self.times[origin - 1, dest - 1])


def all_pairs_shortest_times(g: RoadGraph) -> TravelTimeTable:
    """Compute shortest travel times and next hops for every vertex pair.

    Runs one reverse Dijkstra per destination. Unreachable pairs are
    marked infinite, not treated as errors; a warning reports how many.
    """
    n = g.vertex_count
    times = np.full((n, n), np.inf)
    next_hop = np.zeros((n, n), dtype=np.int32)
    np.fill_diagonal(times, 0.0)

    # reverse adjacency: in_arcs[v] = arcs entering v as (tail, time)
    in_arcs: dict[int, list[tuple[int, float]]] = {v: [] for v in range(1, n + 1)}
    for tail, head, time in g.arcs:
        in_arcs[head].append((tail, time))

    for dest in range(1, n + 1):
        dist = _reverse_dijkstra(n, in_arcs, dest)
        times[:, dest - 1] = dist
        next_hop[dest - 1, dest - 1] = dest
        for v in range(1, n + 1):
            if v == dest or not np.isfinite(dist[v - 1]):
                continue
            # smallest head achieving the exact optimum; at least one head
            # matches exactly because dist[v] was set from these same terms
            for head, time in g.out_arcs(v):
                if time + dist[head - 1] == dist[v - 1]:
                    next_hop[v - 1, dest - 1] = head
                    break

    unreachable = int(np.isinf(times).sum())
    if unreachable:
        logger.warning("travel time table has %d unreachable vertex pairs", unreachable)
    return TravelTimeTable(times=times, next_hop=next_hop)


def _reverse_dijkstra(n: int, in_arcs: dict[int, list[tuple[int, float]]], dest: int) -> np.ndarray:
    """Distances from every vertex TO `dest`, following arcs forward."""
    dist = np.full(n, np.inf)
    dist[dest - 1] = 0.0
    done = [False] * (n + 1)
    heap: list[tuple[float, int]] = [(0.0, dest)]
    while heap:
        d, v = heapq.heappop(heap)
        if done[v]:
            continue
        done[v] = True
        for tail, time in in_arcs[v]:
            nd = time + d
            if nd < dist[tail - 1]:
                dist[tail - 1] = nd
                heapq.heappush(heap, (nd, tail))
    return dist


class NoPathError(ValueError):
    """Raised when a path is requested between unreachable vertices."""


def shortest_path_arcs(
    g: RoadGraph, tbl: TravelTimeTable, origin: int, dest: int
) -> list[int]:
    """Arc indices of the deterministic shortest path origin -> dest.

    Empty list when origin == dest. Raises NoPathError for unreachable
    pairs.
    """
    if origin == dest:
        return []
    if not tbl.is_reachable(origin, dest):
        raise NoPathError(f"no path from {origin} to {dest}")
    path: list[int] = []
    visited = {origin}
    v = origin
    while v != dest:
        nxt = int(tbl.next_hop[v - 1, dest - 1])
        if nxt in visited:
            # zero-cost cycle in the tie-break chain: fall back to the
            # smallest unvisited hop that still lies on a shortest path
            nxt = 0
            for head, time in g.out_arcs(v):
                if head not in visited and time + tbl.times[head - 1, dest - 1] == tbl.times[v - 1, dest - 1]:
                    nxt = head
                    break
            if nxt == 0:
                raise NoPathError(
                    f"no simple shortest path from {origin} to {dest} through {v}"
                )
        path.append(g.arc_index(v, nxt))
        visited.add(nxt)
        v = nxt
    return path
