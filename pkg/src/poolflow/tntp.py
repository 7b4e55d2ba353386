"""Reading and writing Transportation Networks for Research files.

Network files supply arc free-flow times (used as constant travel
times; capacity and BPR columns are ignored). Trip files supply the
demand pattern, which `scale_to_requests` renormalizes to a chosen
total rate.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass

import numpy as np

from .flow import Request, RequestSet
from .graph import RoadGraph, build_graph

logger = logging.getLogger(__name__)


class TntpParseError(ValueError):
    """Malformed TNTP content, with the offending line number."""

    def __init__(self, message: str, line: int, column: int | None = None):
        at = f"line {line}" if column is None else f"line {line}, column {column}"
        super().__init__(f"{message} ({at})")
        self.line = line
        self.column = column


@dataclass(frozen=True)
class TripTable:
    """Trip rates between zones; rows index destinations, columns origins.

    Self trips are dropped during ingestion; `self_trip_count` and
    `self_trip_flow` record how much was discarded.
    """

    demand: np.ndarray
    zone_count: int
    self_trip_count: int = 0
    self_trip_flow: float = 0.0

    def total_flow(self) -> float:
        return float(self.demand.sum())


def _metadata_and_body(lines: list[str]) -> tuple[dict[str, str], int]:
    """Parse `<KEY> value` headers; returns metadata and the index of the
    first body line (after END OF METADATA)."""
    meta: dict[str, str] = {}
    for i, raw in enumerate(lines):
        line = raw.strip()
        if not line or line.startswith("~"):
            continue
        match = re.match(r"<([^>]+)>\s*(.*)", line)
        if match:
            key = match.group(1).strip().upper()
            meta[key] = match.group(2).strip()
            if key == "END OF METADATA":
                return meta, i + 1
        elif meta:
            # body reached without the closing tag
            break
    raise TntpParseError("missing <END OF METADATA> tag", len(lines))


def _require_int(meta: dict[str, str], key: str, total_lines: int) -> int:
    if key not in meta:
        raise TntpParseError(f"missing <{key}> header", total_lines)
    try:
        return int(meta[key])
    except ValueError as exc:
        raise TntpParseError(f"<{key}> is not an integer: {meta[key]!r}", 1) from exc


def parse_tntp_network(text: str) -> RoadGraph:
    """Parse a TNTP network file into a RoadGraph.

    One arc per link record, in file order, with travel time taken from
    the free_flow_time column (minutes).
    """
    lines = text.splitlines()
    meta, body_start = _metadata_and_body(lines)
    n_nodes = _require_int(meta, "NUMBER OF NODES", len(lines))
    n_links = _require_int(meta, "NUMBER OF LINKS", len(lines))

    arcs: list[tuple[int, int, float]] = []
    for lineno in range(body_start, len(lines)):
        line = lines[lineno]
        stripped = line.strip()
        if not stripped or stripped.startswith("~"):
            continue
        tokens = [(m.group(0), m.start()) for m in re.finditer(r"[^\s;]+", line)]
        if not tokens:
            continue
        if len(tokens) < 5:
            raise TntpParseError(
                f"link record has {len(tokens)} fields, expected at least 5", lineno + 1
            )
        values: list[float] = []
        for field_idx in range(5):
            token, col = tokens[field_idx]
            try:
                values.append(float(token))
            except ValueError as exc:
                raise TntpParseError(
                    f"non-numeric field {token!r}", lineno + 1, col + 1
                ) from exc
        init_node, term_node = int(values[0]), int(values[1])
        free_flow_time = values[4]
        arcs.append((init_node, term_node, free_flow_time))

    if len(arcs) != n_links:
        raise ValueError(
            f"<NUMBER OF LINKS> says {n_links} but file has {len(arcs)} link records"
        )
    return build_graph(n_nodes, arcs)


def parse_tntp_trips(text: str) -> TripTable:
    """Parse a TNTP trips file into a TripTable.

    Entries are stored at demand[destination-1, origin-1]. Self trips
    are zeroed, counted, and logged.
    """
    lines = text.splitlines()
    meta, body_start = _metadata_and_body(lines)
    zones = _require_int(meta, "NUMBER OF ZONES", len(lines))
    if "TOTAL OD FLOW" not in meta:
        raise TntpParseError("missing <TOTAL OD FLOW> header", len(lines))

    demand = np.zeros((zones, zones))
    self_trips = 0
    self_flow = 0.0
    origin: int | None = None
    for lineno in range(body_start, len(lines)):
        stripped = lines[lineno].strip()
        if not stripped or stripped.startswith("~"):
            continue
        if stripped.lower().startswith("origin"):
            try:
                origin = int(stripped.split()[1])
            except (IndexError, ValueError) as exc:
                raise TntpParseError(f"malformed origin header {stripped!r}", lineno + 1) from exc
            if not (1 <= origin <= zones):
                raise ValueError(f"origin {origin} exceeds zone count {zones} (line {lineno + 1})")
            continue
        if origin is None:
            raise TntpParseError(f"trip entry before any Origin header: {stripped!r}", lineno + 1)
        for chunk in stripped.split(";"):
            chunk = chunk.strip()
            if not chunk:
                continue
            match = re.fullmatch(r"(\d+)\s*:\s*([0-9.eE+-]+)", chunk)
            if not match:
                raise TntpParseError(f"malformed trip entry {chunk!r}", lineno + 1)
            dest = int(match.group(1))
            try:
                flow = float(match.group(2))
            except ValueError as exc:
                raise TntpParseError(f"malformed trip entry {chunk!r}", lineno + 1) from exc
            if not (1 <= dest <= zones):
                raise ValueError(f"destination {dest} exceeds zone count {zones} (line {lineno + 1})")
            if flow < 0:
                raise ValueError(f"negative trip flow {flow} (line {lineno + 1})")
            if dest == origin:
                self_trips += 1
                self_flow += flow
            else:
                demand[dest - 1, origin - 1] += flow

    if self_trips:
        logger.warning("dropped %d self trips totaling %g flow", self_trips, self_flow)
    table = TripTable(
        demand=demand,
        zone_count=zones,
        self_trip_count=self_trips,
        self_trip_flow=self_flow,
    )
    logger.info("parsed trips: %d zones, retained flow %g", zones, table.total_flow())
    return table


def format_tntp_trips(trips: TripTable) -> str:
    """Serialize a TripTable back to the TNTP trips format."""
    out = [
        f"<NUMBER OF ZONES> {trips.zone_count}",
        f"<TOTAL OD FLOW> {trips.total_flow():.6f}",
        "<END OF METADATA>",
        "",
    ]
    for origin in range(1, trips.zone_count + 1):
        out.append(f"Origin  {origin}")
        row: list[str] = []
        for dest in range(1, trips.zone_count + 1):
            flow = trips.demand[dest - 1, origin - 1]
            if flow > 0:
                row.append(f"    {dest} : {flow:.6f};")
                if len(row) == 5:
                    out.append("".join(row))
                    row = []
        if row:
            out.append("".join(row))
        out.append("")
    return "\n".join(out)


def scale_to_requests(
    trips: TripTable, total_rate: float, rate_floor: float = 0.0
) -> RequestSet:
    """Turn a trip table into requests whose rates sum to `total_rate`.

    Rates are proportional to trip-table entries (one request per
    nonzero OD cell, so OD pairs are distinct by construction). Entries
    whose scaled rate falls below `rate_floor` are dropped and reported;
    dropped mass is not redistributed.
    """
    if not total_rate > 0:
        raise ValueError(f"total_rate must be positive, got {total_rate}")
    if rate_floor < 0:
        raise ValueError(f"rate_floor must be nonnegative, got {rate_floor}")
    total = trips.total_flow()
    if total <= 0:
        raise ValueError("trip table has no positive entries")
    scale = total_rate / total

    requests: list[Request] = []
    dropped = 0
    dropped_rate = 0.0
    for origin in range(1, trips.zone_count + 1):
        for dest in range(1, trips.zone_count + 1):
            flow = trips.demand[dest - 1, origin - 1]
            if flow <= 0:
                continue
            rate = flow * scale
            if rate < rate_floor:
                dropped += 1
                dropped_rate += rate
                continue
            requests.append(Request(origin=origin, destination=dest, rate=rate))
    if dropped:
        logger.warning(
            "rate floor %g dropped %d requests totaling %g of %g total rate",
            rate_floor, dropped, dropped_rate, total_rate,
        )
    if not requests:
        raise ValueError("rate floor removed every request")
    return RequestSet(requests=tuple(requests))
