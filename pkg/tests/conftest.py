from __future__ import annotations

from pathlib import Path

import pytest

from poolflow import Request, RequestSet, all_pairs_shortest_times, build_graph

DATA_DIR = Path(__file__).resolve().parents[1] / "data"

LINE_ARCS = [(1, 2, 1.0), (2, 3, 1.0), (3, 4, 1.0), (2, 1, 1.0), (3, 2, 1.0), (4, 3, 1.0)]


@pytest.fixture(scope="session")
def line_graph():
    """Four vertices in a row, unit travel times both ways."""
    return build_graph(4, LINE_ARCS)


@pytest.fixture(scope="session")
def line_table(line_graph):
    return all_pairs_shortest_times(line_graph)


@pytest.fixture(scope="session")
def nested_pair():
    """The hand-checked fixture pair: 1->3 nested with 2->4, rate 2 each."""
    return RequestSet((Request(1, 3, 2.0), Request(2, 4, 2.0)))


@pytest.fixture(scope="session")
def sioux_net_path():
    return DATA_DIR / "siouxfalls_net.tntp"


@pytest.fixture(scope="session")
def sioux_trips_path():
    return DATA_DIR / "siouxfalls_trips.tntp"
