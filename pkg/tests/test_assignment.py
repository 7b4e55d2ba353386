from __future__ import annotations

import numpy as np
import pytest

from poolflow import (
    Request,
    RequestSet,
    WaitWindow,
    all_pairs_shortest_times,
    build_pairwise_table,
    build_pooled_demand,
    demand_from_requests,
    greedy_assign,
    no_pooling_solution,
    solve_ridepooling,
)

from helpers import grid_allocation_optimum, random_requests, random_strong_graph


def test_nothing_beneficial_to_pool(line_table):
    rs = RequestSet((Request(1, 2, 1.0), Request(4, 3, 1.0)))  # opposite directions
    table = build_pairwise_table(line_table, rs, delay_cap=0.0)
    state = greedy_assign(rs, table, WaitWindow(10.0))
    assert state.iterations == 0
    assert np.all(state.gamma == 0.0)
    assert np.allclose(state.alpha_residual, [1.0, 1.0])


def test_fixture_pair_pools_fully(line_table, nested_pair):
    # t_bar = 10 h makes P(2, 2) = 1 - exp(-40) ~ 1
    table = build_pairwise_table(line_table, nested_pair, delay_cap=0.0)
    state = greedy_assign(nested_pair, table, WaitWindow(600.0))
    assert state.selections[0] == (0, 1)
    assert state.gamma[0, 1] == pytest.approx(2.0, abs=1e-6)
    assert state.alpha_residual.max() == pytest.approx(0.0, abs=1e-6)
    assert state.beta[0, 1] == 2.0 and state.beta[1, 0] == 2.0


def test_gamma_invariants_random():
    rng = np.random.default_rng(17)
    for _ in range(20):
        g = random_strong_graph(rng, 6, extra_arcs=5)
        tbl = all_pairs_shortest_times(g)
        count = int(rng.integers(2, 7))
        rs = random_requests(rng, 6, count, rates=rng.uniform(0.5, 3.0, size=count))
        table = build_pairwise_table(tbl, rs, float(rng.integers(0, 5)))
        state = greedy_assign(rs, table, WaitWindow(float(rng.uniform(1, 30))))
        assert np.allclose(state.gamma, state.gamma.T)
        off = ~np.eye(count, dtype=bool)
        assert np.all(
            state.gamma[off] <= np.minimum(state.beta, state.beta.T)[off] + 1e-12
        )
        alpha = np.array([r.rate for r in rs])
        assert np.all(state.gamma.sum(axis=1) <= alpha + 1e-9)
        assert np.all(state.alpha_residual >= 0.0)


def test_termination_bound():
    rng = np.random.default_rng(29)
    for _ in range(10):
        g = random_strong_graph(rng, 6, extra_arcs=6)
        tbl = all_pairs_shortest_times(g)
        rs = random_requests(rng, 6, 6)
        table = build_pairwise_table(tbl, rs, 5.0)
        state = greedy_assign(rs, table, WaitWindow(10.0), self_pooling=True)
        assert state.iterations <= 6 * 5 / 2 + 6  # unordered pairs + self slots
        assert state.iterations <= 6 * 5  # ordered-pair bound


def test_pooled_demand_no_pooling_identity(line_table, line_graph):
    rs = RequestSet((Request(1, 2, 1.0), Request(4, 3, 1.0)))
    table = build_pairwise_table(line_table, rs, 0.0)
    state = greedy_assign(rs, table, WaitWindow(10.0))
    pooled = build_pooled_demand(rs, state, table, 4)
    expected = demand_from_requests(rs, 4)
    assert np.allclose(pooled.d_rp.entries, expected.entries)
    assert pooled.pooled_fraction == 0.0


def test_pooled_demand_fixture_legs(line_graph, line_table, nested_pair):
    table = build_pairwise_table(line_table, nested_pair, 0.0)
    state = greedy_assign(nested_pair, table, WaitWindow(600.0))
    pooled = build_pooled_demand(nested_pair, state, table, 4)
    e = pooled.d_rp.entries
    g = state.gamma[0, 1]
    assert e[1, 0] == pytest.approx(g, abs=1e-9)  # leg 1 -> 2
    assert e[2, 1] == pytest.approx(g, abs=1e-9)  # leg 2 -> 3
    assert e[3, 2] == pytest.approx(g, abs=1e-9)  # leg 3 -> 4
    assert e[2, 0] == pytest.approx(2.0 - g, abs=1e-9)  # leftover direct 1 -> 3
    assert pooled.pooled_fraction == pytest.approx(1.0, abs=1e-6)


def test_self_pool_accounting(line_graph, line_table):
    rs = RequestSet((Request(1, 3, 2.0),))
    table = build_pairwise_table(line_table, rs, 0.0)
    state = greedy_assign(rs, table, WaitWindow(600.0), self_pooling=True)
    # P(2,2) ~ 1: half the stream rides along, one vehicle per pair
    assert state.gamma[0, 0] == pytest.approx(1.0, abs=1e-6)
    assert state.alpha_residual[0] == pytest.approx(0.0, abs=1e-6)
    pooled = build_pooled_demand(rs, state, table, 4)
    assert pooled.d_rp.entries[2, 0] == pytest.approx(1.0, abs=1e-6)
    assert pooled.pooled_fraction == pytest.approx(1.0, abs=1e-6)


def test_self_pool_literal_deduction_differs(line_table):
    rs = RequestSet((Request(1, 3, 2.0),))
    table = build_pairwise_table(line_table, rs, 0.0)
    literal = greedy_assign(rs, table, WaitWindow(600.0), self_pooling=True,
                            literal_self_deduction=True)
    # pseudocode deducts gamma once: residual stays at alpha - gamma
    assert literal.alpha_residual[0] == pytest.approx(1.0, abs=1e-6)


def test_solve_ridepooling_fixture_improvement(line_graph, line_table, nested_pair):
    sol, pooled, state = solve_ridepooling(
        line_graph, line_table, nested_pair, delay_cap=0.0, w=WaitWindow(600.0)
    )
    base = no_pooling_solution(line_graph, line_table, nested_pair)
    improvement = (base.objective_J_tilde - sol.objective_J_tilde) / base.objective_J_tilde
    assert improvement == pytest.approx(0.25, abs=0.005)
    assert pooled.pooled_fraction >= 0.99


def test_tbar_to_zero_recovers_no_pooling(line_graph, line_table, nested_pair):
    sol, pooled, _ = solve_ridepooling(
        line_graph, line_table, nested_pair, delay_cap=5.0, w=WaitWindow(1e-9)
    )
    base = no_pooling_solution(line_graph, line_table, nested_pair)
    assert pooled.pooled_fraction == pytest.approx(0.0, abs=1e-9)
    assert sol.objective_J == pytest.approx(base.objective_J, abs=1e-6)


def test_pooling_never_worse_random():
    rng = np.random.default_rng(41)
    for _ in range(15):
        n = int(rng.integers(4, 7))
        g = random_strong_graph(rng, n, extra_arcs=int(rng.integers(2, 8)))
        tbl = all_pairs_shortest_times(g)
        count = int(rng.integers(2, 9))
        rs = random_requests(rng, n, count, rates=rng.uniform(0.5, 4.0, size=count))
        w = WaitWindow(float(rng.uniform(0.5, 60.0)))
        sol, pooled, _ = solve_ridepooling(g, tbl, rs, float(rng.integers(0, 6)), w)
        base = no_pooling_solution(g, tbl, rs)
        assert sol.objective_J_tilde <= base.objective_J_tilde + 1e-9
        assert 0.0 <= pooled.pooled_fraction <= 1.0


def test_greedy_gain_brackets_grid_optimum():
    # P forced to 1 by a huge window; unit rates so the grid step is 0.1.
    # The greedy never beats the grid search and, like any maximal
    # descending-weight matching, never falls below half of it (tight when
    # one stream's best partner blocks two disjoint alternatives).
    rng = np.random.default_rng(53)
    w = WaitWindow(1e8)
    for _ in range(20):
        n = int(rng.integers(4, 7))
        g = random_strong_graph(rng, n, extra_arcs=int(rng.integers(2, 8)))
        tbl = all_pairs_shortest_times(g)
        count = int(rng.integers(2, 5))
        rs = random_requests(rng, n, count)
        table = build_pairwise_table(tbl, rs, 2.0)
        state = greedy_assign(rs, table, w)
        gain = float(np.sum(np.triu(state.gamma) * np.triu(table.delta)))
        deltas = {
            (m, q): float(table.delta[m, q])
            for m in range(count)
            for q in range(m + 1, count)
        }
        optimum = grid_allocation_optimum(deltas, np.ones(count), 0.1)
        assert gain <= optimum + 1e-9
        assert gain >= optimum / 2 - 1e-9
