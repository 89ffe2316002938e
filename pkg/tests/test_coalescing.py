import numpy as np
import pytest

from consensuslab.coalescing import (
    Graph,
    complete_graph,
    coalescence_time_stats,
    cycle_graph,
    draw_map_table,
    duality_check,
    empirical_one_step_drift,
    expected_distinct_after_step,
    graph_from_edge_list,
    run_coalescence,
    run_voter_with_maps,
    walk_count_chain,
)
from consensuslab.sampler import RngStream


def test_complete_graph_neighbor_map_excludes_self():
    g = complete_graph(8)
    for t in range(50):
        row = g.neighbor_map_row(RngStream(0, (t,)))
        assert row.shape == (8,)
        assert np.all(row != np.arange(8))
        assert np.all((0 <= row) & (row < 8))


def test_cycle_graph_neighbor_map_moves_to_adjacent():
    n = 10
    g = cycle_graph(n)
    for t in range(50):
        row = g.neighbor_map_row(RngStream(1, (t,)))
        diffs = (row - np.arange(n)) % n
        assert np.all(np.isin(diffs, [1, n - 1]))


def test_graph_from_edge_list():
    text = "3 3\n0 1\n1 2\n2 0\n"
    g = graph_from_edge_list(text)
    assert g.n == 3
    assert sorted(g.adjacency[0].tolist()) == [1, 2]
    assert sorted(g.adjacency[1].tolist()) == [0, 2]


def test_graph_rejects_isolated_vertex():
    with pytest.raises(ValueError):
        graph_from_edge_list("3 1\n0 1\n")


def test_run_coalescence_counts_never_increase():
    g = complete_graph(32)
    maps = draw_map_table(g, 100, RngStream(5))
    traj = run_coalescence(g, maps)
    counts = traj.walk_counts
    assert counts[0] == 32
    assert all(a >= b for a, b in zip(counts, counts[1:]))
    assert counts[-1] >= 1


def test_voter_with_maps_tau_zero_keeps_all_opinions():
    g = complete_graph(16)
    maps = draw_map_table(g, 10, RngStream(2))
    assert run_voter_with_maps(g, maps, 0) == 16


def test_duality_identity_small_graphs():
    for g, t_max in ((complete_graph(16), 60), (cycle_graph(12), 120)):
        for seed in range(10):
            assert duality_check(g, t_max, RngStream(seed, ("dual", g.n)))


def test_duality_identity_on_explicit_graph():
    g = graph_from_edge_list("4 4\n0 1\n1 2\n2 3\n3 0\n")
    assert duality_check(g, 50, RngStream(3))


def test_expected_distinct_after_step_tiny_case():
    # n=3, x=2: the walks collide only when both jump to the third node,
    # probability 1/4, so E[distinct] = 2 - 1/4
    assert np.isclose(expected_distinct_after_step(3, 2), 1.75)


def test_expected_distinct_after_step_single_walk():
    assert np.isclose(expected_distinct_after_step(10, 1), 1.0)


def test_empirical_drift_matches_occupancy_oracle():
    g = complete_graph(50)
    for x in (2, 10, 25, 50):
        est = empirical_one_step_drift(g, x, samples=4000, rng=RngStream(4, (x,)))
        oracle = expected_distinct_after_step(50, x)
        assert abs(est.mean - oracle) <= 4 * est.sigma + 1e-9


def test_walk_count_chain_matches_direct_estimate():
    n, x = 40, 15
    chain = walk_count_chain(n)
    rng = RngStream(6)
    vals = np.array([chain(x, rng.child(t)) for t in range(4000)])
    oracle = expected_distinct_after_step(n, x)
    assert abs(vals.mean() - oracle) <= 4 * vals.std(ddof=1) / np.sqrt(len(vals)) + 1e-9


def test_coalescence_time_stats_small():
    g = complete_graph(30)
    sample = coalescence_time_stats(g, k=1, trials=50, rng=RngStream(10))
    assert sample.censored == 0
    assert all(t >= 1 for t in sample.times)
    # complete-graph meeting times scale like n; 20n is a generous ceiling
    assert sample.mean <= 20 * g.n


def test_coalescence_time_stats_k_equals_n_is_zero():
    g = complete_graph(10)
    sample = coalescence_time_stats(g, k=10, trials=5, rng=RngStream(11))
    assert sample.mean == 0.0


def test_coalescence_time_stats_validates_k():
    g = complete_graph(10)
    with pytest.raises(ValueError):
        coalescence_time_stats(g, k=0, trials=5, rng=RngStream(0))


def test_graph_validation():
    with pytest.raises(ValueError):
        Graph(n=1, adjacency=None)
    with pytest.raises(ValueError):
        cycle_graph(2)
