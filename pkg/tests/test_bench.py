import numpy as np
import pytest

from graphfl import (BlobsDontFit, DecompositionStrategy, DensityBelowTree,
                     Graph, SolverConfig, Trail, TrailSet, blob_signal,
                     BlobSpec, connected_components, decompose_edge_wise,
                     decompose_grid_rows_cols, grid_graph,
                     odd_degree_vertices, random_sparse_graph, run_trials,
                     trail_halving_experiment, trail_stats,
                     validate_trail_partition)
from graphfl.bench import trial_seed

from oracles import bfs_components


STRATS = [DecompositionStrategy("pseudotour", seed=0),
          DecompositionStrategy("medians", seed=0)]


# ---- graph generators ---- #

def test_grid_graph_counts():
    assert grid_graph(1, 1).n_edges == 0
    assert grid_graph(2, 2).n_edges == 4
    g = grid_graph(100, 100)
    assert g.n_vertices == 10000
    assert g.n_edges == 19800
    assert len(odd_degree_vertices(g)) == 392


def test_grid_graph_row_major_neighbors():
    g = grid_graph(3, 4)
    edges = set(g.edges)
    assert (0, 1) in edges and (0, 4) in edges
    assert (5, 6) in edges and (5, 9) in edges
    assert all(u < v for u, v in g.edges)
    assert len(bfs_components(g.n_vertices, g.edges)) == 1


def test_random_sparse_tree_boundary():
    g = random_sparse_graph(10, target_sparsity=0.8, seed=1)
    assert g.n_edges == 9  # round(0.2 * 45) = 9 = spanning tree exactly
    assert len(bfs_components(10, g.edges)) == 1


def test_random_sparse_connected_and_sized():
    g = random_sparse_graph(40, target_sparsity=0.9, seed=7)
    assert g.n_edges == round(0.1 * 40 * 39 / 2)
    assert len(bfs_components(40, g.edges)) == 1
    assert len(set(g.edges)) == g.n_edges
    assert all(u != v for u, v in g.edges)


def test_random_sparse_deterministic():
    a = random_sparse_graph(30, target_sparsity=0.9, seed=5)
    b = random_sparse_graph(30, target_sparsity=0.9, seed=5)
    c = random_sparse_graph(30, target_sparsity=0.9, seed=6)
    assert a.edges == b.edges
    assert a.edges != c.edges


def test_random_sparse_below_tree_density():
    with pytest.raises(DensityBelowTree):
        random_sparse_graph(10, target_sparsity=0.99, seed=0)


# ---- blob signals ---- #

def test_blob_signal_no_blobs():
    g = grid_graph(5, 5)
    y, gt = blob_signal(g, BlobSpec(n_blobs=0, seed=2))
    assert np.array_equal(gt, np.zeros(25))
    assert np.std(y) > 0


def test_blob_signal_zero_noise_is_ground_truth():
    g = grid_graph(6, 6)
    y, gt = blob_signal(g, BlobSpec(noise_sd=0.0, seed=3))
    assert np.array_equal(y, gt)


def test_blob_signal_default_grid_structure():
    g = grid_graph(20, 20)
    _, gt = blob_signal(g, BlobSpec(seed=4))
    means = set(gt[gt != 0.0])
    assert len(means) == 4
    claimed = []
    for mu in means:
        members = np.flatnonzero(gt == mu)
        assert members.size == 20  # ceil(0.05 * 400)
        # each blob is one connected ball
        sub_edges = [(u, v) for u, v in g.edges
                     if gt[u] == mu and gt[v] == mu]
        relabel = {v: i for i, v in enumerate(members)}
        comps = bfs_components(members.size,
                               [(relabel[u], relabel[v]) for u, v in sub_edges])
        assert len(comps) == 1
        claimed.append(set(members.tolist()))
    for i in range(len(claimed)):
        for j in range(i + 1, len(claimed)):
            assert not claimed[i] & claimed[j]


def test_blob_signal_fixed_means():
    g = grid_graph(8, 8)
    _, gt = blob_signal(g, BlobSpec(n_blobs=2, blob_fraction=0.1,
                                    means=[1.0, -3.0], noise_sd=0.0, seed=0))
    assert set(gt.tolist()) == {0.0, 1.0, -3.0}


def test_blob_signal_deterministic():
    g = grid_graph(10, 10)
    y1, gt1 = blob_signal(g, BlobSpec(seed=11))
    y2, gt2 = blob_signal(g, BlobSpec(seed=11))
    assert np.array_equal(y1, y2) and np.array_equal(gt1, gt2)


def test_blob_spec_validation():
    with pytest.raises(ValueError):
        BlobSpec(n_blobs=-1)
    with pytest.raises(ValueError):
        BlobSpec(n_blobs=4, blob_fraction=0.3)  # above 1/n_blobs
    with pytest.raises(ValueError):
        BlobSpec(n_blobs=2, means=[1.0])


def test_blobs_dont_fit():
    with pytest.raises(BlobsDontFit):
        blob_signal(Graph(4, [(0, 1), (1, 2), (2, 3)]),
                    BlobSpec(n_blobs=3, blob_fraction=1.0 / 3.0, seed=0))
    # disconnected: no ball can reach the requested size
    with pytest.raises(BlobsDontFit):
        blob_signal(Graph(4, []), BlobSpec(n_blobs=1, blob_fraction=0.5, seed=0))


# ---- trial harness ---- #

def test_trial_seed_distinct_and_stable():
    seeds = [trial_seed(3, t) for t in range(20)]
    assert len(set(seeds)) == 20
    assert seeds == [trial_seed(3, t) for t in range(20)]
    assert trial_seed(4, 0) != trial_seed(3, 0)


def test_run_trials_single():
    g = grid_graph(4, 4)
    results, summaries = run_trials(g, STRATS[:1], n_trials=1, lam=1.0,
                                    master_seed=0)
    assert len(results) == 1
    r = results[0]
    assert r.converged and r.steps >= 1 and r.error is None
    assert summaries[0].n_trials == 1
    assert summaries[0].stderr_steps == 0.0


def test_run_trials_ordering_and_determinism():
    g = grid_graph(5, 5)
    res1, sum1 = run_trials(g, STRATS, n_trials=3, lam=1.0, master_seed=9)
    res2, _ = run_trials(g, STRATS, n_trials=3, lam=1.0, master_seed=9)
    order = [(r.trial, r.strategy) for r in res1]
    assert order == [(t, s.variant) for t in range(3) for s in STRATS]
    key = [(r.trial, r.strategy, r.steps, r.objective, r.converged)
           for r in res1]
    assert key == [(r.trial, r.strategy, r.steps, r.objective, r.converged)
                   for r in res2]
    assert sum1[0].strategy == "pseudotour"


def test_run_trials_thread_count_invariant():
    g = grid_graph(5, 5)
    res1, _ = run_trials(g, STRATS, n_trials=4, lam=1.0, master_seed=2,
                         threads=1)
    res4, _ = run_trials(g, STRATS, n_trials=4, lam=1.0, master_seed=2,
                         threads=4)
    for a, b in zip(res1, res4):
        assert (a.trial, a.strategy, a.steps, a.objective) == \
               (b.trial, b.strategy, b.steps, b.objective)


def test_run_trials_stderr_matches_recomputation():
    g = grid_graph(5, 5)
    results, summaries = run_trials(g, STRATS[:1], n_trials=5, lam=1.0,
                                    master_seed=4)
    steps = np.array([r.steps for r in results], dtype=float)
    s = summaries[0]
    assert s.mean_steps == pytest.approx(steps.mean())
    assert s.stderr_steps == pytest.approx(steps.std(ddof=1) / np.sqrt(5))
    assert s.n_converged == 5


def test_run_trials_error_recorded_not_fatal():
    g = grid_graph(3, 3)
    bad = TrailSet((Trail((0, 1), (0,)),), n_vertices=5, n_edges=1)  # wrong n
    results, summaries = run_trials(g, STRATS[:1], n_trials=2, lam=1.0,
                                    master_seed=0, trail_sets={"bad": bad})
    assert all(r.error is not None for r in results)
    assert all(not r.converged for r in results)
    assert np.isnan(results[0].objective)
    assert summaries == [] or all(s.n_trials == 0 for s in summaries)


# ---- halving experiment ---- #

def test_halving_levels_track_trail_stats():
    results, table = trail_halving_experiment(
        4, 4, n_halvings=2, trials=2, lam=1.0,
        config=SolverConfig(tol=1e-4), master_seed=1)
    assert [lv.level for lv in table] == [0, 1, 2]
    base = decompose_grid_rows_cols(4, 4)
    assert table[0].n_trails == len(base.trails)
    assert table[0].max_length == max(base.lengths())
    # rows+cols on 4x4 has length-3 trails; two halvings reach single edges
    assert table[-1].max_length == 1
    edgewise = trail_stats(decompose_edge_wise(grid_graph(4, 4)))
    assert table[-1].n_trails == edgewise.count
    assert all(lv.mean_steps >= 1 for lv in table)
    assert len(results) == 3 * 2


def test_halving_partitions_stay_valid():
    g = grid_graph(6, 6)
    from graphfl import halve_trails
    ts = decompose_grid_rows_cols(6, 6)
    for _ in range(3):
        assert validate_trail_partition(g, ts).ok
        ts = halve_trails(ts)
    assert validate_trail_partition(g, ts).ok
