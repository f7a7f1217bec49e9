import time

import numpy as np
import pytest

from graphfl import LengthMismatch, solve_tv1d, tv1d_objective, verify_tv1d_kkt
from oracles import two_point_tv1d


def test_singleton_passthrough():
    z = solve_tv1d(np.array([3.7]), np.array([2.0]))
    assert z[0] == 3.7


def test_two_point_split():
    # strong data term: ends shrink toward each other by 1/(2w)
    z = solve_tv1d(np.array([0.0, 1.0]), np.array([10.0, 10.0]))
    np.testing.assert_allclose(z, [0.05, 0.95], atol=1e-12)


def test_two_point_fuse():
    # weak data term: both points fuse to the weighted mean
    z = solve_tv1d(np.array([0.0, 1.0]), np.array([0.4, 0.4]))
    np.testing.assert_allclose(z, [0.5, 0.5], atol=1e-12)


def test_two_point_matches_closed_form(rng):
    for _ in range(300):
        y = rng.normal(scale=3.0, size=2)
        w = rng.uniform(1e-2, 1e2, size=2)
        z = solve_tv1d(y, w)
        np.testing.assert_allclose(z, two_point_tv1d(y[0], y[1], w[0], w[1]),
                                   atol=1e-10)


def test_constant_input_unchanged():
    y = np.full(17, 2.5)
    z = solve_tv1d(y, np.full(17, 1.0))
    np.testing.assert_allclose(z, y, atol=1e-12)


def test_kkt_certificate_on_fuzz(rng):
    for _ in range(300):
        n = int(rng.integers(1, 80))
        y = rng.normal(scale=rng.uniform(0.1, 10.0), size=n)
        w = rng.uniform(1e-3, 1e3, size=n)
        z = solve_tv1d(y, w)
        assert verify_tv1d_kkt(y, w, z, tol=1e-8)


def test_kkt_rejects_wrong_solution(rng):
    y = rng.normal(size=20)
    w = np.full(20, 1.0)
    z = solve_tv1d(y, w)
    bad = z.copy()
    bad[7] += 0.05
    assert not verify_tv1d_kkt(y, w, bad, tol=1e-8)


def test_objective_of_solution_beats_candidates(rng):
    for _ in range(50):
        n = int(rng.integers(2, 40))
        y = rng.normal(size=n)
        w = rng.uniform(0.05, 20.0, size=n)
        z = solve_tv1d(y, w)
        f_star = tv1d_objective(y, w, z)
        for _ in range(10):
            cand = z + rng.normal(scale=rng.uniform(1e-4, 1.0), size=n)
            assert f_star <= tv1d_objective(y, w, cand) + 1e-12


def test_huge_weights_reproduce_input(rng):
    y = rng.normal(size=50)
    z = solve_tv1d(y, np.full(50, 1e6))
    assert np.max(np.abs(z - y)) < 1e-3


def test_tiny_weights_fuse_to_weighted_mean(rng):
    y = rng.normal(size=50)
    w = np.full(50, 1e-6)
    z = solve_tv1d(y, w)
    assert np.max(np.abs(z - y.mean())) < 1e-3


def test_translation_equivariance(rng):
    y = rng.normal(size=31)
    w = rng.uniform(0.1, 10.0, size=31)
    z = solve_tv1d(y, w)
    z_shift = solve_tv1d(y + 5.0, w)
    np.testing.assert_allclose(z_shift, z + 5.0, atol=1e-9)


def test_scalar_weight_broadcast(rng):
    y = rng.normal(size=9)
    np.testing.assert_array_equal(solve_tv1d(y, 2.0), solve_tv1d(y, np.full(9, 2.0)))


def test_rejects_bad_weights(rng):
    y = rng.normal(size=5)
    with pytest.raises(LengthMismatch):
        solve_tv1d(y, np.ones(4))
    with pytest.raises(ValueError):
        solve_tv1d(y, -1.0)
    with pytest.raises(ValueError):
        solve_tv1d(y, np.array([1.0, 1.0, np.nan, 1.0, 1.0]))


def test_runtime_roughly_linear(rng):
    # one warmup for jit, then 40k vs 400k: a linear solver stays within ~2x
    y_small = rng.normal(size=40_000)
    y_big = rng.normal(size=400_000)
    solve_tv1d(y_small[:100], 1.0)
    t0 = time.perf_counter()
    for _ in range(3):
        solve_tv1d(y_small, 1.0)
    t_small = time.perf_counter() - t0
    t0 = time.perf_counter()
    for _ in range(3):
        solve_tv1d(y_big, 1.0)
    t_big = time.perf_counter() - t0
    assert t_big < 10 * 2 * t_small + 0.05
