"""Exact nearest-neighbor structure versus linear-scan oracles."""

import numpy as np
import pytest

from squeezefit import InvalidInput
from squeezefit.kdtree import KdTree


def brute_force_query(points, queries, k):
    d2 = ((queries[:, None, :] - points[None, :, :]) ** 2).sum(axis=2)
    idx = np.argsort(d2, axis=1)[:, :k]
    dists = np.sqrt(np.take_along_axis(d2, idx, axis=1))
    return dists, idx


def test_query_matches_brute_force(rng):
    for _ in range(20):
        n = int(rng.integers(5, 80))
        d = int(rng.integers(1, 6))
        k = int(rng.integers(1, min(n, 6) + 1))
        points = rng.standard_normal((n, d))
        queries = rng.standard_normal((7, d))
        tree = KdTree(points)
        dists, idx = tree.query(queries, k=k)
        ref_dists, ref_idx = brute_force_query(points, queries, k)
        assert np.array_equal(idx, ref_idx)
        assert np.allclose(dists, ref_dists, atol=1e-12)


def test_query_k_equals_n(rng):
    points = rng.standard_normal((6, 2))
    tree = KdTree(points)
    dists, idx = tree.query(points[:2], k=6)
    ref_dists, ref_idx = brute_force_query(points, points[:2], 6)
    assert np.array_equal(idx, ref_idx)
    assert np.allclose(dists, ref_dists)


def test_query_rejects_bad_k(rng):
    tree = KdTree(rng.standard_normal((4, 2)))
    with pytest.raises(InvalidInput):
        tree.query(np.zeros((1, 2)), k=5)
    with pytest.raises(InvalidInput):
        tree.query(np.zeros((1, 2)), k=0)


def test_query_ball_matches_brute_force(rng):
    points = rng.standard_normal((50, 3))
    tree = KdTree(points)
    for _ in range(10):
        center = rng.standard_normal(3)
        radius = float(rng.uniform(0.5, 2.0))
        got = tree.query_ball(center, radius)
        want = sorted(
            i
            for i in range(50)
            if np.linalg.norm(points[i] - center) <= radius
        )
        assert list(got) == want


def test_self_query_returns_self_first(rng):
    points = rng.standard_normal((30, 4))
    tree = KdTree(points)
    dists, idx = tree.query(points, k=1)
    assert np.array_equal(idx[:, 0], np.arange(30))
    assert np.allclose(dists, 0.0, atol=1e-12)
