"""Shared fixtures and instance generators for the test suite."""

from __future__ import annotations

import numpy as np
import pytest

from squeezefit import LabeledDataset, build_constraints_full, cross_class_shortest


def two_point_dataset() -> LabeledDataset:
    """Two points at distance 2 along the first axis, different labels."""
    return LabeledDataset(
        np.array([[0.0, 0.0], [2.0, 0.0]]), np.array([4, 9], dtype=np.int64)
    )


def random_separated_instance(seed: int) -> tuple[LabeledDataset, float]:
    """A small random two-class dataset and a feasible margin.

    Dimensions and sizes stay small (d <= 5, n <= 20) and the margin is set to
    0.8 times the smallest cross-class distance, so the hard program is always
    strictly feasible.
    """
    rng = np.random.default_rng(seed)
    d = int(rng.integers(2, 6))
    n = int(rng.integers(6, 21))
    points = rng.standard_normal((n, d))
    labels = np.zeros(n, dtype=np.int64)
    labels[rng.permutation(n)[: n // 2]] = 1
    ds = LabeledDataset(points, labels)
    shortest, _ = cross_class_shortest(ds, np.eye(d))
    return ds, 0.8 * shortest


@pytest.fixture
def two_point() -> LabeledDataset:
    return two_point_dataset()


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20260815)
