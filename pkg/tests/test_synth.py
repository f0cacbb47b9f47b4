"""Synthetic generators: simplex base, planted subspace, 3-d demo."""

import numpy as np
import pytest

from squeezefit import (
    InvalidInput,
    PlantedModel,
    generate_demo3d,
    generate_planted,
    generate_simplex_base,
)


def test_simplex_base_geometry():
    ds = generate_simplex_base(4, 8)
    assert ds.n == 5 and ds.dim == 8
    assert np.allclose(ds.points[:4, :4], np.eye(4))
    assert np.allclose(ds.points[4], 0.0)
    assert list(ds.labels) == [0, 0, 0, 0, 1]


def test_simplex_base_validation():
    with pytest.raises(InvalidInput):
        generate_simplex_base(0, 4)
    with pytest.raises(InvalidInput):
        generate_simplex_base(5, 4)


def test_planted_model_validation():
    with pytest.raises(InvalidInput):
        PlantedModel(dim=4, rank=5, n_base=6, n_reps=2, sigma=0.1)
    with pytest.raises(InvalidInput):
        PlantedModel(dim=6, rank=3, n_base=3, n_reps=2, sigma=0.1)
    with pytest.raises(InvalidInput):
        PlantedModel(dim=6, rank=3, n_base=4, n_reps=0, sigma=0.1)
    with pytest.raises(InvalidInput):
        PlantedModel(dim=6, rank=3, n_base=4, n_reps=2, sigma=-1.0)


def test_planted_shapes_and_projection():
    model = PlantedModel(dim=10, rank=3, n_base=5, n_reps=7, sigma=0.2)
    ds, pi = generate_planted(model, seed=1)
    assert ds.n == 35 and ds.dim == 10
    assert pi.shape == (10, 10)
    assert np.allclose(pi, pi.T, atol=1e-12)
    assert np.allclose(pi @ pi, pi, atol=1e-10)
    assert abs(np.trace(pi) - 3.0) <= 1e-9


def test_planted_noise_lives_in_complement():
    model = PlantedModel(dim=8, rank=2, n_base=3, n_reps=11, sigma=0.5)
    ds, pi = generate_planted(model, seed=2)
    base = ds.points @ pi  # projecting removes the noise exactly
    repeated = np.repeat(base[:: model.n_reps], model.n_reps, axis=0)
    assert np.allclose(base, repeated, atol=1e-10)
    residual = ds.points - base
    assert np.allclose(residual @ pi, 0.0, atol=1e-10)


def test_planted_noise_covariance_matches_scale():
    # with many replicates the residual covariance approaches sigma^2 (I - pi)
    sigma = 0.7
    model = PlantedModel(dim=6, rank=2, n_base=3, n_reps=5000, sigma=sigma)
    ds, pi = generate_planted(model, seed=3)
    residual = ds.points - ds.points @ pi
    cov = residual.T @ residual / residual.shape[0]
    target = sigma**2 * (np.eye(6) - pi)
    rel = np.linalg.norm(cov - target) / np.linalg.norm(target)
    assert rel <= 0.1


def test_planted_margin_scales_with_delta():
    model = PlantedModel(dim=6, rank=2, n_base=3, n_reps=1, sigma=0.0, delta=2.5)
    ds, _ = generate_planted(model, seed=0)
    cross = [
        np.linalg.norm(ds.points[i] - ds.points[j])
        for i in range(ds.n)
        for j in range(ds.n)
        if ds.labels[i] != ds.labels[j]
    ]
    assert abs(min(cross) - 2.5) <= 1e-12


def test_planted_deterministic_per_seed():
    model = PlantedModel(dim=5, rank=2, n_base=3, n_reps=4, sigma=0.3)
    a, _ = generate_planted(model, seed=7)
    b, _ = generate_planted(model, seed=7)
    c, _ = generate_planted(model, seed=8)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, c.points)


def test_demo3d_contract():
    ds, pi = generate_demo3d(seed=5)
    assert ds.n == 60 and ds.dim == 3
    assert set(ds.labels.tolist()) == {0, 1}
    assert np.allclose(pi @ pi, pi, atol=1e-10)
    assert abs(np.trace(pi) - 1.0) <= 1e-9
    # classes are linearly separated along the planted axis
    u = np.linalg.svd(pi)[0][:, 0]
    coords = ds.points @ u
    lo = coords[ds.labels == 0]
    hi = coords[ds.labels == 1]
    assert lo.min() > hi.max() or hi.min() > lo.max()


def test_demo3d_off_axis_variance_dominates():
    ds, pi = generate_demo3d(seed=9)
    u = np.linalg.svd(pi)[0][:, 0]
    centered = ds.points - ds.points.mean(axis=0)
    along = np.var(centered @ u)
    total = np.var(centered, axis=0).sum()
    assert along < 0.5 * (total - along)
