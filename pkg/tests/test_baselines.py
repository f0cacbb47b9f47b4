"""PCA/LDA projections and the exact k-NN classifier."""

import warnings

import numpy as np
import pytest

from squeezefit import (
    DegenerateLda,
    InvalidInput,
    LabeledDataset,
    generate_demo3d,
    knn_fit,
    knn_predict,
    lda,
    pca,
)


def blobs(seed=0, n=20, d=3, gap=2.0, spread=0.1):
    rng = np.random.default_rng(seed)
    a = rng.normal(0.0, spread, (n, d)) + gap / 2.0 * np.eye(d)[0]
    b = rng.normal(0.0, spread, (n, d)) - gap / 2.0 * np.eye(d)[0]
    return LabeledDataset(np.vstack([a, b]), np.array([0] * n + [1] * n))


def test_pca_recovers_a_line():
    t = np.linspace(-1.0, 1.0, 9)
    direction = np.array([3.0, 4.0]) / 5.0
    ds = LabeledDataset(np.outer(t, direction) + 7.0, np.zeros(9, dtype=np.int64))
    p = pca(ds, 1)
    assert np.allclose(p, np.outer(direction, direction), atol=1e-10)
    assert np.allclose(p @ p, p, atol=1e-10)


def test_pca_full_rank_is_identity(rng):
    ds = LabeledDataset(rng.standard_normal((30, 4)), np.zeros(30, dtype=np.int64))
    assert np.allclose(pca(ds, 4), np.eye(4), atol=1e-9)


def test_pca_overrank_warns_and_returns_span():
    t = np.linspace(-1.0, 1.0, 6)
    ds = LabeledDataset(np.outer(t, [1.0, 0.0, 0.0]), np.zeros(6, dtype=np.int64))
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        p = pca(ds, 3)
    assert any("rank" in str(w.message).lower() for w in caught)
    assert np.allclose(p, np.diag([1.0, 0.0, 0.0]), atol=1e-10)


def test_pca_ignores_labels_demo3d():
    ds, pi = generate_demo3d(seed=3)
    p = pca(ds, 1)
    # the top variance direction is off the planted axis: projections differ
    assert np.linalg.norm(p - pi) > 0.5


def test_lda_binary_finds_separating_direction():
    ds = blobs(seed=1)
    p = lda(ds)
    assert p.shape == (3, 3)
    assert np.trace(p) == pytest.approx(1.0, abs=1e-9)
    # the projection concentrates on the separating first axis
    assert p[0, 0] >= 0.98


def test_lda_affine_reparametrization_keeps_separation():
    ds = blobs(seed=2)
    a = np.array([[2.0, 0.3, 0.0], [0.0, 1.0, -0.5], [0.1, 0.0, 1.5]])
    warped = LabeledDataset(ds.points @ a.T, ds.labels)
    for data in (ds, warped):
        p = lda(data)
        scores = data.points @ p
        mu0 = scores[data.labels == 0].mean(axis=0)
        mu1 = scores[data.labels == 1].mean(axis=0)
        within = max(
            scores[data.labels == 0].std(axis=0).max(),
            scores[data.labels == 1].std(axis=0).max(),
        )
        assert np.linalg.norm(mu0 - mu1) > 5.0 * within


def test_lda_multiclass_rank_is_classes_minus_one():
    rng = np.random.default_rng(3)
    centers = np.array([[0.0, 0.0, 0.0, 0.0], [4.0, 0.0, 0.0, 0.0], [0.0, 4.0, 0.0, 0.0]])
    points = np.vstack([rng.normal(0, 0.2, (15, 4)) + c for c in centers])
    ds = LabeledDataset(points, np.repeat([0, 1, 2], 15))
    p = lda(ds)
    assert np.trace(p) == pytest.approx(2.0, abs=1e-6)
    assert np.allclose(p @ p, p, atol=1e-8)


def test_lda_rejects_coinciding_centroids():
    points = np.array([[1.0, 0.0], [-1.0, 0.0], [1.0, 0.0], [-1.0, 0.0]])
    ds = LabeledDataset(points, np.array([0, 0, 1, 1]))
    with pytest.raises(DegenerateLda):
        lda(ds)


def test_knn_self_training_zero_error():
    ds = blobs(seed=4)
    clf = knn_fit(ds, np.eye(3), 1)
    labels, error = knn_predict(clf, ds.points @ np.eye(3), ds.labels)
    assert error == 0.0
    assert np.array_equal(labels, ds.labels)


def test_knn_matches_linear_scan_oracle(rng):
    for _ in range(10):
        n = int(rng.integers(10, 120))
        d = int(rng.integers(1, 5))
        k = int(rng.integers(1, 6))
        train = LabeledDataset(
            rng.standard_normal((n, d)),
            rng.integers(0, 3, n).astype(np.int64),
        )
        queries = rng.standard_normal((15, d))
        clf = knn_fit(train, np.eye(d), min(k, n))
        got = knn_predict(clf, queries)
        for row, query in enumerate(queries):
            d2 = ((train.points - query) ** 2).sum(axis=1)
            order = np.lexsort((np.arange(n), d2))[: min(k, n)]
            votes = train.labels[order]
            values, counts = np.unique(votes, return_counts=True)
            assert got[row] == values[np.argmax(counts)]


def test_knn_vote_tie_breaks_to_smaller_label():
    train = LabeledDataset(
        np.array([[0.0], [2.0]]), np.array([5, 3], dtype=np.int64)
    )
    clf = knn_fit(train, np.eye(1), 2)
    # equidistant voters 3 and 5 split 1-1: the smaller label wins
    labels = knn_predict(clf, np.array([[1.0]]))
    assert labels[0] == 3


def test_knn_distance_tie_prefers_lower_index():
    train = LabeledDataset(
        np.array([[1.0], [-1.0], [3.0]]), np.array([7, 2, 2], dtype=np.int64)
    )
    clf = knn_fit(train, np.eye(1), 1)
    # the query at 0 sits exactly between points 0 and 1: index 0 wins
    labels = knn_predict(clf, np.array([[0.0]]))
    assert labels[0] == 7


def test_knn_metric_factor_changes_neighbors():
    train = LabeledDataset(
        np.array([[1.0, 0.0], [0.0, 3.0]]), np.array([0, 1], dtype=np.int64)
    )
    query = np.array([[0.8, 2.0]])
    plain = knn_predict(knn_fit(train, np.eye(2), 1), query @ np.eye(2))
    assert plain[0] == 1
    crush_y = np.diag([1.0, 0.01])
    squeezed = knn_predict(knn_fit(train, crush_y, 1), query @ crush_y)
    assert squeezed[0] == 0


def test_knn_error_rate_is_fraction():
    train = LabeledDataset(np.array([[0.0], [10.0]]), np.array([0, 1], dtype=np.int64))
    clf = knn_fit(train, np.eye(1), 1)
    # predictions are [0, 1, 1, 0] by proximity; exactly one truth disagrees
    _, error = knn_predict(
        clf, np.array([[1.0], [9.0], [11.0], [2.0]]), np.array([0, 1, 1, 1])
    )
    assert error == pytest.approx(0.25)


def test_knn_fit_validates_neighbor_count():
    ds = blobs(seed=5, n=3)
    with pytest.raises(InvalidInput):
        knn_fit(ds, np.eye(3), 0)
    with pytest.raises(InvalidInput):
        knn_fit(ds, np.eye(3), 7)
