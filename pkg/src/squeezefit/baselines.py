"""Classical compression and classification baselines: PCA, LDA, k-NN.

The comparison pipelines compress with a projection (or a metric square root)
and classify with K-nearest neighbours in the compressed space; these are the
label-blind / centroid-based counterparts the margin program is measured
against.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from .data import LabeledDataset
from .errors import DegenerateLda, InvalidInput
from .kdtree import KdTree
from .spectral import eig_sym
from .validation import as_float_array, check_symmetric

DATA_RANK_RTOL = 1e-12
LDA_REG = 1e-6
DISTANCE_TIE_RTOL = 1e-12


def pca(ds: LabeledDataset, r: int) -> np.ndarray:
    """Projection onto the top-``r`` principal directions (label-blind).

    Directions are eigenvectors of the mean-centered covariance. When ``r``
    exceeds the numerical rank of the centered data, the projection covers the
    full data span and a warning is emitted.
    """
    r = int(r)
    if not 1 <= r <= ds.dim:
        raise InvalidInput(f"r must be in [1, {ds.dim}], got {r}")
    centered = ds.points - ds.points.mean(axis=0)
    cov = centered.T @ centered / max(1, ds.n)
    decomp = eig_sym(cov)
    top = float(decomp.eigenvalues.max(initial=0.0))
    data_rank = int(np.count_nonzero(decomp.eigenvalues > DATA_RANK_RTOL * max(top, 1.0)))
    if r > data_rank:
        warnings.warn(
            f"r={r} exceeds the centered data rank {data_rank}; "
            "projecting onto the full data span",
            stacklevel=2,
        )
        r = data_rank
    basis = decomp.eigenvectors[:, :r]
    projection = basis @ basis.T
    return (projection + projection.T) / 2.0


def _scatter_matrices(ds: LabeledDataset) -> tuple[np.ndarray, np.ndarray, list]:
    classes = ds.classes.tolist()
    d = ds.dim
    mean = ds.points.mean(axis=0)
    s_w = np.zeros((d, d))
    s_b = np.zeros((d, d))
    for label in classes:
        members = ds.points[ds.class_indices(label)]
        centroid = members.mean(axis=0)
        diff = members - centroid
        s_w += diff.T @ diff
        gap = centroid - mean
        s_b += members.shape[0] * np.outer(gap, gap)
    return s_w, s_b, classes


def lda(ds: LabeledDataset, reg: float = LDA_REG) -> np.ndarray:
    """Discriminant projection: rank 1 for two classes, rank <= k-1 beyond.

    Binary case: the projection onto ``w = (S_w + eps I)^{-1} (mu_1 - mu_2)``
    with ``S_w`` the pooled within-class scatter and ``eps = reg * tr(S_w)/d``
    (downsampled image data routinely makes the raw scatter singular; pass
    ``reg=0`` for the textbook direction). Multi-class: the span of the top
    generalized eigenvectors between the class scatters, orthonormalized.
    Coinciding centroids leave no direction and raise :class:`DegenerateLda`.
    """
    if reg < 0.0:
        raise InvalidInput(f"reg must be >= 0, got {reg}")
    classes = ds.classes
    if classes.size < 2:
        raise InvalidInput("lda needs at least two classes")
    d = ds.dim
    s_w, s_b, _ = _scatter_matrices(ds)
    eps = reg * float(np.trace(s_w)) / d
    regularized = s_w + eps * np.eye(d)

    if classes.size == 2:
        mu1 = ds.points[ds.class_indices(classes[0])].mean(axis=0)
        mu2 = ds.points[ds.class_indices(classes[1])].mean(axis=0)
        gap = mu1 - mu2
        scale = max(1.0, float(np.linalg.norm(ds.points, axis=1).max(initial=0.0)))
        if np.linalg.norm(gap) <= 1e-12 * scale:
            raise DegenerateLda("class centroids coincide")
        if float(np.trace(s_w)) <= 0.0:
            w = gap  # no within-class spread: the centroid difference itself
        else:
            w = np.linalg.solve(regularized, gap)
        norm = float(np.linalg.norm(w))
        if norm <= 0.0:
            raise DegenerateLda("discriminant direction vanished")
        w = w / norm
        return np.outer(w, w)

    top = float(np.abs(s_b).max(initial=0.0))
    if top <= 1e-12 * max(1.0, float(np.abs(ds.points).max(initial=0.0))):
        raise DegenerateLda("all class centroids coincide")
    if float(np.trace(s_w)) <= 0.0:
        regularized = np.eye(d)
    vals, vecs = scipy.linalg.eigh((s_b + s_b.T) / 2.0, regularized)
    order = np.argsort(vals)[::-1]
    vals, vecs = vals[order], vecs[:, order]
    keep = min(classes.size - 1, int(np.count_nonzero(vals > 1e-12 * max(vals[0], 1.0))))
    if keep == 0:
        raise DegenerateLda("between-class scatter is numerically zero")
    q, _ = np.linalg.qr(vecs[:, :keep])
    projection = q @ q.T
    return (projection + projection.T) / 2.0


@dataclass(frozen=True)
class Classifier:
    """K-nearest-neighbour rule over transformed reference points."""

    reference_points: np.ndarray
    reference_labels: np.ndarray
    n_neighbors: int
    tree: KdTree

    def __post_init__(self):
        if not 1 <= self.n_neighbors <= self.reference_points.shape[0]:
            raise InvalidInput(
                f"n_neighbors must be in [1, {self.reference_points.shape[0]}], "
                f"got {self.n_neighbors}"
            )


def knn_fit(train: LabeledDataset, m_sqrt, n_neighbors: int) -> Classifier:
    """Transform the training set by ``m_sqrt`` and index it for k-NN.

    ``m_sqrt`` is the symmetric compression factor (a metric square root or a
    projection); classification then runs in plain Euclidean distance on the
    transformed points.
    """
    m_sqrt = check_symmetric(m_sqrt, "m_sqrt")
    if m_sqrt.shape[0] != train.dim:
        raise InvalidInput(
            f"m_sqrt is {m_sqrt.shape[0]}x{m_sqrt.shape[0]}, data dimension is {train.dim}"
        )
    transformed = train.points @ m_sqrt
    return Classifier(
        reference_points=transformed,
        reference_labels=train.labels.copy(),
        n_neighbors=int(n_neighbors),
        tree=KdTree(transformed),
    )


def _neighbor_rows(clf: Classifier, points: np.ndarray) -> np.ndarray:
    """Indices of the K nearest references per query, deterministically.

    Distance ties are broken by reference index. The tree query is trusted
    except when the K-th and (K+1)-th distances tie, where the tree's pick is
    arbitrary; those rare rows fall back to a full scan.
    """
    n_ref = clf.reference_points.shape[0]
    k = clf.n_neighbors
    probe = min(k + 1, n_ref)
    dists, idx = clf.tree.query(points, k=probe)
    # canonical order inside each returned row: by (distance, index)
    order = np.lexsort((idx[:, :k], dists[:, :k]), axis=1)
    rows = np.take_along_axis(idx[:, :k], order, axis=1)
    if probe > k:
        boundary_tie = dists[:, k] <= dists[:, k - 1] * (1.0 + DISTANCE_TIE_RTOL)
        for row in np.flatnonzero(boundary_tie):
            gap = points[row] - clf.reference_points
            d2 = np.einsum("ij,ij->i", gap, gap)
            full = np.lexsort((np.arange(n_ref), d2))
            rows[row] = full[:k]
    return rows


def knn_predict(clf: Classifier, points, true_labels=None):
    """Majority vote among the K nearest references (Euclidean, transformed).

    Ties in the vote go to the smallest label; distance ties to the smallest
    reference index. Returns the predicted labels, or ``(labels, error_rate)``
    when ``true_labels`` is given (error_rate is the misclassified fraction).
    """
    points = np.atleast_2d(as_float_array(points, "points"))
    if points.shape[1] != clf.reference_points.shape[1]:
        raise InvalidInput(
            f"query dimension {points.shape[1]} != reference dimension "
            f"{clf.reference_points.shape[1]}"
        )
    rows = _neighbor_rows(clf, points)
    neighbor_labels = clf.reference_labels[rows]  # (n_queries, K)
    classes, encoded = np.unique(neighbor_labels, return_inverse=True)
    encoded = encoded.reshape(neighbor_labels.shape)
    counts = np.zeros((points.shape[0], classes.size), dtype=np.int64)
    np.add.at(counts, (np.arange(points.shape[0])[:, None], encoded), 1)
    # argmax returns the first maximum; classes are sorted, so ties go to the
    # smallest label
    predicted = classes[np.argmax(counts, axis=1)]
    if true_labels is None:
        return predicted
    truth = np.asarray(true_labels).reshape(-1)
    if truth.shape[0] != points.shape[0]:
        raise InvalidInput(
            f"got {truth.shape[0]} true labels for {points.shape[0]} queries"
        )
    error_rate = float(np.mean(predicted != truth))
    return predicted, error_rate
