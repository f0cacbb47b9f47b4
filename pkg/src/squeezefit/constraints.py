"""Cross-class difference vectors: the constraint sets of the margin programs."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, NamedTuple

import numpy as np
from scipy.spatial.distance import cdist

from .data import LabeledDataset
from .errors import DegenerateData, InvalidInput, NoConstraints
from .kdtree import KdTree
from .spectral import psd_sqrt

LINEAR_SCAN_MAX = 256
TIE_RTOL = 1e-9


class DifferencePair(NamedTuple):
    """One cross-class difference z = x_i - x_j (labels of i and j differ)."""

    i: int
    j: int
    z: np.ndarray


@dataclass(frozen=True)
class ConstraintSet:
    """Deduplicated cross-class differences, one per unordered point pair.

    ``z[k]`` equals ``points[i_index[k]] - points[j_index[k]]``; only one of
    (i, j) / (j, i) is stored since the programs only see z through z z^T.
    """

    i_index: np.ndarray
    j_index: np.ndarray
    z: np.ndarray
    pruned: bool = False

    def __post_init__(self):
        if not (len(self.i_index) == len(self.j_index) == len(self.z)):
            raise InvalidInput("constraint arrays disagree in length")

    def __len__(self) -> int:
        return self.z.shape[0]

    def __getitem__(self, k: int) -> DifferencePair:
        return DifferencePair(int(self.i_index[k]), int(self.j_index[k]), self.z[k])

    def __iter__(self) -> Iterator[DifferencePair]:
        for k in range(len(self)):
            yield self[k]

    def pairs(self) -> set[tuple[int, int]]:
        return {
            (min(i, j), max(i, j))
            for i, j in zip(self.i_index.tolist(), self.j_index.tolist())
        }

    def quad_forms(self, matrix: np.ndarray) -> np.ndarray:
        """z^T M z for every stored difference."""
        return np.einsum("ij,ij->i", self.z @ matrix, self.z)


def _raise_on_zero(z: np.ndarray, i_idx: np.ndarray, j_idx: np.ndarray) -> None:
    zero = np.flatnonzero(np.all(z == 0.0, axis=1))
    if zero.size:
        k = zero[0]
        raise DegenerateData(
            f"points {int(i_idx[k])} and {int(j_idx[k])} coincide but carry "
            "different labels; no margin can separate them"
        )


def build_constraints_full(ds: LabeledDataset) -> ConstraintSet:
    """Every cross-class difference, one per unordered pair."""
    classes = ds.classes
    if classes.size < 2:
        raise NoConstraints("need at least two distinct labels")
    i_parts, j_parts, z_parts = [], [], []
    for a_pos in range(classes.size):
        for b_pos in range(a_pos + 1, classes.size):
            ia = ds.class_indices(classes[a_pos])
            ib = ds.class_indices(classes[b_pos])
            diff = ds.points[ia][:, None, :] - ds.points[ib][None, :, :]
            grid_i = np.repeat(ia, ib.size)
            grid_j = np.tile(ib, ia.size)
            i_parts.append(grid_i)
            j_parts.append(grid_j)
            z_parts.append(diff.reshape(-1, ds.dim))
    i_idx = np.concatenate(i_parts)
    j_idx = np.concatenate(j_parts)
    z = np.concatenate(z_parts, axis=0)
    _raise_on_zero(z, i_idx, j_idx)
    return ConstraintSet(i_idx, j_idx, z, pruned=False)


def build_constraints_nn(ds: LabeledDataset, n_neighbors: int) -> ConstraintSet:
    """Pruned constraint set: for each point and each other class, keep the
    differences to its ``n_neighbors`` nearest points of that class."""
    n_neighbors = int(n_neighbors)
    if n_neighbors < 1:
        raise InvalidInput(f"n_neighbors must be >= 1, got {n_neighbors}")
    classes = ds.classes
    if classes.size < 2:
        raise NoConstraints("need at least two distinct labels")
    trees = {int(c): KdTree(ds.points[ds.class_indices(c)]) for c in classes}
    members = {int(c): ds.class_indices(c) for c in classes}
    kept: set[tuple[int, int]] = set()
    for c in classes:
        for other in classes:
            if other == c:
                continue
            tree = trees[int(other)]
            k = min(n_neighbors, len(tree))
            _, neighbor_rows = tree.query(ds.points[members[int(c)]], k=k)
            for row, point_idx in enumerate(members[int(c)]):
                for col in neighbor_rows[row]:
                    j = int(members[int(other)][int(col)])
                    kept.add((min(int(point_idx), j), max(int(point_idx), j)))
    ordered = sorted(kept)
    i_idx = np.array([p[0] for p in ordered], dtype=np.int64)
    j_idx = np.array([p[1] for p in ordered], dtype=np.int64)
    z = ds.points[i_idx] - ds.points[j_idx]
    _raise_on_zero(z, i_idx, j_idx)
    return ConstraintSet(i_idx, j_idx, z, pruned=True)


def cross_class_shortest(
    ds: LabeledDataset, matrix: np.ndarray
) -> tuple[float, list[tuple[int, int]]]:
    """Shortest cross-class distance in the metric induced by a PSD matrix.

    Returns ``(min_length, pairs)`` where length is measured as
    ``|M^{1/2}(x_i - x_j)|`` and ``pairs`` lists every unordered argmin pair
    within relative tolerance 1e-9 of the minimum. Small class pairs use a
    vectorized linear scan; larger ones a k-d tree in the transformed space.
    """
    classes = ds.classes
    if classes.size < 2:
        raise NoConstraints("need at least two distinct labels")
    root = psd_sqrt(matrix)
    transformed = ds.points @ root
    best = np.inf
    per_pair: list[tuple[np.ndarray, np.ndarray, object]] = []
    for a_pos in range(classes.size):
        for b_pos in range(a_pos + 1, classes.size):
            ia = ds.class_indices(classes[a_pos])
            ib = ds.class_indices(classes[b_pos])
            pa, pb = transformed[ia], transformed[ib]
            if max(ia.size, ib.size) <= LINEAR_SCAN_MAX:
                dmat = cdist(pa, pb)
                per_pair.append((ia, ib, dmat))
                best = min(best, float(dmat.min()))
            else:
                tree = KdTree(pb)
                dists, _ = tree.query(pa, k=1)
                per_pair.append((ia, ib, tree))
                best = min(best, float(dists.min()))
    cutoff = best * (1.0 + TIE_RTOL)
    pairs: list[tuple[int, int]] = []
    for ia, ib, probe in per_pair:
        if isinstance(probe, np.ndarray):
            hits = np.argwhere(probe <= cutoff)
            for row, col in hits:
                pairs.append((int(ia[row]), int(ib[col])))
        else:
            for row, gi in enumerate(ia):
                for col in probe.query_ball(transformed[gi], cutoff):
                    pairs.append((int(gi), int(ib[col])))
    pairs.sort()
    return best, pairs
