"""Synthetic dataset generators: simplex bases, planted subspaces, 3-d demo."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .data import LabeledDataset
from .errors import InvalidInput

__all__ = [
    "PlantedModel",
    "generate_simplex_base",
    "generate_planted",
    "generate_demo3d",
]


def generate_simplex_base(r: int, d: int) -> LabeledDataset:
    """The unit simplex base: e_1..e_r with label 0, the origin with label 1.

    Its cross-class differences are exactly {e_i}, all of length 1, and they
    span the first r coordinates — the canonical margin-1 separated set.
    """
    r, d = int(r), int(d)
    if r < 1 or d < r:
        raise InvalidInput(f"need 1 <= r <= d, got r={r}, d={d}")
    points = np.zeros((r + 1, d))
    points[:r, :r] = np.eye(r)
    labels = np.zeros(r + 1, dtype=np.int64)
    labels[r] = 1
    return LabeledDataset(points, labels)


@dataclass(frozen=True)
class PlantedModel:
    """Noisy replicates of a separated base supported on a low-dim subspace.

    Each of the ``n_base`` base points is repeated ``n_reps`` times with
    Gaussian noise of scale ``sigma`` drawn in the orthogonal complement of the
    base span, so projecting any sample onto the span returns its base point
    exactly. ``base=None`` uses a margin-``delta`` simplex core augmented (for
    n_base > rank+1) with extra in-span points placed far from the other class.
    """

    dim: int
    rank: int
    n_base: int
    n_reps: int
    sigma: float
    delta: float = 1.0
    base: LabeledDataset | None = None

    def __post_init__(self):
        if self.rank < 1 or self.dim < self.rank:
            raise InvalidInput(f"need 1 <= rank <= dim, got {self.rank}, {self.dim}")
        if self.base is None and self.n_base < self.rank + 1:
            raise InvalidInput(
                f"default base needs n_base >= rank + 1, got {self.n_base}"
            )
        if self.n_reps < 1:
            raise InvalidInput("n_reps must be >= 1")
        if self.sigma < 0:
            raise InvalidInput("sigma must be nonnegative")
        if self.delta <= 0:
            raise InvalidInput("delta must be positive")


def _augmented_simplex(model: PlantedModel) -> LabeledDataset:
    """Simplex core scaled by delta plus alternating-label outriggers.

    The extras sit at (2+j) * delta * e_(j mod rank), at distance >= 2*delta
    from every opposite-label point, so the shortest cross-class differences
    stay exactly {delta * e_i} and the base keeps its margin-delta structure.
    """
    r, d = model.rank, model.dim
    points = np.zeros((model.n_base, d))
    labels = np.zeros(model.n_base, dtype=np.int64)
    points[:r, :r] = model.delta * np.eye(r)
    labels[r] = 1  # origin row is all zeros already
    for extra in range(model.n_base - r - 1):
        axis = extra % r
        points[r + 1 + extra, axis] = (2.0 + extra) * model.delta
        labels[r + 1 + extra] = extra % 2
    return LabeledDataset(points, labels)


def generate_planted(
    model: PlantedModel, seed: int
) -> tuple[LabeledDataset, np.ndarray]:
    """Draw a planted-subspace dataset; returns (dataset, span projection).

    Rows come back base-major: all replicates of base point 0 first, etc.
    """
    base = model.base if model.base is not None else _augmented_simplex(model)
    if base.dim != model.dim:
        raise InvalidInput(
            f"base dimension {base.dim} does not match model dim {model.dim}"
        )
    if base.n != model.n_base:
        raise InvalidInput(f"base has {base.n} points, model says {model.n_base}")
    u, s, _ = np.linalg.svd(base.points.T, full_matrices=True)
    span_rank = int(np.sum(s > 1e-10 * max(1.0, s[0] if s.size else 0.0)))
    span = u[:, :span_rank]
    pi = span @ span.T
    pi = (pi + pi.T) / 2.0
    complement = u[:, span_rank:]
    rng = np.random.default_rng(seed)
    coeffs = rng.standard_normal((base.n * model.n_reps, complement.shape[1]))
    noise = model.sigma * coeffs @ complement.T
    points = np.repeat(base.points, model.n_reps, axis=0) + noise
    labels = np.repeat(base.labels, model.n_reps)
    return LabeledDataset(points, labels), pi


def generate_demo3d(
    seed: int,
    n: int = 60,
    margin: float = 1.0,
    spread: float = 0.5,
    sigma: float = 1.25,
) -> tuple[LabeledDataset, np.ndarray]:
    """Two classes in R^3 split along a planted axis and mixed off it.

    Classes sit at axis coordinates +-(margin/2 + U[0, spread]) with isotropic
    Gaussian noise of scale ``sigma`` in the orthogonal plane. With the default
    numbers the off-axis variance dominates, so plain PCA's top component lands
    in the mixed plane while the labels are separated only along the axis.
    Returns (dataset, rank-1 projection onto the planted axis).
    """
    if n < 4:
        raise InvalidInput("need at least 4 points")
    rng = np.random.default_rng(seed)
    basis, _ = np.linalg.qr(rng.standard_normal((3, 3)))
    axis, plane = basis[:, 0], basis[:, 1:]
    n_pos = n // 2
    signs = np.concatenate([np.ones(n_pos), -np.ones(n - n_pos)])
    offsets = margin / 2.0 + rng.uniform(0.0, spread, size=n)
    mix = sigma * rng.standard_normal((n, 2))
    points = (signs * offsets)[:, None] * axis[None, :] + mix @ plane.T
    labels = (signs < 0).astype(np.int64)
    pi = np.outer(axis, axis)
    return LabeledDataset(points, labels), (pi + pi.T) / 2.0
