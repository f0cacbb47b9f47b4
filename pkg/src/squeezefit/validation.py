"""Input validation helpers used across the package."""

from __future__ import annotations

import numpy as np

from .errors import InvalidInput

SYMMETRY_RTOL = 1e-12


def as_float_array(a, name: str = "array", ndim: int | None = None) -> np.ndarray:
    """Coerce to a float64 ndarray and reject non-finite entries."""
    arr = np.asarray(a, dtype=np.float64)
    if ndim is not None and arr.ndim != ndim:
        raise InvalidInput(f"{name} must be {ndim}-dimensional, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} contains non-finite entries")
    return arr


def check_square(a, name: str = "matrix") -> np.ndarray:
    arr = as_float_array(a, name, ndim=2)
    if arr.shape[0] != arr.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {arr.shape}")
    return arr


def check_symmetric(a, name: str = "matrix", rtol: float = SYMMETRY_RTOL) -> np.ndarray:
    """Validate symmetry to within ``rtol`` of the largest entry; return the
    exactly symmetrized copy ``(A + A.T) / 2``."""
    arr = check_square(a, name)
    scale = max(1.0, float(np.abs(arr).max(initial=0.0)))
    skew = float(np.abs(arr - arr.T).max(initial=0.0))
    if skew > rtol * scale:
        raise InvalidInput(
            f"{name} is not symmetric (max |A - A.T| = {skew:.3e}, scale {scale:.3e})"
        )
    return (arr + arr.T) / 2.0


def check_projection(p, name: str = "matrix", tol: float = 1e-6) -> np.ndarray:
    """Validate that ``p`` is (numerically) an orthogonal projection."""
    arr = check_symmetric(p, name, rtol=1e-8)
    drift = float(np.linalg.norm(arr @ arr - arr))
    if drift > tol * max(1.0, float(np.linalg.norm(arr))):
        raise InvalidInput(f"{name} is not idempotent (|P^2 - P|_F = {drift:.3e})")
    return arr


def check_points_labels(points, labels) -> tuple[np.ndarray, np.ndarray]:
    """Validate an (n, d) point array against an integer label vector."""
    pts = as_float_array(points, "points", ndim=2)
    lab = np.asarray(labels)
    if lab.ndim != 1:
        raise InvalidInput(f"labels must be one-dimensional, got shape {lab.shape}")
    if lab.shape[0] != pts.shape[0]:
        raise InvalidInput(
            f"points and labels disagree on n: {pts.shape[0]} vs {lab.shape[0]}"
        )
    if lab.size and not np.issubdtype(lab.dtype, np.integer):
        as_int = lab.astype(np.int64, copy=True)
        if not np.array_equal(as_int, lab):
            raise InvalidInput("labels must be integers")
        lab = as_int
    else:
        lab = lab.astype(np.int64, copy=False)
    return pts, lab


def check_positive(value: float, name: str) -> float:
    value = float(value)
    if not np.isfinite(value) or value <= 0:
        raise InvalidInput(f"{name} must be positive and finite, got {value!r}")
    return value


def check_in_open_unit_interval(value: float, name: str) -> float:
    value = float(value)
    if not (0.0 < value < 1.0):
        raise InvalidInput(f"{name} must lie strictly between 0 and 1, got {value!r}")
    return value
