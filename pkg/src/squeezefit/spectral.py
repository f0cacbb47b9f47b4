"""Dense symmetric eigen-calculus: decompositions, cone projections, rounding.

Everything here works on plain float64 ndarrays at desk scale (dimension up to
a few hundred); there is no sparse path.
"""

from __future__ import annotations

from typing import NamedTuple

import numpy as np

from .errors import InvalidInput, NotPsd
from .validation import check_in_open_unit_interval, check_projection, check_symmetric


class EigenDecomposition(NamedTuple):
    """Eigenvalues in descending order with matching eigenvector columns."""

    eigenvalues: np.ndarray
    eigenvectors: np.ndarray


def eig_sym(a) -> EigenDecomposition:
    """Full eigendecomposition of a symmetric matrix.

    The eigenvalues come back in descending order. Each eigenvector is signed
    so that its largest-magnitude component is positive, which makes the
    decomposition deterministic across runs.
    """
    arr = check_symmetric(a)
    vals, vecs = np.linalg.eigh(arr)
    vals = vals[::-1].copy()
    vecs = vecs[:, ::-1].copy()
    anchors = np.abs(vecs).argmax(axis=0)
    signs = np.sign(vecs[anchors, np.arange(vecs.shape[1])])
    signs[signs == 0] = 1.0
    vecs *= signs
    return EigenDecomposition(vals, vecs)


def _assemble(vals: np.ndarray, vecs: np.ndarray) -> np.ndarray:
    m = (vecs * vals) @ vecs.T
    return (m + m.T) / 2.0


def project_spectahedron(a) -> np.ndarray:
    """Nearest (Frobenius) matrix with eigenvalues in [0, 1]."""
    decomp = eig_sym(a)
    return _assemble(np.clip(decomp.eigenvalues, 0.0, 1.0), decomp.eigenvectors)


def project_psd(a) -> np.ndarray:
    """Nearest (Frobenius) positive-semidefinite matrix."""
    decomp = eig_sym(a)
    return _assemble(np.maximum(decomp.eigenvalues, 0.0), decomp.eigenvectors)


def psd_sqrt(a, tol: float = 1e-6) -> np.ndarray:
    """Symmetric square root of a PSD matrix.

    Slightly negative eigenvalues (round-off) are clamped to zero; eigenvalues
    below ``-tol`` (scaled by the spectral radius) raise :class:`NotPsd`.
    """
    decomp = eig_sym(a)
    vals = decomp.eigenvalues
    scale = max(1.0, float(np.abs(vals).max(initial=0.0)))
    if vals.size and vals.min() < -tol * scale:
        raise NotPsd(f"matrix has eigenvalue {vals.min():.6e} below -{tol:g} * scale")
    return _assemble(np.sqrt(np.maximum(vals, 0.0)), decomp.eigenvectors)


def rank_round(m, threshold: float) -> tuple[int, np.ndarray]:
    """Round a PSD matrix to the projection onto its dominant eigenspace.

    Returns ``(rank, P)`` where rank counts eigenvalues strictly above
    ``threshold`` and P projects onto the span of their eigenvectors.
    """
    check_in_open_unit_interval(threshold, "threshold")
    decomp = eig_sym(m)
    rank = int(np.count_nonzero(decomp.eigenvalues > threshold))
    basis = decomp.eigenvectors[:, :rank]
    p = basis @ basis.T
    return rank, (p + p.T) / 2.0


def projection_distance(p, q) -> tuple[float, float]:
    """Distance between two orthogonal projections.

    Returns ``(frobenius, max_angle_deg)``. The angle is the largest principal
    angle between the two column spaces, computed from the singular values of
    the cross-Gram of their eigenbases. Conventions for degenerate ranks: two
    zero projections are at angle 0; a zero projection against a nonzero one is
    at angle 90.
    """
    p = check_projection(p, "p")
    q = check_projection(q, "q")
    if p.shape != q.shape:
        raise InvalidInput(f"projections must match in shape: {p.shape} vs {q.shape}")
    frob = float(np.linalg.norm(p - q))
    basis_p = eig_sym(p).eigenvectors[:, : _projection_rank(p)]
    basis_q = eig_sym(q).eigenvectors[:, : _projection_rank(q)]
    rp, rq = basis_p.shape[1], basis_q.shape[1]
    if rp == 0 and rq == 0:
        return frob, 0.0
    if rp == 0 or rq == 0:
        return frob, 90.0
    sigma = np.linalg.svd(basis_p.T @ basis_q, compute_uv=False)
    k = min(rp, rq)
    smallest = float(np.clip(sigma[k - 1], -1.0, 1.0))
    angle = float(np.degrees(np.arccos(smallest)))
    return frob, angle


def _projection_rank(p: np.ndarray) -> int:
    return int(np.count_nonzero(eig_sym(p).eigenvalues > 0.5))
