"""Geometric diagnostics for margin programs and planted-model experiments.

Contact vectors (the shortest cross-class differences), margin-fixedness of a
dataset, the squeeze-once property (re-solving on squeezed data returns the
span projection), the signal-to-noise ratio of a planted instance, recovery
error against a planted projection, and Monte Carlo estimation of the
statistical dimension of the noise cones.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .constraints import ConstraintSet, DifferencePair, build_constraints_full
from .data import LabeledDataset
from .duality import CertificateReport, certify
from .errors import DegenerateContacts, Inconclusive, InvalidInput, NoConstraints
from .solver import SqueezeConfig, solve_hard
from .spectral import projection_distance, psd_sqrt, rank_round
from .validation import check_positive, check_projection, check_symmetric

LENGTH_RTOL = 1e-9
FIXED_POINT_TOL = 1e-5
PROJECTION_DEFECT_TOL = 1e-2
TRACE_MATCH_RTOL = 1e-3
EIG_FLOOR_RTOL = 1e-10
STAT_DIM_MIN_TRIALS = 100
DYKSTRA_MAX_SWEEPS = 10000
DYKSTRA_RESIDUAL_TOL = 1e-8
DYKSTRA_CHUNK = 512

SolveFn = Callable[[LabeledDataset, float], np.ndarray]


def _default_solve(ds: LabeledDataset, delta: float) -> np.ndarray:
    constraints = build_constraints_full(ds)
    return solve_hard(constraints, SqueezeConfig(delta=delta)).matrix


def _certified_matrix(
    ds: LabeledDataset, delta: float, solve: SolveFn | None, stage: str
) -> tuple[np.ndarray, CertificateReport]:
    matrix = (solve or _default_solve)(ds, delta)
    report = certify(ds, matrix, delta)
    if not report.certified:
        raise Inconclusive(
            f"{stage} solve was not certified (verdict {report.verdict!r}); "
            "the diagnostic would be checked against a possibly suboptimal matrix"
        )
    return matrix, report


def contact_vectors(
    constraints: ConstraintSet, rel_tol: float = LENGTH_RTOL
) -> list[DifferencePair]:
    """All stored pairs whose difference length ties the minimum.

    One representative per unordered pair is returned (the programs only see
    z through z z^T, so -z carries no extra information); ties are resolved
    within ``rel_tol`` relative to the shortest length.
    """
    if len(constraints) == 0:
        raise NoConstraints("no cross-class pairs to take contacts from")
    if rel_tol < 0.0:
        raise InvalidInput(f"rel_tol must be >= 0, got {rel_tol}")
    lengths = np.linalg.norm(constraints.z, axis=1)
    shortest = float(lengths.min())
    keep = np.flatnonzero(lengths <= shortest * (1.0 + rel_tol))
    return [constraints[int(k)] for k in keep]


def lambda_min_nonzero(contacts) -> float:
    """Smallest nonzero eigenvalue of the contact Gram sum.

    Each unordered contact representative z contributes ``2 z z^T`` (the
    underlying symmetric set contains both signs). Eigenvalues at or below
    ``1e-10`` times the largest are treated as zero.
    """
    vectors = [c.z if isinstance(c, DifferencePair) else np.asarray(c) for c in contacts]
    if not vectors:
        raise DegenerateContacts("no contact vectors supplied")
    zmat = np.asarray(vectors, dtype=np.float64)
    if zmat.ndim != 2:
        raise InvalidInput(f"contacts must share one dimension, got shape {zmat.shape}")
    gram = 2.0 * zmat.T @ zmat
    eigs = np.linalg.eigvalsh((gram + gram.T) / 2.0)
    top = float(eigs.max(initial=0.0))
    if top <= 0.0:
        raise DegenerateContacts("all contact vectors are numerically zero")
    nonzero = eigs[eigs > EIG_FLOOR_RTOL * top]
    return float(nonzero.min())


def snr(lambda_min: float, r: int, sigma_sq: float) -> float:
    """Signal per planted dimension over noise per ambient dimension.

    ``lambda_min / (2 r sigma_sq)`` with ``lambda_min`` the smallest nonzero
    eigenvalue of the contact Gram sum over the planted base.
    """
    check_positive(lambda_min, "lambda_min")
    check_positive(sigma_sq, "sigma_sq")
    r = int(r)
    if r < 1:
        raise InvalidInput(f"r must be >= 1, got {r}")
    return float(lambda_min) / (2.0 * r * float(sigma_sq))


def is_delta_fixed(
    ds: LabeledDataset, delta: float, solve: SolveFn | None = None
) -> tuple[bool, np.ndarray]:
    """Whether a certified optimizer fixes every data point.

    Returns ``(flag, M)`` where flag is true iff ``||M x_i - x_i|| <=
    1e-5 * max(1, ||x_i||)`` for all i — equivalent to ``M^{1/2} x_i = x_i``
    for 0 <= M <= I, without forming the square root. ``solve`` maps
    ``(dataset, delta)`` to a metric matrix; the default solves the hard
    margin program on the full constraint set. Raises :class:`Inconclusive`
    when the solve does not certify.
    """
    check_positive(delta, "delta")
    matrix, _ = _certified_matrix(ds, delta, solve, "margin")
    residual = ds.points @ matrix - ds.points
    norms = np.maximum(1.0, np.linalg.norm(ds.points, axis=1))
    flag = bool((np.linalg.norm(residual, axis=1) <= FIXED_POINT_TOL * norms).all())
    return flag, matrix


@dataclass(frozen=True)
class SqueezeOnceReport:
    """Outcome of :func:`squeeze_once_check`.

    ``projection_defect`` is the Frobenius distance between the re-solve's
    optimizer and the orthogonal projection onto the span of the squeezed
    points; the squeeze-once property holds when it is small. Traces of both
    optimizers are recorded; they are asserted equal (``traces_match``) only
    when the first optimizer is itself a projection — otherwise the second
    solve may legitimately move to the span projection's larger trace.
    """

    matrix: np.ndarray
    squeezed_matrix: np.ndarray
    span_projection: np.ndarray
    projection_defect: float
    trace_first: float
    trace_second: float
    first_is_projection: bool
    traces_match: bool | None
    passed: bool


def squeeze_once_check(
    ds: LabeledDataset,
    delta: float,
    solve: SolveFn | None = None,
    proj_tol: float = PROJECTION_DEFECT_TOL,
    trace_rtol: float = TRACE_MATCH_RTOL,
) -> SqueezeOnceReport:
    """Verify that squeezing squeezed data changes nothing essential.

    Solves on ``ds`` for M, forms the squeezed dataset ``M^{1/2} x_i``,
    re-solves for N, and checks N against the orthogonal projection onto the
    span of the squeezed points (Frobenius distance at most ``proj_tol``).
    Both solves must certify, else :class:`Inconclusive`.
    """
    check_positive(delta, "delta")
    matrix, _ = _certified_matrix(ds, delta, solve, "first")
    root = psd_sqrt(matrix)
    squeezed = LabeledDataset(ds.points @ root, ds.labels)
    second, _ = _certified_matrix(squeezed, delta, solve, "second")

    _, svals, vt = np.linalg.svd(squeezed.points, full_matrices=False)
    top = float(svals.max(initial=0.0))
    # Directions below 1e-6 of the top singular value are square roots of
    # eigenvalue round-off in the first optimizer, not data: a direction that
    # small contributes under 1e-12 of any squared margin, so no certified
    # re-solve can need it and it is not part of the span to reproduce.
    basis = vt[svals > top * 1e-6].T
    span_proj = basis @ basis.T
    span_proj = (span_proj + span_proj.T) / 2.0

    defect = float(np.linalg.norm(second - span_proj))
    trace_first = float(np.trace(matrix))
    trace_second = float(np.trace(second))
    is_proj = bool(np.linalg.norm(matrix @ matrix - matrix) <= 1e-6 * matrix.shape[0])
    traces_match: bool | None = None
    if is_proj:
        traces_match = bool(
            abs(trace_second - trace_first) <= trace_rtol * max(1.0, abs(trace_first))
        )
    passed = defect <= proj_tol and traces_match is not False
    return SqueezeOnceReport(
        matrix=matrix,
        squeezed_matrix=second,
        span_projection=span_proj,
        projection_defect=defect,
        trace_first=trace_first,
        trace_second=trace_second,
        first_is_projection=is_proj,
        traces_match=traces_match,
        passed=passed,
    )


class RecoveryReport(NamedTuple):
    """Distance between a rounded solve and the planted projection."""

    frobenius: float
    angle: float
    rank_match: bool


def recovery_report(matrix, pi_true, threshold: float = 0.5) -> RecoveryReport:
    """Round ``matrix`` to a projection and compare it to the planted one.

    ``rank_match`` states that the rounded rank equals the planted rank;
    ``frobenius`` and ``angle`` come from :func:`projection_distance` on the
    rounded projection.
    """
    matrix = check_symmetric(matrix)
    pi_true = check_projection(pi_true, "pi_true")
    rank, rounded = rank_round(matrix, threshold)
    frobenius, angle = projection_distance(rounded, pi_true)
    planted_rank = int(round(float(np.trace(pi_true))))
    return RecoveryReport(
        frobenius=frobenius, angle=angle, rank_match=rank == planted_rank
    )


@dataclass(frozen=True)
class ConeSpec:
    """A noise cone for statistical-dimension estimation.

    ``orthant`` is the nonnegative orthant of R^n. ``capped_orthant`` adds the
    per-coordinate cap ``v_i <= c1 sqrt(log n)/n * sum(v)``; when that
    multiplier reaches 1 the cap is implied by nonnegativity and the cone
    degenerates to the plain orthant (the estimator takes the exact fast path
    in that regime).
    """

    kind: str
    n: int
    c1: float = 50.0

    def __post_init__(self):
        if self.kind not in ("orthant", "capped_orthant"):
            raise InvalidInput(
                f"kind must be 'orthant' or 'capped_orthant', got {self.kind!r}"
            )
        if int(self.n) < 1:
            raise InvalidInput(f"n must be >= 1, got {self.n}")
        object.__setattr__(self, "n", int(self.n))
        check_positive(self.c1, "c1")

    @property
    def cap_multiplier(self) -> float:
        """The cap coefficient ``c1 sqrt(log n)/n`` (meaningful when < 1)."""
        return float(self.c1 * np.sqrt(np.log(self.n)) / self.n)


class StatDimEstimate(NamedTuple):
    """Monte Carlo statistical-dimension estimate with its standard error.

    ``reliable`` is false when the projection iteration hit its sweep cap
    before reaching the residual target on some sample.
    """

    estimate: float
    stderr: float
    reliable: bool


def _project_capped_batch(g: np.ndarray, kappa: float) -> tuple[np.ndarray, bool]:
    """Dykstra projection of each row of g onto the capped orthant.

    Alternates over the 2n halfspaces {v_i >= 0} and {v_i <= kappa * sum(v)}
    with per-halfspace corrections. Returns ``(projected, converged)``.
    """
    batch, n = g.shape
    v = g.copy()
    corr_pos = np.zeros((n, batch))  # corrections live on coordinate i only
    corr_cap = np.zeros((n, batch))  # cap corrections are multiples of a_i
    a_norm2 = (1.0 - kappa) ** 2 + (n - 1) * kappa**2
    if a_norm2 <= 0.0:  # kappa == 1 with n == 1: cap is vacuous
        return np.maximum(g, 0.0), True
    scale = max(1.0, float(np.abs(g).max(initial=0.0)))
    for _ in range(DYKSTRA_MAX_SWEEPS):
        previous = v.copy()
        for i in range(n):
            shifted = v[:, i] + corr_pos[i]
            clamped = np.maximum(shifted, 0.0)
            corr_pos[i] = shifted - clamped
            v[:, i] = clamped
        for i in range(n):
            # a_i = e_i - kappa * 1; shift by the stored multiple of a_i
            v[:, i] += corr_cap[i]
            v -= (kappa * corr_cap[i])[:, None]
            overshoot = np.maximum(v[:, i] - kappa * v.sum(axis=1), 0.0) / a_norm2
            v[:, i] -= overshoot
            v += (kappa * overshoot)[:, None]
            corr_cap[i] = overshoot
        change = float(np.abs(v - previous).max(initial=0.0))
        neg = float(np.maximum(-v, 0.0).max(initial=0.0))
        cap_violation = float(
            np.maximum(v - kappa * v.sum(axis=1)[:, None], 0.0).max(initial=0.0)
        )
        if max(change, neg, cap_violation) <= DYKSTRA_RESIDUAL_TOL * scale:
            return v, True
    return v, False


def estimate_stat_dim(cone: ConeSpec, trials: int, seed: int = 0) -> StatDimEstimate:
    """Monte Carlo estimate of the statistical dimension of ``cone``.

    Uses the projection identity ``delta(C) = E ||Pi_C g||^2`` over standard
    Gaussian g (equivalent to the sup-form definition for closed convex
    cones). Orthant projection is exact coordinate clamping; the capped
    orthant is projected by Dykstra sweeps over its 2n halfspaces unless the
    cap multiplier is >= 1, in which case the cone equals the orthant.
    """
    trials = int(trials)
    if trials < STAT_DIM_MIN_TRIALS:
        raise InvalidInput(f"trials must be >= {STAT_DIM_MIN_TRIALS}, got {trials}")
    rng = np.random.default_rng(seed)
    n = cone.n
    exact = cone.kind == "orthant" or cone.cap_multiplier >= 1.0
    samples = np.empty(trials)
    reliable = True
    done = 0
    while done < trials:
        batch = min(DYKSTRA_CHUNK, trials - done) if not exact else trials - done
        g = rng.standard_normal((batch, n))
        if exact:
            projected = np.maximum(g, 0.0)
        else:
            projected, converged = _project_capped_batch(g, cone.cap_multiplier)
            reliable = reliable and converged
        samples[done : done + batch] = np.einsum("ij,ij->i", projected, projected)
        done += batch
    estimate = float(samples.mean())
    stderr = float(samples.std(ddof=1) / np.sqrt(trials))
    return StatDimEstimate(estimate=estimate, stderr=stderr, reliable=reliable)
