"""Projected-subgradient solvers for the margin semidefinite programs.

The constrained ("hard") program is

    minimize    tr(M)
    subject to  z^T M z >= delta^2   for every stored cross-class difference z,
                0 <= M <= I          (PSD order),

and the hinge relaxation trades the constraints for the penalty
``lam * sum_z max(0, delta^2 - z^T M z)``, which is always feasible and robust
to unseparable pairs.

:func:`solve_hinge` runs projected subgradient descent on the penalized
objective. :func:`solve_hard` wraps it in a lam-doubling homotopy until the
iterate is feasible, then polishes: a rescale that makes the smallest
quadratic form exactly delta^2; on small instances a structure polish that
snaps near-{0,1} eigenvalues and re-tightens the active constraints, a
primal-dual saddle endgame that stops on a certified duality gap, and a
stationarity-guided refinement — subgradient iterates alone stall around
1e-3 accuracy, which is not enough for downstream certificates.
:func:`solve_zero_plus` is the same homotopy over the PSD cone without the
identity cap, margin fixed at 1.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .constraints import ConstraintSet
from .errors import Infeasible, InvalidInput
from .spectral import eig_sym
from .validation import check_positive

LAMBDA_MAX = float(2**20)
CONVERGENCE_WINDOW = 50
STRUCTURE_POLISH_MAX_DIM = 64
STRUCTURE_POLISH_MAX_TIGHT = 800
SADDLE_MAX_CONSTRAINTS = 4096
SADDLE_MAX_ITERS = 20000
SADDLE_PROBE_INTERVAL = 50

_MODES = ("hard", "hinge", "zero_plus")
_STEPS = ("polyak", "diminishing")


@dataclass(frozen=True)
class SqueezeConfig:
    """Knobs for one solve. ``lam`` is the hinge weight (and the homotopy's
    starting value in the constrained modes)."""

    delta: float = 1.0
    mode: str = "hard"
    lam: float = 1.0
    max_iters: int = 20000
    tol_obj: float = 1e-6
    tol_feas: float = 1e-6
    step: str = "polyak"
    step_scale: float = 1.0
    seed: int = 0

    def __post_init__(self):
        if self.mode not in _MODES:
            raise InvalidInput(f"mode must be one of {_MODES}, got {self.mode!r}")
        if self.step not in _STEPS:
            raise InvalidInput(f"step must be one of {_STEPS}, got {self.step!r}")
        check_positive(self.delta, "delta")
        check_positive(self.lam, "lam")
        check_positive(self.step_scale, "step_scale")
        check_positive(self.tol_obj, "tol_obj")
        check_positive(self.tol_feas, "tol_feas")
        if int(self.max_iters) < 1:
            raise InvalidInput("max_iters must be >= 1")


@dataclass
class SqueezeResult:
    """Outcome of a solve. ``objective`` is tr(M); ``hinge_value`` is the
    penalty part lam * sum max(0, delta^2 - z^T M z) at the returned matrix;
    ``history`` records (penalized objective, worst violation) per iteration."""

    matrix: np.ndarray
    objective: float
    worst_violation: float
    hinge_value: float
    iterations: int
    converged: bool
    history: list[tuple[float, float]] = field(default_factory=list)


def _as_zmat(constraints) -> np.ndarray:
    if isinstance(constraints, ConstraintSet):
        return constraints.z
    z = np.asarray(constraints, dtype=np.float64)
    if z.ndim != 2:
        raise InvalidInput(f"constraints must be an (m, d) array, got {z.shape}")
    return z


def _quad_forms(zmat: np.ndarray, m: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", zmat @ m, zmat)


def _violation(zmat: np.ndarray, m: np.ndarray, delta2: float) -> float:
    if zmat.shape[0] == 0:
        return 0.0
    return float(max(0.0, delta2 - _quad_forms(zmat, m).min()))


def hinge_objective(m, constraints, delta: float, lam: float) -> float:
    """tr(M) + lam * sum_z max(0, delta^2 - z^T M z)."""
    zmat = _as_zmat(constraints)
    m = np.asarray(m, dtype=np.float64)
    penalty = 0.0
    if zmat.shape[0]:
        gaps = np.maximum(0.0, delta**2 - _quad_forms(zmat, m))
        penalty = float(lam * gaps.sum())
    return float(np.trace(m)) + penalty


def hinge_subgradient(m, constraints, delta: float, lam: float) -> np.ndarray:
    """A subgradient of the penalized objective at M.

    Strictly violated constraints contribute ``-lam * z z^T``; ties at exactly
    delta^2 contribute zero (a valid subgradient choice that keeps feasible
    iterates from being dragged around).
    """
    zmat = _as_zmat(constraints)
    m = np.asarray(m, dtype=np.float64)
    grad = np.eye(m.shape[0])
    if zmat.shape[0]:
        violated = _quad_forms(zmat, m) < delta**2
        if np.any(violated):
            zv = zmat[violated]
            grad -= lam * (zv.T @ zv)
    return (grad + grad.T) / 2.0


def _project_cone(m: np.ndarray, box: bool) -> np.ndarray:
    vals, vecs = np.linalg.eigh(m)
    clipped = np.clip(vals, 0.0, 1.0) if box else np.maximum(vals, 0.0)
    out = (vecs * clipped) @ vecs.T
    return (out + out.T) / 2.0


@dataclass
class _DescentOutcome:
    best_matrix: np.ndarray
    best_value: float
    feasible_matrix: np.ndarray | None
    feasible_trace: float
    iterations: int
    converged: bool


def _descend(
    zmat: np.ndarray,
    delta2: float,
    lam: float,
    box: bool,
    config: SqueezeConfig,
    m0: np.ndarray,
    history: list[tuple[float, float]],
    iterate_hook=None,
) -> _DescentOutcome:
    """Projected subgradient loop; returns the best iterate seen.

    Tracks two incumbents: the best penalized objective, and separately the
    best trace among iterates already feasible to ``tol_feas`` (what the
    homotopy actually wants).
    """
    d = m0.shape[0]
    m = _project_cone(m0, box)
    eye = np.eye(d)
    feas_tol = config.tol_feas * delta2

    best_value = np.inf
    best_matrix = m.copy()
    feasible_trace = np.inf
    feasible_matrix: np.ndarray | None = None
    best_trail: list[float] = []

    # Adaptive target level for the polyak rule: aim target_gap below the
    # incumbent, halving the gap whenever progress at that level stalls.
    target_gap = None
    stall = 0
    converged = False
    iterations = 0

    for k in range(1, int(config.max_iters) + 1):
        iterations = k
        quads = _quad_forms(zmat, m)
        gaps = delta2 - quads
        worst = float(max(0.0, gaps.max()))
        value = float(np.trace(m) + lam * np.clip(gaps, 0.0, None).sum())
        history.append((value, worst))
        if iterate_hook is not None:
            iterate_hook(m)

        if value < best_value - 1e-15:
            if target_gap is None or best_value - value >= target_gap / 8.0:
                stall = 0
            else:
                stall += 1
            best_value = value
            best_matrix = m.copy()
        else:
            stall += 1
        if worst <= feas_tol:
            trace = float(np.trace(m))
            if trace < feasible_trace:
                feasible_trace = trace
                feasible_matrix = m.copy()
        best_trail.append(best_value)

        if k > CONVERGENCE_WINDOW:
            prev = best_trail[-1 - CONVERGENCE_WINDOW]
            window_flat = prev - best_value <= config.tol_obj * max(
                1.0, abs(best_value)
            )
            gap_done = config.step == "diminishing" or (
                target_gap is not None
                and target_gap <= max(config.tol_obj * abs(best_value), 1e-13)
            )
            if window_flat and gap_done:
                converged = True
                break

        violated = gaps > 0.0
        grad = eye.copy()
        if np.any(violated):
            zv = zmat[violated]
            grad -= lam * (zv.T @ zv)
        gnorm2 = float((grad * grad).sum())
        if gnorm2 <= 1e-300:
            converged = True
            break

        if config.step == "diminishing":
            t = config.step_scale / (np.sqrt(k) * max(1.0, np.sqrt(gnorm2)))
        else:
            if target_gap is None:
                target_gap = max(0.1 * abs(best_value), 1e-3)
            if stall >= 30:
                target_gap = max(target_gap / 2.0, 1e-15 * max(1.0, abs(best_value)))
                stall = 0
            t = (value - (best_value - target_gap)) / gnorm2
        m = _project_cone(m - t * grad, box)

    return _DescentOutcome(
        best_matrix, best_value, feasible_matrix, feasible_trace, iterations, converged
    )


def _initial_matrix(zmat: np.ndarray, delta2: float, d: int) -> np.ndarray:
    if zmat.shape[0] == 0:
        return np.zeros((d, d))
    med = float(np.median(np.einsum("ij,ij->i", zmat, zmat)))
    scale = 1.0 if med <= 0 else min(1.0, delta2 / med)
    return scale * np.eye(d)


def _rescale_to_margin(
    m: np.ndarray, zmat: np.ndarray, delta2: float, box: bool
) -> np.ndarray:
    """Scale M so the smallest quadratic form is exactly delta^2.

    Scaling down always helps the trace; scaling up restores feasibility and is
    capped by re-projection in the box mode (in which case the better of the
    two iterates is kept by the caller's final comparison).
    """
    quads = _quad_forms(zmat, m)
    smallest = float(quads.min())
    if smallest <= 0.0:
        return m
    factor = delta2 / smallest
    scaled = factor * m
    if box and factor > 1.0:
        top = float(np.linalg.eigvalsh(scaled).max())
        if top > 1.0 + 1e-12:
            scaled = _project_cone(scaled, box=True)
    return scaled


def _lift_to_margin(
    m: np.ndarray, zmat: np.ndarray, delta2: float
) -> np.ndarray | None:
    """Smallest inflation of ``m`` that meets the margin without leaving the box.

    Scaling a slightly-infeasible iterate up to the margin pushes unit
    eigenvalues just past one, which disqualifies it as an exactly-feasible
    incumbent. This walks the capped path clamp((1+s) m) instead: eigenvalues
    are clamped into [0, 1] by construction and every quadratic form is
    nondecreasing in s (the eigenbasis is fixed), so bisection pins the exact
    touching point. Returns None when even large inflation cannot reach the
    margin (the short constraint lives in the saturated eigenspace).
    """
    vals, vecs = np.linalg.eigh((m + m.T) / 2.0)
    vals = np.clip(vals, 0.0, 1.0)
    weights = (zmat @ vecs) ** 2

    def min_quad(s: float) -> float:
        return float((weights @ np.minimum((1.0 + s) * vals, 1.0)).min())

    if min_quad(0.0) >= delta2:
        return (vecs * vals) @ vecs.T
    hi = 1e-12
    while min_quad(hi) < delta2:
        hi *= 8.0
        if hi > 1e9:
            return None
    lo = 0.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if min_quad(mid) >= delta2:
            hi = mid
        else:
            lo = mid
    lifted = (vecs * np.minimum((1.0 + hi) * vals, 1.0)) @ vecs.T
    return (lifted + lifted.T) / 2.0


def _structure_polish(
    m: np.ndarray,
    zmat: np.ndarray,
    delta2: float,
    box: bool,
    band: float = 5e-3,
    snap_tol: float = 0.02,
    rounds: int = 80,
) -> np.ndarray:
    """Snap near-{0,1} eigenvalue clusters and re-tighten active constraints.

    Alternates an eigenvalue snap with the exact minimum-norm correction that
    restores equality on the conjectured tight set. Converges to the exact
    optimizer when the active structure guessed from the subgradient iterate is
    right; the caller keeps the result only if it stays feasible and does not
    raise the trace.
    """
    quads = _quad_forms(zmat, m)
    rel = np.abs(quads - delta2) / delta2
    tight = np.flatnonzero(rel <= band)
    if not 1 <= tight.size <= STRUCTURE_POLISH_MAX_TIGHT:
        return m
    zt = zmat[tight]
    gram = (zt @ zt.T) ** 2
    try:
        gram_pinv = np.linalg.pinv(gram, rcond=1e-12)
    except np.linalg.LinAlgError:
        return m
    current = m.copy()
    for _ in range(rounds):
        vals, vecs = np.linalg.eigh(current)
        if box:
            vals[vals >= 1.0 - snap_tol] = 1.0
        vals[np.abs(vals) <= snap_tol] = 0.0
        vals = np.clip(vals, 0.0, 1.0 if box else np.inf)
        snapped = (vecs * vals) @ vecs.T
        snapped = (snapped + snapped.T) / 2.0
        residual = delta2 - _quad_forms(zt, snapped)
        coeff = gram_pinv @ residual
        current = snapped + np.einsum("k,ki,kj->ij", coeff, zt, zt)
        current = (current + current.T) / 2.0
        if float(np.abs(residual).max()) < 1e-14 and np.allclose(
            snapped, current, atol=1e-14
        ):
            break
    return current


def _cone_excursion(m: np.ndarray, box: bool) -> float:
    """How far the eigenvalues stray outside [0, 1] (or [0, inf))."""
    eigs = np.linalg.eigvalsh(m)
    if eigs.size == 0:
        return 0.0
    out = max(0.0, -float(eigs[0]))
    if box:
        out = max(out, float(eigs[-1]) - 1.0)
    return out


def _fit_dual(
    m: np.ndarray,
    zmat: np.ndarray,
    take: np.ndarray,
    box: bool,
    band: float,
) -> tuple[np.ndarray, np.ndarray] | None:
    """Least-squares dual variables for the stationarity equation at ``m``.

    Returns (gamma over ``take``, Y) with gamma >= 0 from nonnegative least
    squares and Y supported on the near-unit eigenspace (empty unless box).
    """
    from scipy.optimize import nnls

    d = m.shape[0]
    zt = zmat[take]
    vals, vecs = np.linalg.eigh(m)
    root = (vecs * np.sqrt(np.clip(vals, 0.0, None))) @ vecs.T
    unit = vecs[:, vals >= 1.0 - band] if box else vecs[:, :0]
    e = unit.shape[1]
    rows, cols = np.triu_indices(d)
    weights = np.where(rows == cols, 1.0, np.sqrt(2.0))
    w = zt @ root
    columns = [np.outer(wk, wk)[rows, cols] * weights for wk in w]
    y_basis = []
    for a in range(e):
        for b in range(a, e):
            basis = np.outer(unit[:, a], unit[:, b])
            basis = (basis + basis.T) / (2.0 if a != b else 1.0)
            y_basis.append(basis)
            vec = basis[rows, cols] * weights
            columns.append(-vec)
            columns.append(vec)
    try:
        sol, _ = nnls(np.column_stack(columns), m[rows, cols] * weights)
    except RuntimeError:
        return None
    gamma = sol[: take.size]
    y_mat = np.zeros((d, d))
    for j, basis in enumerate(y_basis):
        y_mat += (sol[take.size + 2 * j] - sol[take.size + 2 * j + 1]) * basis
    return gamma, (y_mat + y_mat.T) / 2.0


def _saddle_refine(
    m0: np.ndarray,
    zmat: np.ndarray,
    delta2: float,
    box: bool,
    max_iters: int = SADDLE_MAX_ITERS,
    rel_gap: float = 1e-10,
) -> tuple[np.ndarray | None, int]:
    """Primal-dual hybrid gradient endgame with a certified duality gap.

    The subgradient homotopy above lands within about 1e-2..1e-3 of the
    optimum but then crawls on the flat valley floor. This pass runs the
    Chambolle-Pock primal-dual iteration on the saddle formulation

        min_{0<=M<=I} max_{gamma>=0}  tr M + sum_k gamma_k (delta^2 - z_k' M z_k)

    warm-started at the incumbent. Constraints are rescaled to unit length
    (z -> z/|z| with thresholds delta^2/|z|^2), which equilibrates the linear
    operator and is what makes ill-scaled instances converge. Every probe
    interval the dual iterate is turned into an exact dual value

        sum_k gamma_k delta_k^2 - sum_i max(lambda_i(sum_k gamma_k z z') - 1, 0)

    (any gamma >= 0 is dual-feasible once the identity-cap multiplier absorbs
    the eigenvalue overshoot), and the primal iterate is rescaled onto the
    margin; the loop stops when the exactly-feasible incumbent is within
    ``rel_gap`` of that certified lower bound. Returns ``None`` when no
    feasible incumbent was captured, alongside iterations spent.
    """
    d = zmat.shape[1]
    norms2 = np.einsum("ij,ij->i", zmat, zmat)
    if norms2.min(initial=np.inf) <= 0.0:
        return None, 0
    zn = zmat / np.sqrt(norms2)[:, None]
    rhs = delta2 / norms2

    # Power iteration for the operator norm of M -> (z_k' M z_k)_k.
    rng = np.random.default_rng(0)
    probe = rng.normal(size=(d, d))
    probe = (probe + probe.T) / 2.0
    norm_sq = 0.0
    for _ in range(30):
        quads = np.einsum("ki,ij,kj->k", zn, probe, zn)
        back = np.einsum("k,ki,kj->ij", quads, zn, zn)
        back = (back + back.T) / 2.0
        norm_sq = float(np.linalg.norm(back))
        if norm_sq <= 1e-300:
            return None, 0
        probe = back / norm_sq
    step = 1.0 / np.sqrt(norm_sq)

    m = _project_cone(m0, box)
    m_bar = m.copy()
    gamma = np.zeros(zmat.shape[0])
    eye = np.eye(d)
    best_trace = np.inf
    best: np.ndarray | None = None
    bound = -np.inf
    eps_cone = 64.0 * np.finfo(np.float64).eps
    feas_tol = eps_cone * delta2
    for k in range(1, int(max_iters) + 1):
        quads = np.einsum("ki,ij,kj->k", zn, m_bar, zn)
        gamma = np.maximum(0.0, gamma + step * (rhs - quads))
        pull = np.einsum("k,ki,kj->ij", gamma, zn, zn)
        pull = (pull + pull.T) / 2.0
        m_next = _project_cone(m - step * (eye - pull), box)
        m_bar = 2.0 * m_next - m
        m = m_next
        if k % SADDLE_PROBE_INTERVAL == 0 or k == max_iters:
            top = np.linalg.eigvalsh(pull)
            dual_value = float(
                rhs @ gamma - np.clip(top - 1.0, 0.0, None).sum()
            )
            bound = max(bound, dual_value)
            incumbent = _rescale_to_margin(m, zmat, delta2, box)
            excursion = _cone_excursion(incumbent, box)
            if box and excursion > eps_cone:
                # Upscaling past the cap left eigenvalues above one; redo the
                # inflation along the capped path instead.
                lifted = _lift_to_margin(m, zmat, delta2)
                if lifted is not None:
                    incumbent = _rescale_to_margin(lifted, zmat, delta2, box)
                    excursion = _cone_excursion(incumbent, box)
            if (
                _violation(zmat, incumbent, delta2) <= feas_tol
                and excursion <= eps_cone
            ):
                trace = float(np.trace(incumbent))
                if trace < best_trace:
                    best_trace = trace
                    best = incumbent
            if best is not None and best_trace - bound <= rel_gap * max(
                1.0, abs(best_trace)
            ):
                return best, k
    return best, int(max_iters)


def _kkt_polish(
    m: np.ndarray,
    zmat: np.ndarray,
    delta2: float,
    box: bool,
    band: float = 1e-3,
    rounds: int = 8,
) -> np.ndarray:
    """Stationarity-guided refinement toward the exact optimizer.

    The structure polish above only reaches optima whose eigenvalues sit at
    {0, 1}; generic instances have fractional spectra. This pass alternates
    (i) fitting multipliers gamma >= 0 (plus a fixed-space cap term) to the
    stationarity equation by nonnegative least squares, (ii) reading the
    optimal rank space off the near-null eigenvectors of the dual slack
    S = I + Y - sum gamma z z^T, and (iii) re-solving the tight constraints
    exactly within that rank space. Near a strictly complementary optimum the
    conjectured structure locks in and the iteration collapses to the exact
    KKT point; when the conjecture is wrong the output simply loses the
    caller's candidate comparison.
    """
    d = zmat.shape[1]
    current = m.copy()
    for _ in range(rounds):
        quads = _quad_forms(zmat, current)
        rel = np.abs(quads - delta2) / delta2
        tight = np.flatnonzero(rel <= band)
        if not 1 <= tight.size <= STRUCTURE_POLISH_MAX_TIGHT:
            return current
        zt = zmat[tight]
        fit = _fit_dual(current, zmat, tight, box, band)
        if fit is None:
            return current
        gamma, y_mat = fit
        slack = np.eye(d) + y_mat - np.einsum("k,ki,kj->ij", gamma, zt, zt)
        slack = (slack + slack.T) / 2.0
        s_vals, s_vecs = np.linalg.eigh(slack)
        s_tol = 1e-2 * max(1.0, float(s_vals.max(initial=0.0)))
        rank_basis = s_vecs[:, s_vals <= s_tol]
        if rank_basis.shape[1] == 0:
            return current
        zr = zt @ rank_basis
        r_rows, r_cols = np.triu_indices(rank_basis.shape[1])
        r_weights = np.where(r_rows == r_cols, 1.0, np.sqrt(2.0))
        a_x = np.stack(
            [np.outer(zk, zk)[r_rows, r_cols] * r_weights for zk in zr]
        )
        x0 = rank_basis.T @ current @ rank_basis
        x0_vec = x0[r_rows, r_cols] * r_weights
        correction = np.linalg.pinv(a_x, rcond=1e-12) @ (
            delta2 - a_x @ x0_vec
        )
        x_vec = x0_vec + correction
        x_mat = np.zeros_like(x0)
        x_mat[r_rows, r_cols] = x_vec / r_weights
        x_mat.T[r_rows, r_cols] = x_vec / r_weights
        x_vals, x_vecs = np.linalg.eigh(x_mat)
        x_vals = np.clip(x_vals, 0.0, 1.0 if box else None)
        lifted = rank_basis @ ((x_vecs * x_vals) @ x_vecs.T) @ rank_basis.T
        lifted = (lifted + lifted.T) / 2.0
        if float(np.linalg.norm(lifted - current)) <= 1e-14:
            current = lifted
            break
        current = lifted

    # Final exact re-tightening in the span of the tight outer products.
    quads = _quad_forms(zmat, current)
    rel = np.abs(quads - delta2) / delta2
    tight = np.flatnonzero(rel <= band)
    if 1 <= tight.size <= STRUCTURE_POLISH_MAX_TIGHT:
        zt = zmat[tight]
        gram = (zt @ zt.T) ** 2
        coeff = np.linalg.pinv(gram, rcond=1e-12) @ (
            delta2 - _quad_forms(zt, current)
        )
        current = current + np.einsum("k,ki,kj->ij", coeff, zt, zt)
        current = (current + current.T) / 2.0
    return current


def _pick_better(
    candidates: list[np.ndarray],
    zmat: np.ndarray,
    delta2: float,
    feas_tol: float,
    cone_tol: float,
    box: bool,
) -> np.ndarray:
    """Prefer exactly-feasible iterates, then tol-feasible ones, then by trace.

    Exact feasibility (margin met up to round-off, eigenvalues inside the
    cone) outranks a marginally smaller trace from a sub-margin iterate:
    downstream certificates need the tight constraints to actually touch the
    margin. Candidates whose eigenvalues leave the cone beyond tolerance (the
    polish step can produce these when its active-set conjecture is wrong)
    drop to the worst tier regardless of trace.
    """
    strict_tol = 64.0 * np.finfo(np.float64).eps * delta2
    eps_cone = 64.0 * np.finfo(np.float64).eps

    def key(m: np.ndarray):
        viol = _violation(zmat, m, delta2)
        cone = _cone_excursion(m, box)
        if viol <= strict_tol and cone <= eps_cone:
            tier = 0
        elif viol <= feas_tol and cone <= cone_tol:
            tier = 1
        else:
            tier = 2
        return (tier, float(np.trace(m)) if tier < 2 else max(viol, cone))

    return min(candidates, key=key)


def _empty_result(d: int) -> SqueezeResult:
    zero = np.zeros((d, d))
    return SqueezeResult(zero, 0.0, 0.0, 0.0, 1, True, [(0.0, 0.0)])


def _finish(
    m: np.ndarray,
    zmat: np.ndarray,
    delta2: float,
    lam: float,
    iterations: int,
    converged: bool,
    history: list[tuple[float, float]],
) -> SqueezeResult:
    worst = _violation(zmat, m, delta2)
    gaps = np.maximum(0.0, delta2 - _quad_forms(zmat, m)) if zmat.shape[0] else 0.0
    return SqueezeResult(
        matrix=m,
        objective=float(np.trace(m)),
        worst_violation=worst,
        hinge_value=float(lam * np.sum(gaps)),
        iterations=iterations,
        converged=converged,
        history=history,
    )


def solve_hinge(constraints, config: SqueezeConfig, cone: str = "box") -> SqueezeResult:
    """Minimize the hinge-penalized objective at fixed ``config.lam``.

    ``cone="box"`` keeps 0 <= M <= I; ``cone="psd"`` drops the identity cap,
    which with ``delta=1`` is the penalized variant of the uncapped program.
    """
    if cone not in ("box", "psd"):
        raise InvalidInput(f"cone must be 'box' or 'psd', got {cone!r}")
    zmat = _as_zmat(constraints)
    d = zmat.shape[1]
    if zmat.shape[0] == 0:
        return _empty_result(d)
    delta2 = config.delta**2
    box = cone == "box"
    history: list[tuple[float, float]] = []
    outcome = _descend(
        zmat,
        delta2,
        config.lam,
        box,
        config,
        _initial_matrix(zmat, delta2, d),
        history,
    )
    return _finish(
        outcome.best_matrix,
        zmat,
        delta2,
        config.lam,
        outcome.iterations,
        outcome.converged,
        history,
    )


def _solve_constrained(constraints, config: SqueezeConfig, box: bool) -> SqueezeResult:
    zmat = _as_zmat(constraints)
    d = zmat.shape[1]
    delta2 = config.delta**2
    if zmat.shape[0] == 0:
        return _empty_result(d)

    if box:
        norms2 = np.einsum("ij,ij->i", zmat, zmat)
        shortest2 = float(norms2.min())
        if delta2 > shortest2 * (1.0 + 1e-12):
            raise Infeasible(config.delta, float(np.sqrt(shortest2)))

    history: list[tuple[float, float]] = []
    feas_tol = config.tol_feas * delta2
    lam = config.lam
    m = _initial_matrix(zmat, delta2, d)
    iterations = 0
    converged = False
    best_feasible: np.ndarray | None = None
    best_feasible_trace = np.inf
    while True:
        outcome = _descend(zmat, delta2, lam, box, config, m, history)
        iterations += outcome.iterations
        converged = outcome.converged
        if (
            outcome.feasible_matrix is not None
            and outcome.feasible_trace < best_feasible_trace
        ):
            best_feasible = outcome.feasible_matrix
            best_feasible_trace = outcome.feasible_trace
        m = outcome.best_matrix
        # lam is large enough once the unconstrained-best iterate itself meets
        # the margin; before that the hinge minimum undercuts the hard program.
        if _violation(zmat, m, delta2) <= feas_tol:
            break
        lam *= 2.0
        if lam > LAMBDA_MAX:
            break

    cone_tol = config.tol_feas
    candidates = []
    for cand in (best_feasible, outcome.best_matrix):
        if cand is None:
            continue
        candidates.append(cand)
        candidates.append(_rescale_to_margin(cand, zmat, delta2, box))
    leader = _pick_better(candidates, zmat, delta2, feas_tol, cone_tol, box)

    if d <= STRUCTURE_POLISH_MAX_DIM:

        def improve(base: np.ndarray, cand: np.ndarray | None) -> np.ndarray:
            if cand is None:
                return base
            return _pick_better(
                [base, cand, _rescale_to_margin(cand, zmat, delta2, box)],
                zmat,
                delta2,
                feas_tol,
                cone_tol,
                box,
            )

        leader = improve(leader, _structure_polish(leader, zmat, delta2, box))
        for kkt_band in (1e-3, 1e-2):
            leader = improve(
                leader, _kkt_polish(leader, zmat, delta2, box, band=kkt_band)
            )

        if zmat.shape[0] <= SADDLE_MAX_CONSTRAINTS:
            refined, spent = _saddle_refine(leader, zmat, delta2, box)
            iterations += spent
            leader = improve(leader, refined)
            # From a gap-certified point the active set read off the
            # near-tight constraints is the true one, so the stationarity
            # polish can lock in the exact KKT matrix.
            for kkt_band in (1e-5, 1e-3):
                leader = improve(
                    leader, _kkt_polish(leader, zmat, delta2, box, band=kkt_band)
                )
        candidates.append(leader)

    final = _pick_better(candidates, zmat, delta2, feas_tol, cone_tol, box)
    excursion = _cone_excursion(final, box)
    if 0.0 < excursion <= 1e-9:
        # Round-off-level strays are clipped; the quadratic forms move by at
        # most the excursion times the largest squared constraint length.
        final = _project_cone(final, box)
    if _violation(zmat, final, delta2) > feas_tol:
        raise Infeasible(config.delta)
    return _finish(final, zmat, delta2, lam, iterations, converged, history)


def solve_hard(constraints, config: SqueezeConfig) -> SqueezeResult:
    """Solve the constrained program via the lam-doubling homotopy + polish.

    Raises :class:`Infeasible` when delta exceeds the shortest cross-class
    distance (no metric below the identity can meet the margin) or when the
    homotopy runs out of lam budget without reaching feasibility.
    """
    return _solve_constrained(constraints, config, box=True)


def solve_zero_plus(constraints, config: SqueezeConfig) -> SqueezeResult:
    """Constrained solve over the PSD cone (no identity cap), margin fixed at 1.

    ``config.delta`` is ignored by construction; pass the margin through the
    data scaling instead.
    """
    effective = SqueezeConfig(
        delta=1.0,
        mode="zero_plus",
        lam=config.lam,
        max_iters=config.max_iters,
        tol_obj=config.tol_obj,
        tol_feas=config.tol_feas,
        step=config.step,
        step_scale=config.step_scale,
        seed=config.seed,
    )
    return _solve_constrained(constraints, effective, box=False)


def solve(constraints, config: SqueezeConfig) -> SqueezeResult:
    """Dispatch on ``config.mode``."""
    if config.mode == "hard":
        return solve_hard(constraints, config)
    if config.mode == "hinge":
        return solve_hinge(constraints, config)
    return solve_zero_plus(constraints, config)
