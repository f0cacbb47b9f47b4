"""First-order solver: objectives, subgradients, feasibility, optima."""

import numpy as np
import pytest

from squeezefit import (
    Infeasible,
    LabeledDataset,
    SqueezeConfig,
    build_constraints_full,
    build_constraints_nn,
    hinge_objective,
    hinge_subgradient,
    solve,
    solve_hard,
    solve_hinge,
    solve_zero_plus,
)
from conftest import random_separated_instance


def test_two_point_wide_margin_closed_form(two_point):
    cons = build_constraints_full(two_point)
    result = solve_hard(cons, SqueezeConfig(delta=2.0))
    assert result.converged
    assert np.linalg.norm(result.matrix - np.diag([1.0, 0.0])) <= 1e-4
    assert abs(result.objective - 1.0) <= 1e-6


def test_two_point_narrow_margin_closed_form(two_point):
    # margin 1 against a length-2 difference: z M z >= 1 with z = (2, 0)
    # forces M_11 >= 1/4, and the trace objective stops exactly there
    cons = build_constraints_full(two_point)
    result = solve_hard(cons, SqueezeConfig(delta=1.0))
    assert abs(result.objective - 0.25) <= 1e-6
    assert np.linalg.norm(result.matrix - np.diag([0.25, 0.0])) <= 1e-4


def test_hard_solution_feasible_and_in_cone(rng):
    for seed in range(5):
        ds, delta = random_separated_instance(seed)
        cons = build_constraints_full(ds)
        result = solve_hard(cons, SqueezeConfig(delta=delta))
        eigs = np.linalg.eigvalsh(result.matrix)
        assert eigs.min() >= -1e-9
        assert eigs.max() <= 1.0 + 1e-9
        z = np.array([p.z for p in cons])
        margins = np.einsum("ij,jk,ik->i", z, result.matrix, z)
        assert margins.min() >= delta**2 - 1e-6 * max(1.0, delta**2)
        assert result.worst_violation <= 1e-6 * max(1.0, delta**2)


def test_infeasible_margin_raises(two_point):
    cons = build_constraints_full(two_point)
    with pytest.raises(Infeasible) as err:
        solve_hard(cons, SqueezeConfig(delta=3.0))
    assert err.value.min_distance == pytest.approx(2.0)


def test_hinge_objective_matches_direct_formula(rng):
    ds, delta = random_separated_instance(11)
    cons = build_constraints_full(ds)
    z = np.array([p.z for p in cons])
    m = np.eye(ds.dim) * 0.5
    lam = 0.7
    margins = np.einsum("ij,jk,ik->i", z, m, z)
    expected = np.trace(m) + lam * np.maximum(delta**2 - margins, 0.0).sum()
    assert abs(hinge_objective(m, cons, delta, lam) - expected) <= 1e-10


def test_hinge_subgradient_finite_difference(rng):
    # at a generic point no constraint sits exactly at the margin, so the
    # hinge objective is differentiable and the subgradient is the gradient
    ds, delta = random_separated_instance(13)
    cons = build_constraints_full(ds)
    base = rng.standard_normal((ds.dim, ds.dim))
    m = 0.25 * np.eye(ds.dim) + 0.01 * (base + base.T)
    lam = 0.9
    grad = hinge_subgradient(m, cons, delta, lam)
    eps = 1e-6
    for _ in range(6):
        direction = rng.standard_normal((ds.dim, ds.dim))
        direction = (direction + direction.T) / 2.0
        plus = hinge_objective(m + eps * direction, cons, delta, lam)
        minus = hinge_objective(m - eps * direction, cons, delta, lam)
        fd = (plus - minus) / (2.0 * eps)
        analytic = float(np.sum(grad * direction))
        assert abs(fd - analytic) <= 1e-4 * max(1.0, abs(fd))


def test_hinge_large_penalty_approaches_hard(two_point):
    cons = build_constraints_full(two_point)
    hard = solve_hard(cons, SqueezeConfig(delta=2.0))
    soft = solve_hinge(cons, SqueezeConfig(delta=2.0, mode="hinge", lam=100.0))
    assert np.linalg.norm(hard.matrix - soft.matrix) <= 1e-2


def test_hinge_small_penalty_prefers_zero(two_point):
    # with lam * |z|^2 < 1 the trace term dominates and M = 0 is optimal,
    # leaving the full hinge penalty lam * delta^2 as the objective
    cons = build_constraints_full(two_point)
    result = solve_hinge(cons, SqueezeConfig(delta=2.0, mode="hinge", lam=0.01))
    assert np.linalg.norm(result.matrix) <= 1e-6
    assert abs(result.objective) <= 1e-8
    assert abs(result.hinge_value - 0.01 * 4.0) <= 1e-8


def test_hinge_psd_cone_drops_upper_bound(rng):
    # on the psd cone the hinge trade-off can push eigenvalues above 1
    ds = LabeledDataset(
        np.array([[0.0, 0.0], [0.5, 0.0]]), np.array([0, 1], dtype=np.int64)
    )
    cons = build_constraints_full(ds)
    result = solve_hinge(
        cons, SqueezeConfig(delta=1.0, mode="hinge", lam=50.0), cone="psd"
    )
    top = np.linalg.eigvalsh(result.matrix).max()
    assert top > 1.0 + 1e-3
    boxed = solve_hinge(cons, SqueezeConfig(delta=1.0, mode="hinge", lam=50.0))
    assert np.linalg.eigvalsh(boxed.matrix).max() <= 1.0 + 1e-9


def test_zero_plus_single_constraint_closed_form():
    # minimize tr M s.t. z M z >= 1, M PSD has the rank-one optimum
    # z z^T / |z|^4: for z = (2, 0) the margin pins 4 M_11 >= 1 and
    # positive semidefiniteness then forces the off-diagonal to zero
    ds = LabeledDataset(
        np.array([[0.0, 0.0], [2.0, 0.0]]), np.array([0, 1], dtype=np.int64)
    )
    cons = build_constraints_full(ds)
    result = solve_zero_plus(cons, SqueezeConfig(mode="zero_plus"))
    assert np.linalg.norm(result.matrix - np.diag([0.25, 0.0])) <= 1e-4
    assert abs(result.objective - 0.25) <= 1e-6


def test_zero_plus_oblique_constraint_closed_form():
    ds = LabeledDataset(
        np.array([[0.0, 0.0], [1.0, 1.0]]), np.array([0, 1], dtype=np.int64)
    )
    cons = build_constraints_full(ds)
    result = solve_zero_plus(cons, SqueezeConfig(mode="zero_plus"))
    z = np.array([1.0, 1.0])
    expected = np.outer(z, z) / np.linalg.norm(z) ** 4
    assert np.linalg.norm(result.matrix - expected) <= 1e-4
    assert abs(result.objective - 0.5) <= 1e-6


def test_zero_plus_trace_scaling_law():
    # doubling the data divides the optimal trace by four
    for scale, expected in [(1.0, 0.25), (2.0, 0.0625)]:
        ds = LabeledDataset(
            scale * np.array([[0.0, 0.0], [2.0, 0.0]]),
            np.array([0, 1], dtype=np.int64),
        )
        cons = build_constraints_full(ds)
        result = solve_zero_plus(cons, SqueezeConfig(mode="zero_plus"))
        assert abs(result.objective - expected) <= 1e-6


def test_zero_plus_ignores_config_delta(two_point):
    cons = build_constraints_full(two_point)
    a = solve_zero_plus(cons, SqueezeConfig(mode="zero_plus", delta=7.0))
    b = solve_zero_plus(cons, SqueezeConfig(mode="zero_plus", delta=1.0))
    assert np.array_equal(a.matrix, b.matrix)


def test_dispatch_routes_modes(two_point):
    cons = build_constraints_full(two_point)
    hard = solve(cons, SqueezeConfig(delta=2.0, mode="hard"))
    hinge = solve(cons, SqueezeConfig(delta=2.0, mode="hinge", lam=100.0))
    assert np.linalg.norm(hard.matrix - hinge.matrix) <= 1e-2


def test_pruned_program_is_a_relaxation(rng):
    ds, delta = random_separated_instance(23)
    full = solve_hard(build_constraints_full(ds), SqueezeConfig(delta=delta))
    pruned = solve_hard(build_constraints_nn(ds, 2), SqueezeConfig(delta=delta))
    assert pruned.objective <= full.objective + 1e-6


def test_solver_deterministic(two_point):
    cons = build_constraints_full(two_point)
    a = solve_hard(cons, SqueezeConfig(delta=2.0, seed=5))
    b = solve_hard(cons, SqueezeConfig(delta=2.0, seed=5))
    assert np.array_equal(a.matrix, b.matrix)
    assert a.iterations == b.iterations


def test_history_records_progress(two_point):
    cons = build_constraints_full(two_point)
    result = solve_hard(cons, SqueezeConfig(delta=2.0))
    assert len(result.history) > 0
    values = np.array([entry[0] for entry in result.history])
    violations = np.array([entry[1] for entry in result.history])
    assert np.all(np.isfinite(values))
    assert np.all(violations >= -1e-12)


def test_config_validation():
    from squeezefit import InvalidInput

    with pytest.raises(InvalidInput):
        SqueezeConfig(delta=-1.0)
    with pytest.raises(InvalidInput):
        SqueezeConfig(mode="bogus")
