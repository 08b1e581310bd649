import numpy as np
import pytest

from maropt import nlp

from oracles import grid_nominal_ws


def quad_problem():
    return nlp.NlpProblem(
        lower=np.array([0.0]),
        upper=np.array([1.0]),
        objective=lambda z: float((z[0] - 0.3) ** 2),
        objective_grad=lambda z: np.array([2 * (z[0] - 0.3)]),
        name="quad",
    )


def test_unconstrained_quadratic():
    res = nlp.solve(quad_problem())
    assert res.status == "optimal"
    assert res.x[0] == pytest.approx(0.3, abs=1e-6)
    assert res.f == pytest.approx(0.0, abs=1e-9)


def test_active_inequality():
    problem = nlp.NlpProblem(
        lower=np.array([0.0]),
        upper=np.array([1.0]),
        objective=lambda z: float(z[0]),
        objective_grad=lambda z: np.array([1.0]),
        constraints=lambda z: np.array([0.7 - z[0]]),
        constraints_jac=lambda z: np.array([[-1.0]]),
        n_constraints=1,
        name="active",
    )
    res = nlp.solve(problem)
    assert res.status == "optimal"
    assert res.x[0] == pytest.approx(0.7, abs=1e-6)


def test_fd_fallback_matches_analytic():
    with_grad = nlp.solve(quad_problem())
    problem = quad_problem()
    problem.objective_grad = None
    without = nlp.solve(problem)
    assert without.x[0] == pytest.approx(with_grad.x[0], abs=1e-6)


def test_result_within_bounds_even_for_boundary_optimum():
    problem = nlp.NlpProblem(
        lower=np.array([0.0, 0.0]),
        upper=np.array([1.0, 1.0]),
        objective=lambda z: float(-z[0] - 2 * z[1]),
        objective_grad=lambda z: np.array([-1.0, -2.0]),
        name="corner",
    )
    res = nlp.solve(problem)
    assert np.all(res.x >= 0.0) and np.all(res.x <= 1.0)
    assert res.x == pytest.approx([1.0, 1.0], abs=1e-8)


def test_multistart_determinism():
    problem = nlp.NlpProblem(
        lower=np.array([-2.0, -2.0]),
        upper=np.array([2.0, 2.0]),
        # Two local minima; multistart should always pick the same one.
        objective=lambda z: float((z[0] ** 2 - 1) ** 2 + 0.1 * z[0] + z[1] ** 2),
        name="bistable",
    )
    a = nlp.solve(problem, seed=42)
    b = nlp.solve(problem, seed=42)
    assert np.array_equal(a.x, b.x)
    assert a.start_index == b.start_index
    assert a.f == pytest.approx(b.f, abs=0)


def test_infeasible_detected():
    problem = nlp.NlpProblem(
        lower=np.array([0.0]),
        upper=np.array([1.0]),
        objective=lambda z: float(z[0]),
        objective_grad=lambda z: np.array([1.0]),
        constraints=lambda z: np.array([2.0 - z[0]]),  # needs z >= 2, box ends at 1
        constraints_jac=lambda z: np.array([[-1.0]]),
        n_constraints=1,
        name="infeasible",
    )
    res = nlp.solve(problem)
    assert res.status == "infeasible"
    assert res.max_violation > 0.9


def test_violation_history_monotone_down_to_tolerance():
    """Outer-loop violations decrease monotonically until they reach the
    feasibility tolerance (sub-tolerance wiggle is solver noise)."""
    problem = nlp.NlpProblem(
        lower=np.array([0.0, 0.0]),
        upper=np.array([4.0, 4.0]),
        objective=lambda z: float(z[0] ** 2 + z[1] ** 2),
        objective_grad=lambda z: np.array([2 * z[0], 2 * z[1]]),
        constraints=lambda z: np.array([1.0 - z[0] - z[1], z[0] - 3.0]),
        constraints_jac=lambda z: np.array([[-1.0, -1.0], [1.0, 0.0]]),
        n_constraints=2,
        name="monotone",
    )
    res = nlp.solve(problem)
    assert res.status == "optimal"
    clipped = [max(v, 1e-6) for v in res.violation_history]
    assert all(b <= a + 1e-12 for a, b in zip(clipped, clipped[1:]))
    assert res.x == pytest.approx([0.5, 0.5], abs=1e-5)


def test_weighted_sum_matches_grid_oracle(sp1, sp1_ref):
    """Nominal weighted-sum solve against the dense-grid reference."""
    from maropt import robust

    oracle = grid_nominal_ws((1.0, 0.0))
    point = robust.solve_point(
        sp1, [sp1_ref.nominal], robust.ScalarizationSpec((1.0, 0.0)),
        robust.SolveMode.NOMINAL,
    )
    assert float(point.scalarization.vector @ point.objectives) == pytest.approx(
        oracle["value"], abs=1e-3
    )


def test_latin_hypercube_starts_deterministic():
    lower, upper = np.zeros(3), np.ones(3)
    a = nlp.latin_hypercube_starts(lower, upper, 4, seed=42)
    b = nlp.latin_hypercube_starts(lower, upper, 4, seed=42)
    assert all(np.array_equal(p, q) for p, q in zip(a, b))
    assert all(np.all(p >= 0) and np.all(p <= 1) for p in a)


def test_bounds_must_be_finite():
    with pytest.raises(ValueError, match="finite"):
        nlp.NlpProblem(
            lower=np.array([-np.inf]),
            upper=np.array([1.0]),
            objective=lambda z: 0.0,
        )
