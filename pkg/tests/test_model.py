import numpy as np
import pytest

from maropt import problems
from maropt.errors import DimensionMismatch, NonFiniteEvaluation
from maropt.model import (
    EvaluationHandle,
    Geometry,
    ProblemSpec,
    Role,
    UncertainParamSpec,
    UncertaintySet,
    VariableSpec,
)


def test_sp1_hand_values(sp1):
    f, g = sp1.evaluate([0.5], [0.5], [0.0])
    assert f == pytest.approx([0.75, 0.5], abs=1e-12)
    assert g == pytest.approx([-0.3], abs=1e-12)


def test_evaluation_deterministic(sp1):
    a = sp1.evaluate([0.3], [0.7], [0.5])
    b = sp1.evaluate([0.3], [0.7], [0.5])
    assert np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])


def test_out_of_bounds_u_rejected_before_evaluation(sp1):
    calls = []
    spied = ProblemSpec(
        variables=sp1.variables,
        uncertainty=sp1.uncertainty,
        n_objectives=2,
        n_constraints=1,
        evaluator=EvaluationHandle(
            fn=lambda x, y, u: (calls.append(1), sp1.evaluator.fn(x, y, u))[1]
        ),
    )
    calls.clear()
    with pytest.raises(ValueError, match="uncertainty set"):
        spied.evaluate([0.5], [0.5], [2.0])
    assert calls == []


def test_out_of_bounds_variables_rejected(sp1):
    with pytest.raises(ValueError):
        sp1.evaluate([1.5], [0.5], [0.0])
    with pytest.raises(ValueError):
        sp1.evaluate([0.5], [-0.2], [0.0])


def test_dimension_mismatch(sp1):
    with pytest.raises(DimensionMismatch):
        sp1.evaluate([0.5, 0.1], [0.5], [0.0])


def test_non_finite_evaluation_raises_and_penalizes():
    def fn(x, y, u):
        val = np.nan if x[0] > 0.8 else x[0]
        return np.array([val, 1.0]), np.array([0.0])

    spec = ProblemSpec(
        variables=(
            VariableSpec("x", 0.0, 1.0, Role.HERE_AND_NOW, 0.5),
            VariableSpec("y", 0.0, 1.0, Role.WAIT_AND_SEE, 0.5),
        ),
        uncertainty=UncertaintySet(params=(UncertainParamSpec("u", -1, 1, 0),)),
        n_objectives=2,
        n_constraints=1,
        evaluator=EvaluationHandle(fn=fn),
    )
    with pytest.raises(NonFiniteEvaluation):
        spec.eval_raw([0.9], [0.5], [0.0])
    f, g, ok = spec.eval_penalized([0.9], [0.5], [0.0])
    assert not ok and f[0] == 1e10 and g[0] == 1e10


def test_gradient_analytic_sp1(sp1):
    # d f1 / d x at (1, 0, 0) is 2x = 2
    grad = sp1.gradient([1.0], [0.0], [0.0], "objective", 0, "x")
    assert grad == pytest.approx([2.0], abs=1e-5)


def test_gradient_constant_objective_is_zero():
    spec = ProblemSpec(
        variables=(
            VariableSpec("x", 0.0, 1.0, Role.HERE_AND_NOW, 0.5),
            VariableSpec("y", 0.0, 1.0, Role.WAIT_AND_SEE, 0.5),
        ),
        uncertainty=UncertaintySet(params=(UncertainParamSpec("u", -1, 1, 0),)),
        n_objectives=2,
        n_constraints=0,
        evaluator=EvaluationHandle(fn=lambda x, y, u: (np.array([3.0, x[0]]), np.zeros(0))),
    )
    grad = spec.gradient([0.4], [0.6], [0.0], "objective", 0, "x")
    assert grad == pytest.approx([0.0], abs=1e-7)


@pytest.mark.parametrize("builtin", ["sp1", "sp2", "column_surrogate"])
def test_analytic_vs_fd_gradients_100_points(builtin):
    spec = problems.build(builtin)
    rng = np.random.default_rng(7)
    worst = 0.0
    for _ in range(100):
        x = spec.x_lower + rng.random(spec.n_x) * (spec.x_upper - spec.x_lower)
        y = spec.y_lower + rng.random(spec.n_y) * (spec.y_upper - spec.y_lower)
        lo, hi = spec.uncertainty.lower, spec.uncertainty.upper
        u = lo + rng.random(spec.uncertainty.dim) * (hi - lo)
        analytic = spec.jacobian(x, y, u)
        fd = spec.fd_jacobian(x, y, u)
        for a, b in zip(analytic, fd):
            if a.size == 0:
                continue
            denom = np.maximum(np.abs(b), 1.0)
            worst = max(worst, float(np.max(np.abs(a - b) / denom)))
    assert worst < 1e-4


def test_variable_role_partition(sp1, sp2, column):
    for spec in (sp1, sp2, column):
        assert len(spec.hnv) + len(spec.wsv) == len(spec.variables)
        assert all(v.role in (Role.HERE_AND_NOW, Role.WAIT_AND_SEE)
                   for v in spec.variables)


def test_variable_spec_invariants():
    with pytest.raises(ValueError):
        VariableSpec("x", 1.0, 0.0, Role.HERE_AND_NOW, 0.5)
    with pytest.raises(ValueError):
        VariableSpec("x", 0.0, 1.0, Role.HERE_AND_NOW, 2.0)
    with pytest.raises(ValueError):
        UncertainParamSpec("u", 0.0, 1.0, 2.0)


def test_ellipsoid_set_validation():
    params = (UncertainParamSpec("a", -1, 1, 0), UncertainParamSpec("b", -1, 1, 0))
    s = UncertaintySet(params=params, geometry=Geometry.ELLIPSOID,
                       ellipsoid_center=(0, 0), ellipsoid_radii=(1, 0.5))
    assert s.contains(np.array([0.0, 0.5]))
    assert not s.contains(np.array([0.9, 0.4]))
    with pytest.raises(ValueError):
        UncertaintySet(params=params, geometry=Geometry.ELLIPSOID,
                       ellipsoid_center=(0, 0), ellipsoid_radii=(1, -1))
    with pytest.raises(ValueError):
        UncertaintySet(params=params, geometry=Geometry.ELLIPSOID,
                       ellipsoid_center=(5, 0), ellipsoid_radii=(1, 1))


def test_problem_needs_two_objectives_and_a_design_variable():
    with pytest.raises(ValueError, match="two objectives"):
        ProblemSpec(
            variables=(VariableSpec("x", 0, 1, Role.HERE_AND_NOW, 0.5),),
            uncertainty=UncertaintySet(params=(UncertainParamSpec("u", -1, 1, 0),)),
            n_objectives=1,
            n_constraints=0,
            evaluator=EvaluationHandle(fn=lambda x, y, u: (np.array([x[0]]), np.zeros(0))),
        )
    with pytest.raises(ValueError, match="here-and-now"):
        ProblemSpec(
            variables=(VariableSpec("y", 0, 1, Role.WAIT_AND_SEE, 0.5),),
            uncertainty=UncertaintySet(params=(UncertainParamSpec("u", -1, 1, 0),)),
            n_objectives=2,
            n_constraints=0,
            evaluator=EvaluationHandle(fn=lambda x, y, u: (np.array([y[0], 1.0]), np.zeros(0))),
        )
