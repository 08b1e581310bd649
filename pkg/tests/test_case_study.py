import numpy as np
import pytest

from maropt import adaptive, discretize, problems, robust
from maropt.robust import ScalarizationSpec, SolveMode


def test_sp1_hand_evaluation(sp1):
    f, g = sp1.evaluate([0.5], [0.5], [0.0])
    assert f == pytest.approx([0.75, 0.5], abs=1e-12)
    assert g == pytest.approx([-0.3], abs=1e-12)


def test_sp1_nominal_front_convex(sp1_bundle):
    """Discrete second differences of the sandwiched nominal front are
    non-negative (convex front)."""
    objs = sp1_bundle.nominal_front.objectives()
    x, y = objs[:, 0], objs[:, 1]
    slopes = np.diff(y) / np.diff(x)
    assert np.all(np.diff(slopes) >= -1e-6)


def test_sp2_constraint_corner(sp2, sp2_ref):
    out = adaptive.find_constraint_wc(sp2, np.array([0.98]), sp2_ref)
    assert [sp2_ref.by_id(c.scenario_id).values for c in out] == [(1.0, 1.0)]


def test_column_28_scenarios(column_ref):
    assert len(column_ref) == 28


def test_column_capex_ignores_adjustables_and_uncertainty(column, column_ref):
    rng = np.random.default_rng(3)
    x = column.x_initial
    base, _ = column.evaluate(x, column.y_initial, column.uncertainty.nominal)
    for _ in range(25):
        y = column.y_lower + rng.random(2) * (column.y_upper - column.y_lower)
        u = column.uncertainty.lower + rng.random(3) * (
            column.uncertainty.upper - column.uncertainty.lower
        )
        f, _ = column.evaluate(x, y, u)
        assert f[0] == base[0]


def test_column_opex_ignores_load(column):
    rng = np.random.default_rng(4)
    for _ in range(25):
        x = column.x_lower + rng.random(5) * (column.x_upper - column.x_lower)
        y = column.y_lower + rng.random(2) * (column.y_upper - column.y_lower)
        w, fac = 0.8, 1.0
        f_low, _ = column.evaluate(x, y, [0.6, w, fac])
        f_high, _ = column.evaluate(x, y, [1.2, w, fac])
        assert f_low[1] == f_high[1]


def test_column_purities_increase_with_stages_and_reflux(column):
    rng = np.random.default_rng(5)
    for _ in range(25):
        x = column.x_lower + rng.random(5) * (column.x_upper - column.x_lower)
        y = column.y_lower + rng.random(2) * (column.y_upper - column.y_lower)
        u = column.uncertainty.lower + rng.random(3) * (
            column.uncertainty.upper - column.uncertainty.lower
        )
        dfdx, dfdy, dgdx, dgdy = column.jacobian(x, y, u)
        # Constraints are (min - purity), so their derivatives must be
        # negative in stage count and reflux ratio.
        assert dgdx[0, 0] < 0 and dgdx[1, 0] < 0  # stages
        assert dgdy[0, 0] < 0 and dgdy[1, 0] < 0  # reflux


def test_column_capex_increases_in_named_design_variables(column):
    rng = np.random.default_rng(6)
    for _ in range(25):
        x = column.x_lower + rng.random(5) * (column.x_upper - column.x_lower)
        dfdx, _, _, _ = column.jacobian(x, column.y_initial,
                                        column.uncertainty.nominal)
        assert dfdx[0, 0] > 0  # stages
        assert dfdx[0, 2] > 0  # diameter
        assert dfdx[0, 3] > 0 and dfdx[0, 4] > 0  # exchanger areas


def test_column_opex_worst_case_has_max_factor_and_fraction(column, column_ref,
                                                            column_bundle):
    """At a mid-front robust design, the scenario maximizing the re-optimized
    operating cost has the highest activity factor and feed fraction."""
    mid = column_bundle.robust_front.points[len(column_bundle.robust_front) // 2]
    wc = adaptive.find_objective_wc(
        column, mid.solution.x, 1, column_ref, warm=mid.solution
    )
    values = column_ref.by_id(wc.scenario_id).values
    assert values[1] == 0.82 and values[2] == pytest.approx(1.1)


def test_column_capacity_corner_stresses_duty_and_vapor_limits(column, column_ref,
                                                               column_bundle):
    """Tightening the equipment below a robust design makes the high-load,
    high-factor, high-fraction corner the binding capacity case."""
    mid = column_bundle.robust_front.points[len(column_bundle.robust_front) // 2]
    x = mid.solution.x.copy()
    x[2] = max(0.8, x[2] * 0.82)   # shrink diameter
    x[3] = max(50.0, x[3] * 0.55)  # shrink reboiler exchanger
    x[4] = max(50.0, x[4] * 0.55)  # shrink condenser exchanger
    out = adaptive.find_constraint_wc(column, x, column_ref, warm=mid.solution)
    capacity = [c for c in out
                if {"reboiler_duty", "condenser_duty", "f_factor"} & set(c.families)]
    assert capacity, f"no capacity violations found in {out}"
    worst = max(capacity, key=lambda c: c.violation)
    values = column_ref.by_id(worst.scenario_id).values
    assert values == (1.2, 0.82, 1.1)


def test_column_bounds_respected_in_all_solves(column, column_bundle):
    for fr in (column_bundle.nominal_front, column_bundle.robust_front,
               column_bundle.mro_front):
        for p in fr.points:
            sol = p.solution
            assert np.all(sol.x >= column.x_lower - 1e-9)
            assert np.all(sol.x <= column.x_upper + 1e-9)
            for y in sol.y_by_scenario.values():
                assert np.all(y >= column.y_lower - 1e-9)
                assert np.all(y <= column.y_upper + 1e-9)


def test_builtin_registry():
    assert set(problems.BUILTIN_PROBLEMS) == {"sp1", "sp2", "column_surrogate"}
    with pytest.raises(KeyError):
        problems.build("nope")


def test_sp1_robust_and_nominal_design_coincide_at_min_f2_end(sp1_bundle):
    """The problem is constructed so that at the minimum-second-objective
    end the robust design equals the nominal-optimal design."""
    robust_x = sp1_bundle.robust_front.points[-1].solution.x
    nominal_x = sp1_bundle.nominal_front.points[-1].solution.x
    assert robust_x == pytest.approx(nominal_x, abs=1e-3)
