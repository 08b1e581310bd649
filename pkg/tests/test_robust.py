import numpy as np
import pytest

from maropt import robust
from maropt.errors import EmptyScenarioSet
from maropt.robust import ScalarizationSpec, SolveMode

from oracles import replicated_grid_lp


def test_scalarization_normalized():
    s = ScalarizationSpec((2.0, 2.0))
    assert s.weights == (0.5, 0.5)
    with pytest.raises(ValueError):
        ScalarizationSpec((0.0, 0.0))
    with pytest.raises(ValueError):
        ScalarizationSpec((-1.0, 2.0))


def test_replicated_dimensions(sp1, sp1_ref):
    w = ScalarizationSpec((0.5, 0.5))
    problem, layout, scen = robust.build_replicated(
        sp1, list(sp1_ref), w, SolveMode.ADJUSTABLE
    )
    # |x| + K*|y| + M epigraph variables
    assert layout.n == 1 + 3 * 1 + 2 == problem.n
    assert problem.n_constraints == 3 * (2 + 1)

    problem, layout, _ = robust.build_replicated(
        sp1, list(sp1_ref), w, SolveMode.NON_ADJUSTABLE
    )
    assert layout.n == 1 + 1 + 2


def test_replicated_dimensions_spec_example(column, column_ref):
    # 5 design + 6 scenarios x 2 adjustable + 2 epigraph = 19
    scen = list(column_ref)[:6]
    _, layout, _ = robust.build_replicated(
        column, scen, ScalarizationSpec((0.5, 0.5)), SolveMode.ADJUSTABLE
    )
    assert layout.n == 5 + 6 * 2 + 2 == 19
    _, layout, _ = robust.build_replicated(
        column, scen, ScalarizationSpec((0.5, 0.5)), SolveMode.NON_ADJUSTABLE
    )
    assert layout.n == 5 + 2 + 2 == 9


def test_empty_scenario_set(sp1):
    with pytest.raises(EmptyScenarioSet):
        robust.build_replicated(sp1, [], ScalarizationSpec((0.5, 0.5)),
                                SolveMode.ADJUSTABLE)


def test_nominal_mode_requires_nominal_scenario(sp1, sp1_ref):
    with pytest.raises(ValueError, match="nominal"):
        robust.build_replicated(
            sp1, [sp1_ref.scenarios[0]], ScalarizationSpec((0.5, 0.5)),
            SolveMode.NOMINAL,
        )


def test_nominal_single_scenario_epigraph_identity(sp1, sp1_ref):
    point = robust.solve_point(
        sp1, [sp1_ref.nominal], ScalarizationSpec((0.5, 0.5)), SolveMode.NOMINAL
    )
    sol = point.solution
    f, _ = sp1.evaluate(sol.x, sol.y_by_scenario[sp1_ref.nominal.id],
                        sp1_ref.nominal.vector)
    assert point.objectives == pytest.approx(f, abs=1e-10)


@pytest.mark.parametrize("weights", [(0.5, 0.5), (0.8, 0.2), (0.3, 0.7)])
def test_adjustable_solve_matches_lp_oracle(sp1, sp1_ref, weights):
    point = robust.solve_point(
        sp1, list(sp1_ref), ScalarizationSpec(weights), SolveMode.ADJUSTABLE
    )
    oracle = replicated_grid_lp(sp1, [s.vector for s in sp1_ref], weights)
    achieved = float(np.array(weights) @ point.objectives)
    assert achieved == pytest.approx(oracle["value"], abs=1e-4)


def test_non_adjustable_solve_matches_lp_oracle(sp1, sp1_ref):
    weights = (0.5, 0.5)
    point = robust.solve_point(
        sp1, list(sp1_ref), ScalarizationSpec(weights), SolveMode.NON_ADJUSTABLE
    )
    oracle = replicated_grid_lp(sp1, [s.vector for s in sp1_ref], weights,
                                shared_y=True)
    achieved = float(np.array(weights) @ point.objectives)
    assert achieved == pytest.approx(oracle["value"], abs=1e-4)
    ys = list(point.solution.y_by_scenario.values())
    assert all(np.array_equal(ys[0], y) for y in ys)


def test_epigraph_tightness_and_active_worst_case(sp1, sp1_ref):
    point = robust.solve_point(
        sp1, list(sp1_ref), ScalarizationSpec((0.5, 0.5)), SolveMode.ADJUSTABLE
    )
    sol = point.solution
    for j in range(2):
        attained = sol.f_matrix[j].max()
        assert sol.t[j] == pytest.approx(attained, abs=1e-8)
        k = sol.scenario_ids.index(sol.active_wc_objective[j])
        assert sol.f_matrix[j, k] == pytest.approx(attained, abs=1e-10)


def test_mode_ordering_scalarized(sp1, sp1_ref):
    for weights in [(0.5, 0.5), (0.75, 0.25), (0.25, 0.75)]:
        w = np.array(weights)
        values = {}
        for mode, scen in [
            (SolveMode.NOMINAL, [sp1_ref.nominal]),
            (SolveMode.ADJUSTABLE, list(sp1_ref)),
            (SolveMode.NON_ADJUSTABLE, list(sp1_ref)),
        ]:
            p = robust.solve_point(sp1, scen, ScalarizationSpec(weights), mode)
            values[mode] = float(w @ p.objectives)
        assert values[SolveMode.NOMINAL] <= values[SolveMode.ADJUSTABLE] + 1e-6
        assert values[SolveMode.ADJUSTABLE] <= values[SolveMode.NON_ADJUSTABLE] + 1e-6


def test_adding_scenario_never_improves(sp1, sp1_ref):
    w = ScalarizationSpec((0.5, 0.5))
    small = robust.solve_point(sp1, [sp1_ref.nominal], w, SolveMode.ADJUSTABLE)
    full = robust.solve_point(sp1, list(sp1_ref), w, SolveMode.ADJUSTABLE)
    assert float(w.vector @ small.objectives) <= float(w.vector @ full.objectives) + 1e-8


def test_solution_json_round_trip(sp1, sp1_ref):
    point = robust.solve_point(
        sp1, list(sp1_ref), ScalarizationSpec((0.5, 0.5)), SolveMode.ADJUSTABLE
    )
    data = point.to_json()
    again = robust.ParetoPoint.from_json(data)
    assert again.to_json() == data
    assert np.array_equal(again.objectives, point.objectives)
