import numpy as np
import pytest

from maropt import adaptive, front as front_mod, problems, robust
from maropt.adaptive import WcScenarioSet
from maropt.discretize import ReferenceDiscretization, Scenario
from maropt.model import (
    EvaluationHandle,
    Geometry,
    ProblemSpec,
    Role,
    UncertainParamSpec,
    UncertaintySet,
    VariableSpec,
)
from maropt.robust import ScalarizationSpec, SolveMode

from oracles import replicated_lp_at_x


def inner_min_oracle(spec, x, j, u, n=4001):
    """Dense-grid minimum of one objective over the adjustable variable."""
    ys = np.linspace(0.0, 1.0, n)
    best = np.inf
    for y in ys:
        f, g = spec.eval_raw(np.atleast_1d(x), np.array([y]), np.atleast_1d(u))
        if spec.n_constraints and float(np.max(g)) > 1e-9:
            continue
        best = min(best, float(f[j]))
    return best


def test_find_objective_wc_matches_enumeration(sp1, sp1_ref):
    x_star = np.array([0.5])
    for j in range(2):
        wc = adaptive.find_objective_wc(sp1, x_star, j, sp1_ref)
        oracle_vals = {s.id: inner_min_oracle(sp1, 0.5, j, s.values[0])
                       for s in sp1_ref}
        best = min(oracle_vals, key=lambda i: (-oracle_vals[i], i))
        assert wc.scenario_id == best
        assert wc.value == pytest.approx(oracle_vals[best], abs=1e-5)
        for sid, v in wc.per_scenario.items():
            assert v == pytest.approx(oracle_vals[sid], abs=1e-5)


def test_find_objective_wc_no_wsv_is_direct_evaluation():
    spec = problems.build_sp1_no_wsv(y_fixed=0.5)
    ref = __import__("maropt").discretize.generate(spec.uncertainty)
    x_star = np.array([0.3])
    wc = adaptive.find_objective_wc(spec, x_star, 0, ref)
    direct = {s.id: float(spec.eval_raw(x_star, np.zeros(0), s.vector)[0][0])
              for s in ref}
    best = min(direct, key=lambda i: (-direct[i], i))
    assert wc.scenario_id == best
    assert wc.value == pytest.approx(direct[best], abs=1e-12)


def test_find_objective_wc_single_scenario(sp1, sp1_ref):
    one = ReferenceDiscretization(
        scenarios=(Scenario(0, sp1_ref.nominal.values, True, "nominal"),),
        geometry=Geometry.BOX,
    )
    wc = adaptive.find_objective_wc(sp1, np.array([0.5]), 0, one)
    assert wc.scenario_id == 0


def test_find_constraint_wc_feasible_design_empty(sp1, sp1_ref):
    # Any design admits feasible adjustments in every scenario of sp1.
    out = adaptive.find_constraint_wc(sp1, np.array([0.5]), sp1_ref)
    assert out == []


def test_find_constraint_wc_sp2_corner(sp2, sp2_ref):
    """For tight designs the (+1, +1) corner is the unique scenario without
    any feasible adjustment."""
    out = adaptive.find_constraint_wc(sp2, np.array([0.98]), sp2_ref)
    assert len(out) == 1
    corner = out[0]
    assert sp2_ref.by_id(corner.scenario_id).values == (1.0, 1.0)
    assert "capacity" in corner.families
    # Reported violation equals the inner optimum: min over y of the worst
    # constraint, which for x=0.98 at the corner is x + 0.05 - 1.
    assert corner.violation == pytest.approx(0.98 + 0.05 - 1.0, abs=1e-6)


def test_constraint_wc_enumeration_oracle(sp2, sp2_ref):
    x_star = np.array([0.98])
    out = adaptive.find_constraint_wc(sp2, x_star, sp2_ref)
    # Dense-grid inner min-max per scenario.
    for s in sp2_ref:
        ys = np.linspace(0, 1, 2001)
        vals = []
        for y in ys:
            _, g = sp2.eval_raw(x_star, np.array([y]), s.vector)
            vals.append(float(np.max(g)))
        opt = min(vals)
        if opt > 1e-6:
            assert any(c.scenario_id == s.id for c in out)
            rep = next(c for c in out if c.scenario_id == s.id)
            assert rep.violation == pytest.approx(opt, abs=1e-5)
        else:
            assert all(c.scenario_id != s.id for c in out)


def test_adaptive_point_matches_all_scenario(sp1, sp1_ref):
    w = ScalarizationSpec((0.5, 0.5))
    point, trace, wc = adaptive.solve_adaptive_point(sp1, sp1_ref, w)
    full = robust.solve_point(sp1, list(sp1_ref), w, SolveMode.ADJUSTABLE)
    assert point.objectives == pytest.approx(full.objectives, abs=1e-4)
    assert len(wc.ids) < len(sp1_ref)
    assert trace.terminated_reason == "no_new_scenarios"


def test_adaptive_with_full_initial_set_does_one_master(sp1, sp1_ref):
    initial = WcScenarioSet(
        ids=tuple(s.id for s in sp1_ref),
        provenance={s.id: "initial" for s in sp1_ref},
    )
    point, trace, wc = adaptive.solve_adaptive_point(
        sp1, sp1_ref, ScalarizationSpec((0.5, 0.5)), initial=initial
    )
    assert trace.master_solves == 1
    assert len(trace.iterations) == 1
    assert trace.iterations[0].added == []


def test_uncertainty_independent_problem_stays_at_initial():
    def fn(x, y, u):
        return np.array([x[0] ** 2 + y[0], (1 - x[0]) ** 2 - y[0] + 1.0]), np.array(
            [y[0] - 0.8]
        )

    def jac(x, y, u):
        return (np.array([[2 * x[0]], [-2 * (1 - x[0])]]),
                np.array([[1.0], [-1.0]]),
                np.array([[0.0]]), np.array([[1.0]]))

    spec = ProblemSpec(
        variables=(
            VariableSpec("x", 0.0, 1.0, Role.HERE_AND_NOW, 0.5),
            VariableSpec("y", 0.0, 1.0, Role.WAIT_AND_SEE, 0.5),
        ),
        uncertainty=UncertaintySet(params=(UncertainParamSpec("u", -1, 1, 0),)),
        n_objectives=2,
        n_constraints=1,
        evaluator=EvaluationHandle(fn=fn, jac=jac),
        name="u_free",
    )
    ref = __import__("maropt").discretize.generate(spec.uncertainty)
    point, trace, wc = adaptive.solve_adaptive_point(
        spec, ref, ScalarizationSpec((0.5, 0.5))
    )
    assert wc.ids == (ref.nominal.id,)
    assert trace.terminated_reason == "no_new_scenarios"


def test_termination_bounded_by_reference_size(sp2, sp2_ref):
    point, trace, wc = adaptive.solve_adaptive_point(
        sp2, sp2_ref, ScalarizationSpec((0.5, 0.5))
    )
    assert len(trace.iterations) <= len(sp2_ref)
    assert trace.terminated_reason == "no_new_scenarios"
    # Scenario set grows strictly between refinement iterations.
    sizes = [len(it.scenario_ids) for it in trace.iterations]
    assert all(b > a for a, b in zip(sizes, sizes[1:]))


def blankenship_falk_certificate(spec, reference, point, tol=1e-6):
    """Full reference sweep at the final design: no scenario may beat any
    epigraph value or admit a residual constraint violation."""
    for j in range(spec.n_objectives):
        wc = adaptive.find_objective_wc(
            spec, point.solution.x, j, reference, warm=point.solution,
            mode=point.solution.mode,
        )
        assert wc.value <= point.objectives[j] + tol, (
            f"objective {j}: scenario {wc.scenario_id} attains {wc.value} "
            f"> {point.objectives[j]} + {tol}"
        )
    for cw in adaptive.find_constraint_wc(
        spec, point.solution.x, reference, warm=point.solution,
        mode=point.solution.mode,
    ):
        raise AssertionError(
            f"scenario {cw.scenario_id} still violates {cw.families} by {cw.violation}"
        )


def test_certificate_at_adaptive_points(sp1, sp1_ref, sp2, sp2_ref):
    for spec, ref in ((sp1, sp1_ref), (sp2, sp2_ref)):
        for weights in [(1.0, 0.0), (0.5, 0.5), (0.0, 1.0)]:
            point, _, _ = adaptive.solve_adaptive_point(
                spec, ref, ScalarizationSpec(weights)
            )
            blankenship_falk_certificate(spec, ref, point)


def test_adaptive_front_equals_all_scenario_front(sp1_adaptive_run, sp1_all_scenario):
    diff = front_mod.compare_fronts(sp1_adaptive_run.front,
                                    sp1_all_scenario.front)
    assert diff <= 1e-4


def test_warm_started_points_need_at_most_one_refinement(sp1_bundle):
    # After the extreme compromises, the scenario-set union makes later
    # weighted-sum solves terminate without (or with at most one) addition.
    later = sp1_bundle.traces[4:]
    assert later, "expected traces for the interior schedule points"
    for trace in later:
        assert len(trace.iterations) <= 2  # at most one refinement alternation


def test_wc_union_economy(sp1_bundle, sp1_ref):
    identified = sp1_bundle.wc_union.identified_ids
    assert len(identified) <= 0.5 * len(sp1_ref)


def test_wc_set_union_and_provenance(sp1_ref):
    a = WcScenarioSet.initial(sp1_ref)
    b = a.with_added(2, "objective:f1")
    assert b.ids == (1, 2)
    assert b.provenance[2] == "objective:f1"
    c = b.with_added(2, "objective:f2")  # first reason wins
    assert c.provenance[2] == "objective:f1"
    d = WcScenarioSet(ids=(0,), provenance={0: "constraint:g1"})
    assert b.union(d).ids == (0, 1, 2)
    assert b.union(d).identified_ids == (0, 2)
