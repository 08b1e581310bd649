"""Adaptive worst-case scenario selection.

Instead of replicating every reference scenario at once, alternate between
solving the replicated problem on a small scenario subset and sweeping the
reference discretization for scenarios that beat the current worst case
(a cutting-plane scheme restricted to the finite reference set).  Scenario
sets are warm-started across front points, which usually makes later points
terminate without any refinement.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import nlp, robust
from .discretize import ReferenceDiscretization, Scenario
from .errors import InfeasibleModel
from .model import ProblemSpec
from .robust import ParetoPoint, ReplicatedSolution, ScalarizationSpec, SolveMode

from typing import TYPE_CHECKING

if TYPE_CHECKING:  # circular at runtime only
    from .front import FrontApproximation

log = logging.getLogger(__name__)

ADD_TOL = 1e-6
MAX_ALTERNATIONS = 20
INNER_STARTS = 2
INNER_MAX_OUTER = 40


@dataclass(frozen=True)
class WcScenarioSet:
    """Subset of reference-scenario ids with the reason each one entered."""

    ids: tuple[int, ...]
    provenance: dict[int, str] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "ids", tuple(sorted(set(self.ids))))

    @classmethod
    def initial(cls, reference: ReferenceDiscretization) -> "WcScenarioSet":
        nom = reference.nominal.id
        return cls(ids=(nom,), provenance={nom: "initial"})

    def with_added(self, scenario_id: int, reason: str) -> "WcScenarioSet":
        if scenario_id in self.provenance:
            return self
        prov = dict(self.provenance)
        prov[scenario_id] = reason
        return WcScenarioSet(ids=self.ids + (scenario_id,), provenance=prov)

    def union(self, other: "WcScenarioSet") -> "WcScenarioSet":
        prov = dict(other.provenance)
        prov.update(self.provenance)
        return WcScenarioSet(ids=self.ids + other.ids, provenance=prov)

    @property
    def identified_ids(self) -> tuple[int, ...]:
        """Ids that entered as worst cases (not the initial seed)."""
        return tuple(i for i in self.ids if self.provenance.get(i) != "initial")

    def to_json(self) -> dict:
        return {"ids": list(self.ids), "provenance": {str(k): v for k, v in self.provenance.items()}}


@dataclass
class ObjectiveWc:
    scenario_id: int
    value: float
    per_scenario: dict[int, float]
    infeasible_ids: list[int]


@dataclass
class ConstraintWc:
    scenario_id: int
    violation: float
    families: list[str]


@dataclass
class RefinementIteration:
    scenario_ids: list[int]
    objectives: list[float]
    scalarized: float
    added: list[tuple[int, str, float]]
    objective_worst: list[tuple[int, float]]
    constraint_worst: list[tuple[int, float]]

    def to_json(self) -> dict:
        return {
            "scenario_ids": self.scenario_ids,
            "objectives": self.objectives,
            "scalarized": self.scalarized,
            "added": [list(a) for a in self.added],
            "objective_worst": [list(a) for a in self.objective_worst],
            "constraint_worst": [list(a) for a in self.constraint_worst],
        }

    @classmethod
    def from_json(cls, data: dict) -> "RefinementIteration":
        return cls(
            scenario_ids=[int(v) for v in data["scenario_ids"]],
            objectives=[float(v) for v in data["objectives"]],
            scalarized=float(data["scalarized"]),
            added=[(int(a), str(b), float(c)) for a, b, c in data["added"]],
            objective_worst=[(int(a), float(b)) for a, b in data["objective_worst"]],
            constraint_worst=[(int(a), float(b)) for a, b in data["constraint_worst"]],
        )


@dataclass
class RefinementTrace:
    iterations: list[RefinementIteration]
    terminated_reason: str  # no_new_scenarios | iteration_cap
    master_solves: int = 0
    scenario_solve_units: int = 0  # sum of scenario counts over master solves

    def to_json(self) -> dict:
        return {
            "iterations": [it.to_json() for it in self.iterations],
            "terminated_reason": self.terminated_reason,
            "master_solves": self.master_solves,
            "scenario_solve_units": self.scenario_solve_units,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RefinementTrace":
        return cls(
            iterations=[RefinementIteration.from_json(it) for it in data["iterations"]],
            terminated_reason=data["terminated_reason"],
            master_solves=int(data["master_solves"]),
            scenario_solve_units=int(data["scenario_solve_units"]),
        )


def _inner_min_objective(
    spec: ProblemSpec,
    x_star: np.ndarray,
    j: int,
    scenario: Scenario,
    warm_y: Optional[np.ndarray],
    feas_tol: float,
    seed: int,
) -> tuple[float, bool]:
    """min over the adjustable block of objective j at fixed (x, u);
    returns (value, feasible)."""
    u = scenario.vector
    if spec.n_y == 0:
        f, g, ok = spec.eval_penalized(x_star, np.zeros(0), u)
        feasible = ok and (spec.n_constraints == 0 or float(np.max(g)) <= feas_tol)
        return float(f[j]), feasible

    def objective(y):
        f, _, _ = spec.eval_fast(x_star, y, u)
        return float(f[j])

    def objective_grad(y):
        _, dfdy, _, _ = spec.jacobian(x_star, y, u)
        return dfdy[j]

    def constraints(y):
        _, g, _ = spec.eval_fast(x_star, y, u)
        return g

    def constraints_jac(y):
        _, _, _, dgdy = spec.jacobian(x_star, y, u)
        return dgdy

    starts = [np.clip(warm_y if warm_y is not None else spec.y_initial,
                      spec.y_lower, spec.y_upper)]
    problem = nlp.NlpProblem(
        lower=spec.y_lower,
        upper=spec.y_upper,
        objective=objective,
        objective_grad=objective_grad,
        constraints=constraints if spec.n_constraints else None,
        constraints_jac=constraints_jac if spec.n_constraints else None,
        starts=starts,
        n_constraints=spec.n_constraints,
        name=f"inner-f{j}-s{scenario.id}",
    )
    res = nlp.solve(problem, n_starts=INNER_STARTS, seed=seed, feas_tol=feas_tol,
                    max_outer=INNER_MAX_OUTER)
    return float(res.f), res.max_violation <= feas_tol


def _inner_min_violation(
    spec: ProblemSpec,
    x_star: np.ndarray,
    scenario: Scenario,
    warm_y: Optional[np.ndarray],
    feas_tol: float,
    seed: int,
) -> tuple[float, np.ndarray]:
    """min over the adjustable block of the largest constraint value at fixed
    (x, u), in smooth epigraph form; returns (optimum, minimizing y)."""
    u = scenario.vector
    if spec.n_constraints == 0:
        return -np.inf, spec.y_initial
    if spec.n_y == 0:
        _, g, _ = spec.eval_penalized(x_star, np.zeros(0), u)
        return float(np.max(g)), np.zeros(0)

    ny = spec.n_y

    def objective(z):
        return float(z[ny])

    grad = np.zeros(ny + 1)
    grad[ny] = 1.0

    def objective_grad(z):
        return grad

    def constraints(z):
        _, g, _ = spec.eval_fast(x_star, z[:ny], u)
        return g - z[ny]

    def constraints_jac(z):
        _, _, _, dgdy = spec.jacobian(x_star, z[:ny], u)
        J = np.empty((spec.n_constraints, ny + 1))
        J[:, :ny] = dgdy
        J[:, ny] = -1.0
        return J

    y0 = np.clip(warm_y if warm_y is not None else spec.y_initial,
                 spec.y_lower, spec.y_upper)
    _, g0, _ = spec.eval_penalized(x_star, y0, u)
    z0 = np.concatenate([y0, [float(np.max(g0))]])
    problem = nlp.NlpProblem(
        lower=np.concatenate([spec.y_lower, [-1e6]]),
        upper=np.concatenate([spec.y_upper, [1e6]]),
        objective=objective,
        objective_grad=objective_grad,
        constraints=constraints,
        constraints_jac=constraints_jac,
        starts=[z0],
        n_constraints=spec.n_constraints,
        name=f"inner-viol-s{scenario.id}",
    )
    res = nlp.solve(problem, n_starts=INNER_STARTS, seed=seed, max_outer=INNER_MAX_OUTER)
    return float(res.f), res.x[:ny].copy()


def find_objective_wc(
    spec: ProblemSpec,
    x_star: np.ndarray,
    j: int,
    reference: ReferenceDiscretization,
    warm: Optional[ReplicatedSolution] = None,
    mode: SolveMode = SolveMode.ADJUSTABLE,
    feas_tol: float = nlp.FEAS_TOL,
    seed: int = nlp.SEED,
    prune_threshold: Optional[float] = None,
    prune_slack: float = ADD_TOL,
) -> ObjectiveWc:
    """Scenario maximizing objective ``j`` after re-optimizing the
    adjustable block (ties break to the lowest id).

    Scenarios with no feasible adjustment get value ``+inf`` and are flagged;
    such a scenario is the worst case by definition.  In non-adjustable mode
    the shared adjustment is fixed, so the search is a plain evaluation.

    With ``prune_threshold`` set (the incumbent worst case), a scenario whose
    warm adjustment is already feasible with objective value at most
    ``threshold + slack`` is skipped: that value upper-bounds the inner
    optimum, so the scenario provably cannot beat the incumbent.  Pruned
    entries of ``per_scenario`` hold those upper bounds.
    """
    values: dict[int, float] = {}
    infeasible: list[int] = []
    for s in reference:
        warm_y = warm.y_for(s.id, spec.y_initial) if warm is not None else None
        if mode is SolveMode.NON_ADJUSTABLE and spec.n_y:
            y_fixed = warm_y if warm_y is not None else spec.y_initial
            f, g, ok = spec.eval_penalized(x_star, y_fixed, s.vector)
            feasible = ok and (spec.n_constraints == 0 or float(np.max(g)) <= feas_tol)
            value = float(f[j])
        else:
            value = None
            feasible = True
            if prune_threshold is not None and warm_y is not None and spec.n_y:
                f, g, ok = spec.eval_penalized(x_star, warm_y, s.vector)
                if ok and (spec.n_constraints == 0 or float(np.max(g)) <= feas_tol) \
                        and float(f[j]) <= prune_threshold + prune_slack:
                    value = float(f[j])
            if value is None:
                value, feasible = _inner_min_objective(
                    spec, x_star, j, s, warm_y, feas_tol, seed
                )
        if not feasible:
            infeasible.append(s.id)
            values[s.id] = np.inf
        else:
            values[s.id] = value
    best_id = min(values, key=lambda i: (-values[i], i))
    return ObjectiveWc(
        scenario_id=best_id,
        value=values[best_id],
        per_scenario=values,
        infeasible_ids=infeasible,
    )


def find_constraint_wc(
    spec: ProblemSpec,
    x_star: np.ndarray,
    reference: ReferenceDiscretization,
    warm: Optional[ReplicatedSolution] = None,
    mode: SolveMode = SolveMode.ADJUSTABLE,
    feas_tol: float = nlp.FEAS_TOL,
    seed: int = nlp.SEED,
) -> list[ConstraintWc]:
    """Scenarios whose best-adjusted worst constraint still exceeds the
    feasibility tolerance: the most violating one per constraint family.

    Reported violations are the per-scenario inner optima (the residual
    violation after the adjustable block did its best).
    """
    if spec.n_constraints == 0:
        return []
    optima: dict[int, float] = {}
    g_at_opt: dict[int, np.ndarray] = {}
    for s in reference:
        warm_y = warm.y_for(s.id, spec.y_initial) if warm is not None else None
        if mode is SolveMode.NON_ADJUSTABLE and spec.n_y:
            y_fixed = warm_y if warm_y is not None else spec.y_initial
            _, g, _ = spec.eval_penalized(x_star, y_fixed, s.vector)
            optima[s.id] = float(np.max(g))
            g_at_opt[s.id] = g
        else:
            # A feasible warm adjustment upper-bounds the inner optimum, so
            # the scenario provably is no violator and the solve is skipped.
            if warm_y is not None and spec.n_y:
                _, g, ok = spec.eval_penalized(x_star, warm_y, s.vector)
                if ok and float(np.max(g)) <= feas_tol:
                    optima[s.id] = float(np.max(g))
                    g_at_opt[s.id] = g
                    continue
            viol, y_opt = _inner_min_violation(spec, x_star, s, warm_y, feas_tol, seed)
            optima[s.id] = viol
            _, g, _ = spec.eval_penalized(x_star, y_opt, s.vector)
            g_at_opt[s.id] = g
    violators = [i for i, v in optima.items() if v > feas_tol]
    if not violators:
        return []
    chosen: dict[int, ConstraintWc] = {}
    for c in range(spec.n_constraints):
        candidates = [i for i in violators if g_at_opt[i][c] > feas_tol]
        if not candidates:
            continue
        best = min(candidates, key=lambda i: (-g_at_opt[i][c], i))
        family = spec.constraint_names[c]
        if best in chosen:
            chosen[best].families.append(family)
        else:
            chosen[best] = ConstraintWc(
                scenario_id=best, violation=optima[best], families=[family]
            )
    # A scenario can be infeasible without one dominating family (penalized
    # evaluations); make sure the overall worst violator is always reported.
    if not chosen:
        worst = min(violators, key=lambda i: (-optima[i], i))
        chosen[worst] = ConstraintWc(scenario_id=worst, violation=optima[worst],
                                     families=["aggregate"])
    return [chosen[i] for i in sorted(chosen)]


def solve_adaptive_point(
    spec: ProblemSpec,
    reference: ReferenceDiscretization,
    scalarization: ScalarizationSpec,
    initial: Optional[WcScenarioSet] = None,
    mode: SolveMode = SolveMode.ADJUSTABLE,
    objective_bounds=None,
    warm_start=None,  # ReplicatedSolution or a sequence of them
    add_tol: float = ADD_TOL,
    max_alternations: int = MAX_ALTERNATIONS,
    n_starts: int = nlp.N_STARTS,
    seed: int = nlp.SEED,
    feas_tol: float = nlp.FEAS_TOL,
) -> tuple[ParetoPoint, RefinementTrace, WcScenarioSet]:
    """Alternate master solves and worst-case sweeps until no reference
    scenario beats the incumbent by more than ``add_tol``."""
    if mode is SolveMode.NOMINAL:
        raise ValueError("adaptive refinement is for the robust modes")
    wc_set = initial if initial is not None else WcScenarioSet.initial(reference)
    iterations: list[RefinementIteration] = []
    terminated = "iteration_cap"
    point: Optional[ParetoPoint] = None
    master_solves = 0
    units = 0
    if warm_start is None:
        chain, extra_warms = None, []
    elif isinstance(warm_start, robust.ReplicatedSolution):
        chain, extra_warms = warm_start, []
    else:
        warm_list = [w for w in warm_start if w is not None]
        chain = warm_list[0] if warm_list else None
        extra_warms = warm_list[1:]

    for _ in range(max_alternations):
        scen = reference.subset(wc_set.ids)
        warms = ([chain] if chain is not None else []) + extra_warms
        try:
            point = robust.solve_point(
                spec, scen, scalarization, mode,
                warm_start=warms or None, objective_bounds=objective_bounds,
                n_starts=n_starts, seed=seed, feas_tol=feas_tol,
            )
        except InfeasibleModel as exc:
            # Keep the scenarios gathered so far: a caller holding a stale
            # objective bound (lexicographic stages) can rebuild it on the
            # grown set and retry.
            exc.wc_set = wc_set
            raise
        master_solves += 1
        units += len(scen)
        chain = point.solution

        added: list[tuple[int, str, float]] = []
        objective_worst: list[tuple[int, float]] = []
        for j in range(spec.n_objectives):
            wc = find_objective_wc(
                spec, point.solution.x, j, reference,
                warm=point.solution, mode=mode, feas_tol=feas_tol, seed=seed,
                prune_threshold=float(point.objectives[j]), prune_slack=add_tol,
            )
            objective_worst.append((wc.scenario_id, wc.value))
            if wc.value > point.objectives[j] + add_tol and wc.scenario_id not in wc_set.provenance:
                reason = f"objective:{spec.objective_names[j]}"
                wc_set = wc_set.with_added(wc.scenario_id, reason)
                added.append((wc.scenario_id, reason, wc.value))

        constraint_worst: list[tuple[int, float]] = []
        for cw in find_constraint_wc(
            spec, point.solution.x, reference,
            warm=point.solution, mode=mode, feas_tol=feas_tol, seed=seed,
        ):
            constraint_worst.append((cw.scenario_id, cw.violation))
            if cw.scenario_id not in wc_set.provenance:
                reason = f"constraint:{cw.families[0]}"
                wc_set = wc_set.with_added(cw.scenario_id, reason)
                added.append((cw.scenario_id, reason, cw.violation))

        iterations.append(
            RefinementIteration(
                scenario_ids=list(point.scenario_ids),
                objectives=[float(v) for v in point.objectives],
                scalarized=float(scalarization.vector @ point.objectives),
                added=added,
                objective_worst=objective_worst,
                constraint_worst=constraint_worst,
            )
        )
        log.debug("%s adaptive iter=%d |set|=%d added=%s", spec.name,
                  len(iterations), len(wc_set.ids), [a[0] for a in added])
        if not added:
            terminated = "no_new_scenarios"
            break

    assert point is not None
    trace = RefinementTrace(
        iterations=iterations,
        terminated_reason=terminated,
        master_solves=master_solves,
        scenario_solve_units=units,
    )
    return point, trace, wc_set


@dataclass
class AdaptiveFrontResult:
    """Front plus the refinement bookkeeping of every solver call."""

    front: "FrontApproximation"
    traces: list[RefinementTrace]
    wc_sets: list[WcScenarioSet]
    wc_union: WcScenarioSet
    master_solves: int
    scenario_solve_units: int
    points_by_weights: dict = field(default_factory=dict)


def make_adaptive_solver(
    spec: ProblemSpec,
    reference: ReferenceDiscretization,
    mode: SolveMode = SolveMode.ADJUSTABLE,
    n_starts: int = nlp.N_STARTS,
    seed: int = nlp.SEED,
    feas_tol: float = nlp.FEAS_TOL,
    add_tol: float = ADD_TOL,
    foreign_warms: Optional[dict] = None,
):
    """Weighted-sum solver callback that refines scenarios adaptively.

    Every call seeds its scenario set with the union of all worst-case
    scenarios identified so far (plus the nominal scenario), so points after
    the extremes rarely need refinement.  ``foreign_warms`` injects solutions
    from another solve mode per weight vector, keeping runs that must
    dominate each other in the same local basin.  Traces and per-call
    scenario sets accumulate on the returned function's attributes.
    """
    state = {"union": WcScenarioSet.initial(reference), "warm": None}
    traces: list[RefinementTrace] = []
    wc_sets: list[WcScenarioSet] = []
    points_by_weights: dict = {}

    def solver(scalarization: ScalarizationSpec, objective_bounds=None) -> ParetoPoint:
        key = robust.weights_key(scalarization, objective_bounds)
        warms = [state["warm"]]
        if foreign_warms:
            warms.append(foreign_warms.get(key))
        warms = [w for w in warms if w is not None]
        try:
            point, trace, wc_set = solve_adaptive_point(
                spec, reference, scalarization,
                initial=state["union"], mode=mode,
                objective_bounds=objective_bounds, warm_start=warms or None,
                add_tol=add_tol, n_starts=n_starts, seed=seed, feas_tol=feas_tol,
            )
        except InfeasibleModel as exc:
            if exc.wc_set is not None:
                state["union"] = state["union"].union(exc.wc_set)
            raise
        state["union"] = state["union"].union(wc_set)
        state["warm"] = point.solution
        traces.append(trace)
        wc_sets.append(wc_set)
        points_by_weights[key] = point.solution
        return point

    solver.traces = traces
    solver.wc_sets = wc_sets
    solver.state = state
    solver.points_by_weights = points_by_weights
    return solver


def solve_adaptive_front(
    spec: ProblemSpec,
    reference: ReferenceDiscretization,
    mode: SolveMode = SolveMode.ADJUSTABLE,
    n_points: int = 8,
    sandwich_eps: Optional[float] = None,
    max_solves: int = 20,
    n_starts: int = nlp.N_STARTS,
    seed: int = nlp.SEED,
    feas_tol: float = nlp.FEAS_TOL,
    foreign_warms: Optional[dict] = None,
) -> AdaptiveFrontResult:
    """Whole worst-case front with adaptively grown scenario sets.

    With ``sandwich_eps`` set, the gap-driven sandwich picks the weights;
    otherwise a fixed evenly spaced schedule of ``n_points`` is used.
    """
    from . import front as front_mod

    solver = make_adaptive_solver(
        spec, reference, mode=mode, n_starts=n_starts, seed=seed,
        feas_tol=feas_tol, foreign_warms=foreign_warms,
    )
    if sandwich_eps is not None:
        result = front_mod.sandwich(solver, mode, eps=sandwich_eps, max_solves=max_solves)
    else:
        result = front_mod.solve_front_schedule(solver, mode, n_points=n_points)
    union = WcScenarioSet.initial(reference)
    for s in solver.wc_sets:
        union = union.union(s)
    return AdaptiveFrontResult(
        front=result,
        traces=list(solver.traces),
        wc_sets=list(solver.wc_sets),
        wc_union=union,
        master_solves=sum(t.master_solves for t in solver.traces),
        scenario_solve_units=sum(t.scenario_solve_units for t in solver.traces),
        points_by_weights=solver.points_by_weights,
    )
