"""End-to-end orchestration: fronts, re-optimizations, and price reports.

The price construction intersects improvement rays with the nominal front's
piecewise-linear interpolation, so the interpolant must be locally tight
where rays land; otherwise near-touching rays can appear to cross the front
early.  The bundle builder therefore refines the nominal front along every
ray (verification weighted-sum solves that either certify the hit segment's
sandwich gap or insert a new point) before any report is computed, and every
report is computed against the same final front.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import adaptive, front as front_mod, nlp, robust
from .price import (
    D_ZERO_TOL,
    NsrResult,
    PriceReport,
    intersect_nominal_front,
    price as compute_price,
    solve_nsr,
)
from .discretize import ReferenceDiscretization
from .errors import InfeasibleModel
from .front import FrontApproximation
from .model import ProblemSpec
from .robust import ParetoPoint, ScalarizationSpec, SolveMode

log = logging.getLogger(__name__)

RAY_GAP_TOL = 1e-9
RAY_SOLVE_BUDGET = 80


def _hit_segment(lam: np.ndarray) -> Optional[int]:
    support = np.nonzero(lam > 1e-15)[0]
    if len(support) == 2 and support[1] == support[0] + 1:
        return int(support[0])
    return None


def refine_front_for_rays(
    spec: ProblemSpec,
    reference: ReferenceDiscretization,
    nominal_front: FrontApproximation,
    rays: Sequence[tuple[np.ndarray, np.ndarray]],
    budget: Optional[int] = None,
    n_starts: int = nlp.N_STARTS,
    seed: int = nlp.SEED,
) -> FrontApproximation:
    """Insert nominal-front points until the interpolant is verified tight
    where every ray lands.

    Each ray's hit is checked by a direct bounded solve (minimize the second
    objective subject to the first staying at the hit); if that beats the
    interpolant there, the point is inserted and the ray re-intersected.
    Rays that exit the front's range trigger the same bounded solves as
    extensions (the lexicographic endpoints trade one objective within their
    tolerance, so the interpolant can stop a whisker short of where vertical
    rays land).
    """
    fr = nominal_front
    nominal = [reference.nominal]
    solves = 0
    if budget is None:
        budget = max(RAY_SOLVE_BUDGET, 10 * len(rays))

    def insert(point):
        nonlocal fr
        supports = [list(s) for s in fr.point_supports] + [[]]
        fr = front_mod.build_front(
            list(fr.points) + [point], fr.mode, supports=supports,
            ideal=fr.ideal, nadir=fr.nadir, warnings=fr.warnings,
        )

    def bounded_solve(bounds, warms):
        return robust.solve_point(
            spec, nominal, ScalarizationSpec.unit(1 if bounds[0] is not None else 0, 2),
            SolveMode.NOMINAL, warm_start=warms or None,
            objective_bounds=bounds, n_starts=n_starts, seed=seed,
        )

    tol2 = max(1e-9 * float(fr.scale[1]), 1e-13)
    per_ray = 15
    for f_start, d in rays:
        ray_solves = 0
        norm_d = float(np.linalg.norm(d))
        prev_alpha = None
        while solves < budget and ray_solves < per_ray:
            inter = intersect_nominal_front(f_start, d, fr)
            if (prev_alpha is not None
                    and abs(inter.alpha - prev_alpha) * norm_d
                    <= 1e-9 * float(np.max(fr.scale))):
                break  # the intersection has stopped moving along the ray
            prev_alpha = inter.alpha
            if inter.flags.ray_misses_front:
                lo, hi = fr.f1_range
                x_exit = float(f_start[0] + inter.alpha * d[0])
                y_exit = float(f_start[1] + inter.alpha * d[1])
                before = len(fr)
                try:
                    if x_exit > hi - 1e-12:
                        point = bounded_solve([x_exit, None],
                                              [fr.points[-1].solution])
                    elif x_exit < lo + 1e-12:
                        point = bounded_solve([None, y_exit],
                                              [fr.points[0].solution])
                    else:
                        break
                except InfeasibleModel:
                    break
                solves += 1
                ray_solves += 1
                insert(point)
                if len(fr) == before:
                    break  # could not extend further: genuine miss
                continue
            seg = _hit_segment(inter.lam)
            x_hit = float(inter.f_mo[0])
            warms = []
            if seg is not None:
                warms = [fr.points[seg].solution, fr.points[seg + 1].solution]
            elif len(fr.points):
                idx = int(np.argmax(inter.lam))
                warms = [fr.points[idx].solution]
            try:
                point = bounded_solve([x_hit, None], warms)
            except InfeasibleModel:
                break
            solves += 1
            ray_solves += 1
            if float(point.objectives[1]) < float(inter.f_mo[1]) - tol2:
                insert(point)
                continue
            break  # interpolant verified tight at the hit
    log.debug("ray refinement used %d nominal solves, front now %d points",
              solves, len(fr))
    return fr


@dataclass
class PriceBundle:
    """Everything the navigation layer and the reports need for one run."""

    nominal_front: FrontApproximation
    robust_front: FrontApproximation
    nsr_values: list[NsrResult]
    reports: list[PriceReport]
    traces: list
    wc_sets: list
    wc_union: Optional[adaptive.WcScenarioSet]
    mro_front: Optional[FrontApproximation] = None
    scenario_fronts: dict[int, FrontApproximation] = field(default_factory=dict)
    adaptive_stats: dict = field(default_factory=dict)


def nominal_front(
    spec: ProblemSpec,
    reference: ReferenceDiscretization,
    n_points: int = 8,
    n_starts: int = nlp.N_STARTS,
    seed: int = nlp.SEED,
) -> FrontApproximation:
    solver = robust.make_fixed_solver(
        spec, [reference.nominal], SolveMode.NOMINAL, n_starts=n_starts, seed=seed
    )
    return front_mod.solve_front_schedule(solver, SolveMode.NOMINAL, n_points=n_points)


@dataclass
class FrontRun:
    """One front computation plus its solver bookkeeping."""

    front: FrontApproximation
    traces: list
    wc_sets: list
    wc_union: Optional[adaptive.WcScenarioSet]
    stats: dict
    points_by_weights: dict


def robust_front(
    spec: ProblemSpec,
    reference: ReferenceDiscretization,
    mode: SolveMode = SolveMode.ADJUSTABLE,
    adaptive_scenarios: bool = True,
    n_points: int = 8,
    sandwich_eps: Optional[float] = None,
    n_starts: int = nlp.N_STARTS,
    seed: int = nlp.SEED,
    foreign_warms: Optional[dict] = None,
) -> FrontRun:
    """Adaptive or all-scenario worst-case front with solver bookkeeping."""
    if adaptive_scenarios:
        result = adaptive.solve_adaptive_front(
            spec, reference, mode=mode, n_points=n_points,
            sandwich_eps=sandwich_eps, n_starts=n_starts, seed=seed,
            foreign_warms=foreign_warms,
        )
        return FrontRun(
            front=result.front,
            traces=result.traces,
            wc_sets=result.wc_sets,
            wc_union=result.wc_union,
            stats={
                "master_solves": result.master_solves,
                "scenario_solve_units": result.scenario_solve_units,
            },
            points_by_weights=result.points_by_weights,
        )
    solver = robust.make_fixed_solver(
        spec, list(reference), mode, n_starts=n_starts, seed=seed,
        foreign_warms=foreign_warms,
    )
    if sandwich_eps is not None:
        fr = front_mod.sandwich(solver, mode, eps=sandwich_eps)
    else:
        fr = front_mod.solve_front_schedule(solver, mode, n_points=n_points)
    return FrontRun(
        front=fr, traces=[], wc_sets=[], wc_union=None,
        stats={
            "master_solves": solver.stats["solves"],
            "scenario_solve_units": solver.stats["scenario_solve_units"],
        },
        points_by_weights=solver.points_by_weights,
    )


def scenario_front(
    spec: ProblemSpec,
    reference: ReferenceDiscretization,
    scenario_id: int,
    n_points: int = 8,
    n_starts: int = nlp.N_STARTS,
    seed: int = nlp.SEED,
    foreign_warms: Optional[dict] = None,
) -> FrontApproximation:
    """Front with both stages optimized for one fixed scenario."""
    scen = reference.by_id(scenario_id)
    solver = robust.make_fixed_solver(
        spec, [scen], SolveMode.ADJUSTABLE, n_starts=n_starts, seed=seed,
        foreign_warms=foreign_warms,
    )
    return front_mod.solve_front_schedule(solver, SolveMode.ADJUSTABLE, n_points=n_points)


def _augment_at_breakpoints(
    spec: ProblemSpec,
    reference: ReferenceDiscretization,
    rob_run: "FrontRun",
    other_front: FrontApproximation,
    adaptive_scenarios: bool,
    n_starts: int,
    seed: int,
) -> FrontApproximation:
    """Add adjustable-front points at another front's first-objective
    breakpoints (bounded second-objective minimizations, warm-started from
    that front's solutions).

    Comparing two independently solved fronts through their interpolants is
    ill-conditioned on steep segments: matched points jitter by solver
    tolerance in the first objective, which a steep chord amplifies.  With a
    point at every foreign breakpoint the interpolant comparison becomes
    exact where it matters.
    """
    rob = rob_run.front
    points = list(rob.points)
    supports = [list(s) for s in rob.point_supports]
    traces = rob_run.traces
    wc_sets = rob_run.wc_sets
    pref = ScalarizationSpec.unit(1, spec.n_objectives)
    for other in other_front.points:
        bounds = [float(other.objectives[0]), None]
        warms = [other.solution]
        if points:
            warms.append(points[-1].solution)
        try:
            if adaptive_scenarios:
                initial = rob_run.wc_union if rob_run.wc_union is not None else None
                point, trace, wc_set = adaptive.solve_adaptive_point(
                    spec, reference, pref, initial=initial,
                    objective_bounds=bounds, warm_start=warms,
                    n_starts=n_starts, seed=seed,
                )
                traces.append(trace)
                wc_sets.append(wc_set)
                rob_run.wc_union = rob_run.wc_union.union(wc_set)
                rob_run.stats["master_solves"] += trace.master_solves
                rob_run.stats["scenario_solve_units"] += trace.scenario_solve_units
            else:
                point = robust.solve_point(
                    spec, list(reference), pref, SolveMode.ADJUSTABLE,
                    warm_start=warms, objective_bounds=bounds,
                    n_starts=n_starts, seed=seed,
                )
                rob_run.stats["master_solves"] += 1
                rob_run.stats["scenario_solve_units"] += len(reference)
        except InfeasibleModel:
            continue  # breakpoint outside the adjustable front's reach
        points.append(point)
        supports.append([])
    return front_mod.build_front(points, rob.mode, supports=supports,
                                 warnings=rob.warnings)


def build_price_bundle(
    spec: ProblemSpec,
    reference: ReferenceDiscretization,
    n_points: int = 8,
    adaptive_scenarios: bool = True,
    with_mro: bool = False,
    with_scenario_fronts: bool = False,
    n_starts: int = nlp.N_STARTS,
    seed: int = nlp.SEED,
) -> PriceBundle:
    """Nominal + worst-case fronts, per-point re-optimizations, and price
    reports, all against a ray-refined nominal front.

    Runs are ordered nominal, non-adjustable, adjustable, and every run
    hands its per-weight solutions to the next as extra warm starts: any
    solution of a more restricted mode is feasible for the laxer one, so the
    laxer solve can only match or beat it and the theoretical front ordering
    survives local optimization.
    """
    nom_solver = robust.make_fixed_solver(
        spec, [reference.nominal], SolveMode.NOMINAL, n_starts=n_starts, seed=seed
    )
    nom = front_mod.solve_front_schedule(nom_solver, SolveMode.NOMINAL, n_points=n_points)

    mro_run = None
    if with_mro:
        mro_run = robust_front(
            spec, reference, mode=SolveMode.NON_ADJUSTABLE,
            adaptive_scenarios=adaptive_scenarios, n_points=n_points,
            n_starts=n_starts, seed=seed,
        )
    rob_run = robust_front(
        spec, reference, mode=SolveMode.ADJUSTABLE,
        adaptive_scenarios=adaptive_scenarios, n_points=n_points,
        n_starts=n_starts, seed=seed,
        foreign_warms=mro_run.points_by_weights if mro_run else None,
    )
    rob = rob_run.front
    if mro_run is not None:
        rob = _augment_at_breakpoints(
            spec, reference, rob_run, mro_run.front,
            adaptive_scenarios=adaptive_scenarios,
            n_starts=n_starts, seed=seed,
        )
        rob_run.front = rob

    nsr_values: list[NsrResult] = []
    rays: list[tuple[np.ndarray, np.ndarray]] = []
    for p in rob.points:
        warm = None
        if spec.n_y:
            nid = (p.solution.nominal_scenario_id
                   if p.solution.nominal_scenario_id is not None else -1)
            warm = p.solution.y_for(nid, spec.y_initial)
        nsr = solve_nsr(
            spec, p.solution.x, p.scalarization,
            objective_caps=p.objectives, warm_y=warm,
            n_starts=n_starts, seed=seed,
        )
        nsr_values.append(nsr)
        d = nsr.objectives - p.objectives
        if float(np.linalg.norm(d)) <= D_ZERO_TOL:
            d = -nom.scale / float(np.linalg.norm(nom.scale))
        rays.append((np.asarray(p.objectives, dtype=float), d))

    nom = refine_front_for_rays(spec, reference, nom, rays,
                                n_starts=n_starts, seed=seed)

    reports = [
        compute_price(spec, p, nom, nsr=nsr)
        for p, nsr in zip(rob.points, nsr_values)
    ]

    scen_fronts: dict[int, FrontApproximation] = {}
    if with_scenario_fronts:
        for s in reference:
            fr = scenario_front(
                spec, reference, s.id, n_points=n_points,
                n_starts=n_starts, seed=seed,
                foreign_warms=rob_run.points_by_weights,
            )
            # Densify at the worst-case front's breakpoints so the
            # upper-bound comparison is exact there (single-scenario
            # bounded solves, warm-started from the robust solutions).
            pts = list(fr.points)
            sups = [list(v) for v in fr.point_supports]
            pref = ScalarizationSpec.unit(1, spec.n_objectives)
            for rp in rob.points:
                try:
                    pts.append(robust.solve_point(
                        spec, [s], pref, SolveMode.ADJUSTABLE,
                        warm_start=[rp.solution, pts[-1].solution],
                        objective_bounds=[float(rp.objectives[0]), None],
                        n_starts=n_starts, seed=seed,
                    ))
                    sups.append([])
                except InfeasibleModel:
                    continue
            scen_fronts[s.id] = front_mod.build_front(
                pts, fr.mode, supports=sups, warnings=fr.warnings
            )
    return PriceBundle(
        nominal_front=nom,
        robust_front=rob,
        nsr_values=nsr_values,
        reports=reports,
        traces=rob_run.traces,
        wc_sets=rob_run.wc_sets,
        wc_union=rob_run.wc_union,
        mro_front=mro_run.front if mro_run else None,
        scenario_fronts=scen_fronts,
        adaptive_stats=rob_run.stats,
    )
