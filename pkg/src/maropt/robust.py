"""Replicated worst-case problem construction and single-point solves.

For a finite scenario set the tri-level worst-case problem becomes a smooth
one-level NLP: one copy of the adjustable variables per scenario, plus one
epigraph variable per objective bounding that objective across scenarios.
Three modes are supported:

* ``nominal``       — single nominal scenario, plain multi-objective solve;
* ``adjustable``    — one adjustable-variable copy per scenario;
* ``non_adjustable``— a single adjustable-variable copy shared by all
  scenarios (classic static robustness).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from . import nlp
from .discretize import Scenario
from .errors import EmptyScenarioSet, InfeasibleModel
from .model import ProblemSpec

T_BOUND = 1e7


class SolveMode(enum.Enum):
    NOMINAL = "nominal"
    ADJUSTABLE = "adjustable"
    NON_ADJUSTABLE = "non_adjustable"


@dataclass(frozen=True)
class ScalarizationSpec:
    """Weighted-sum scalarization; weights are normalized to sum to one."""

    weights: tuple[float, ...]

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        if np.any(w < -1e-12):
            raise ValueError("weights must be non-negative")
        total = float(w.sum())
        if total <= 0:
            raise ValueError("at least one weight must be positive")
        if abs(total - 1.0) > 1e-12:  # idempotent: already-normalized stays put
            w = w / total
        object.__setattr__(self, "weights", tuple(float(v) for v in w))

    @property
    def vector(self) -> np.ndarray:
        return np.array(self.weights)

    @classmethod
    def unit(cls, index: int, m: int) -> "ScalarizationSpec":
        w = [0.0] * m
        w[index] = 1.0
        return cls(tuple(w))

    def to_json(self) -> dict:
        return {"kind": "weighted_sum", "weights": list(self.weights)}

    @classmethod
    def from_json(cls, data: dict) -> "ScalarizationSpec":
        return cls(tuple(data["weights"]))


@dataclass
class ReplicatedSolution:
    """One first-stage point with per-scenario adjustments and evaluations."""

    x: np.ndarray
    y_by_scenario: dict[int, np.ndarray]
    t: np.ndarray
    f_matrix: np.ndarray  # (M, K)
    g_matrix: np.ndarray  # (C, K)
    active_wc_objective: dict[int, int]  # objective index -> scenario id
    active_wc_constraint: dict[int, int]  # constraint index -> scenario id
    mode: SolveMode
    scenario_ids: list[int]
    nominal_scenario_id: Optional[int]
    nlp_status: str
    nlp_iterations: int
    max_violation: float

    def y_for(self, scenario_id: int, fallback: np.ndarray) -> np.ndarray:
        """Warm-start adjustment for a scenario: its own copy if present,
        else the nominal scenario's copy, else the given fallback."""
        if scenario_id in self.y_by_scenario:
            return self.y_by_scenario[scenario_id]
        if self.nominal_scenario_id is not None and self.nominal_scenario_id in self.y_by_scenario:
            return self.y_by_scenario[self.nominal_scenario_id]
        return fallback

    def to_json(self) -> dict:
        return {
            "x": [float(v) for v in self.x],
            "y_by_scenario": {
                str(k): [float(v) for v in y] for k, y in self.y_by_scenario.items()
            },
            "t": [float(v) for v in self.t],
            "f_matrix": [[float(v) for v in row] for row in self.f_matrix],
            "g_matrix": [[float(v) for v in row] for row in self.g_matrix],
            "active_wc_objective": {str(k): v for k, v in self.active_wc_objective.items()},
            "active_wc_constraint": {str(k): v for k, v in self.active_wc_constraint.items()},
            "mode": self.mode.value,
            "scenario_ids": list(self.scenario_ids),
            "nominal_scenario_id": self.nominal_scenario_id,
            "nlp_status": self.nlp_status,
            "nlp_iterations": self.nlp_iterations,
            "max_violation": float(self.max_violation),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ReplicatedSolution":
        return cls(
            x=np.array(data["x"], dtype=float),
            y_by_scenario={
                int(k): np.array(v, dtype=float) for k, v in data["y_by_scenario"].items()
            },
            t=np.array(data["t"], dtype=float),
            f_matrix=np.array(data["f_matrix"], dtype=float),
            g_matrix=np.array(data["g_matrix"], dtype=float).reshape(
                len(data["g_matrix"]), -1
            )
            if data["g_matrix"]
            else np.zeros((0, len(data["scenario_ids"]))),
            active_wc_objective={int(k): v for k, v in data["active_wc_objective"].items()},
            active_wc_constraint={int(k): v for k, v in data["active_wc_constraint"].items()},
            mode=SolveMode(data["mode"]),
            scenario_ids=[int(v) for v in data["scenario_ids"]],
            nominal_scenario_id=data.get("nominal_scenario_id"),
            nlp_status=data["nlp_status"],
            nlp_iterations=int(data["nlp_iterations"]),
            max_violation=float(data["max_violation"]),
        )


@dataclass
class ParetoPoint:
    """One front point: worst-case objectives plus full solve provenance."""

    objectives: np.ndarray
    solution: ReplicatedSolution
    scalarization: ScalarizationSpec
    scenario_ids: list[int]

    @property
    def x(self) -> np.ndarray:
        return self.solution.x

    def to_json(self) -> dict:
        return {
            "objectives": [float(v) for v in self.objectives],
            "solution": self.solution.to_json(),
            "scalarization": self.scalarization.to_json(),
            "scenario_ids": list(self.scenario_ids),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ParetoPoint":
        return cls(
            objectives=np.array(data["objectives"], dtype=float),
            solution=ReplicatedSolution.from_json(data["solution"]),
            scalarization=ScalarizationSpec.from_json(data["scalarization"]),
            scenario_ids=[int(v) for v in data["scenario_ids"]],
        )


class ReplicatedLayout:
    """Index bookkeeping for the stacked decision vector
    ``z = [x, y-blocks..., t]``."""

    def __init__(self, spec: ProblemSpec, n_scenarios: int, mode: SolveMode):
        self.spec = spec
        self.mode = mode
        self.K = n_scenarios
        self.n_blocks = 1 if mode is SolveMode.NON_ADJUSTABLE else n_scenarios
        self.nx = spec.n_x
        self.ny = spec.n_y
        self.M = spec.n_objectives
        self.n = self.nx + self.n_blocks * self.ny + self.M

    def block_index(self, k: int) -> int:
        return 0 if self.mode is SolveMode.NON_ADJUSTABLE else k

    def x_of(self, z: np.ndarray) -> np.ndarray:
        return z[: self.nx]

    def y_of(self, z: np.ndarray, k: int) -> np.ndarray:
        b = self.block_index(k)
        start = self.nx + b * self.ny
        return z[start : start + self.ny]

    def t_of(self, z: np.ndarray) -> np.ndarray:
        return z[self.nx + self.n_blocks * self.ny :]

    def y_slice(self, k: int) -> slice:
        b = self.block_index(k)
        start = self.nx + b * self.ny
        return slice(start, start + self.ny)

    def t_index(self, j: int) -> int:
        return self.nx + self.n_blocks * self.ny + j

    def assemble(self, x, ys: Sequence[np.ndarray], t) -> np.ndarray:
        z = np.empty(self.n)
        z[: self.nx] = x
        for k in range(self.K):
            z[self.y_slice(k)] = ys[k]
        z[self.nx + self.n_blocks * self.ny :] = t
        return z

    def bounds(self, objective_bounds=None, f_samples=None) -> tuple[np.ndarray, np.ndarray]:
        """Stacked box; epigraph bounds are sized from objective samples so
        their scale stays comparable to the other variables (huge epigraph
        boxes destroy the solver's internal scaling)."""
        if f_samples is not None and len(f_samples):
            samples = np.asarray(f_samples, dtype=float).reshape(-1, self.M)
            finite = samples[np.all(np.isfinite(samples), axis=1) &
                             np.all(np.abs(samples) < 1e9, axis=1)]
        else:
            finite = np.zeros((0, self.M))
        if len(finite):
            f_min, f_max = finite.min(axis=0), finite.max(axis=0)
            margin = 10.0 * (f_max - f_min + 1.0)
            t_lower, t_upper = f_min - margin, f_max + margin
        else:
            t_lower = np.full(self.M, -T_BOUND)
            t_upper = np.full(self.M, T_BOUND)
        if objective_bounds is not None:
            for j, b in enumerate(objective_bounds):
                if b is not None and np.isfinite(b):
                    t_upper[j] = min(t_upper[j], float(b))
                    t_lower[j] = min(t_lower[j], t_upper[j] - 1.0)
        lower = np.concatenate(
            [self.spec.x_lower] + [self.spec.y_lower] * self.n_blocks + [t_lower]
        )
        upper = np.concatenate(
            [self.spec.x_upper] + [self.spec.y_upper] * self.n_blocks + [t_upper]
        )
        return lower, upper


def _sorted_scenarios(scenarios: Sequence[Scenario]) -> list[Scenario]:
    out = sorted(scenarios, key=lambda s: s.id)
    if not out:
        raise EmptyScenarioSet("the replicated problem needs at least one scenario")
    return out


def build_replicated(
    spec: ProblemSpec,
    scenarios: Sequence[Scenario],
    scalarization: ScalarizationSpec,
    mode: SolveMode,
    objective_bounds=None,
    warm_start=None,  # ReplicatedSolution or a sequence of them
    n_starts: int = nlp.N_STARTS,
    seed: int = nlp.SEED,
) -> tuple[nlp.NlpProblem, ReplicatedLayout, list[Scenario]]:
    """Assemble the scalarized epigraph NLP for the given scenario subset."""
    scen = _sorted_scenarios(scenarios)
    if mode is SolveMode.NOMINAL:
        if len(scen) != 1 or not scen[0].is_nominal:
            raise ValueError("nominal mode requires exactly the nominal scenario")
    layout = ReplicatedLayout(spec, len(scen), mode)
    K, M, C = layout.K, layout.M, spec.n_constraints
    w = scalarization.vector
    u_vectors = [s.vector for s in scen]
    rows_per_scen = M + C

    def objective(z):
        return float(w @ layout.t_of(z))

    grad_obj = np.zeros(layout.n)
    grad_obj[layout.nx + layout.n_blocks * layout.ny :] = w

    def objective_grad(z):
        return grad_obj

    U = np.array(u_vectors).reshape(K, -1)

    def y_rows(z):
        if layout.ny == 0:
            return np.zeros((K, 0))
        if mode is SolveMode.NON_ADJUSTABLE:
            return np.broadcast_to(z[layout.nx : layout.nx + layout.ny],
                                   (K, layout.ny))
        return z[layout.nx : layout.nx + K * layout.ny].reshape(K, layout.ny)

    def constraints(z):
        x = layout.x_of(z)
        t = layout.t_of(z)
        F, G = spec.eval_batch(x, y_rows(z), U)
        out = np.empty((K, rows_per_scen))
        out[:, :M] = F - t[None, :]
        out[:, M:] = G
        return out.ravel()

    def constraints_jac(z):
        x = layout.x_of(z)
        dfdx, dfdy, dgdx, dgdy = spec.jac_batch(x, y_rows(z), U)
        J = np.zeros((K * rows_per_scen, layout.n))
        for k in range(K):
            base = k * rows_per_scen
            ysl = layout.y_slice(k)
            J[base : base + M, : layout.nx] = dfdx[k]
            J[base : base + M, ysl] = dfdy[k]
            J[base + M : base + rows_per_scen, : layout.nx] = dgdx[k]
            J[base + M : base + rows_per_scen, ysl] = dgdy[k]
        for k in range(K):
            base = k * rows_per_scen
            for j in range(M):
                J[base + j, layout.t_index(j)] = -1.0
        return J

    def worst_f(x, ys):
        F, _ = spec.eval_batch(x, np.asarray(ys).reshape(K, layout.ny), U)
        return F.max(axis=0)

    # Primary starts: one per warm solution (e.g. the chained previous point
    # plus solutions carried over from another solve mode), else the declared
    # initial values.
    if warm_start is None:
        warm_list: list[ReplicatedSolution] = []
    elif isinstance(warm_start, ReplicatedSolution):
        warm_list = [warm_start]
    else:
        warm_list = [w for w in warm_start if w is not None]
    xy_starts = []
    for warm in warm_list:
        xy_starts.append((
            warm.x.copy(),
            [np.array(warm.y_for(s.id, spec.y_initial)) for s in scen],
        ))
    if not xy_starts:
        xy_starts.append((spec.x_initial, [spec.y_initial for _ in scen]))
    else:
        # Warm-started solves need less blind exploration than cold ones.
        n_starts = min(n_starts, len(xy_starts) + 2)
    # Exploration starts: Latin hypercube over (x, y-blocks), epigraph
    # variables set to the attained worst case so every start is consistent.
    n_xy = layout.nx + layout.n_blocks * layout.ny
    if n_starts > 1 and n_xy > 0:
        xy_lower = np.concatenate([spec.x_lower] + [spec.y_lower] * layout.n_blocks)
        xy_upper = np.concatenate([spec.x_upper] + [spec.y_upper] * layout.n_blocks)
        for p in nlp.latin_hypercube_starts(xy_lower, xy_upper, n_starts - 1, seed):
            x = p[: layout.nx]
            ys = [p[layout.y_slice(k)] for k in range(K)]
            xy_starts.append((x, ys))

    t_samples = [worst_f(x, ys) for x, ys in xy_starts]
    lower, upper = layout.bounds(objective_bounds, f_samples=t_samples)
    t_lo, t_hi = lower[layout.n - M :], upper[layout.n - M :]
    starts = [
        layout.assemble(x, ys, np.clip(t, t_lo, t_hi))
        for (x, ys), t in zip(xy_starts, t_samples)
    ]

    problem = nlp.NlpProblem(
        lower=lower,
        upper=upper,
        objective=objective,
        objective_grad=objective_grad,
        constraints=constraints,
        constraints_jac=constraints_jac,
        starts=starts,
        n_constraints=K * rows_per_scen,
        name=f"{spec.name or 'problem'}[{mode.value},K={K}]",
    )
    return problem, layout, scen


def weights_key(scalarization: ScalarizationSpec, objective_bounds=None) -> tuple:
    """Dictionary key matching solves across solver runs: the weight vector
    plus which objectives are bounded (lexicographic second stages reuse the
    unit weights of plain first stages, so structure must disambiguate)."""
    bounded = (None if objective_bounds is None else
               tuple(b is not None and np.isfinite(b) for b in objective_bounds))
    return (tuple(round(w, 12) for w in scalarization.weights), bounded)


def warms_from_front(front) -> dict:
    """Per-solve warm starts reconstructed from a finished front.

    Interior points map to their own weights; the two lexicographic
    endpoints additionally map to the bounded second-stage solves that
    produce them, so a re-run of the same schedule reuses every solution.
    """
    warms: dict = {}
    points = list(front.points)
    if not points:
        return warms
    m = len(points[0].objectives)
    for p in points:
        warms[weights_key(p.scalarization)] = p.solution
    for j, p in ((0, points[0]), (1, points[-1])):
        warms[weights_key(ScalarizationSpec.unit(j, m))] = p.solution
        bounded = tuple(i == j for i in range(m))
        warms[(tuple(ScalarizationSpec.unit(1 - j, m).weights), bounded)] = p.solution
    return warms


def make_fixed_solver(
    spec: ProblemSpec,
    scenarios: Sequence[Scenario],
    mode: SolveMode,
    n_starts: int = nlp.N_STARTS,
    seed: int = nlp.SEED,
    feas_tol: float = nlp.FEAS_TOL,
    foreign_warms: Optional[dict] = None,
):
    """Weighted-sum solver callback over a fixed scenario set.

    Consecutive calls warm-start from the previous solution; solutions from
    another solve mode can be injected per weight vector (``foreign_warms``),
    which keeps runs that must dominate each other in the same local basin.
    Call counts and per-call scenario totals are kept on ``solver.stats``,
    and every solution is recorded in ``solver.points_by_weights``.
    """
    scen = _sorted_scenarios(scenarios)
    state: dict = {"warm": None}
    stats = {"solves": 0, "scenario_solve_units": 0}
    points_by_weights: dict = {}

    def solver(scalarization: ScalarizationSpec, objective_bounds=None) -> ParetoPoint:
        key = weights_key(scalarization, objective_bounds)
        warms = [state["warm"]]
        if foreign_warms:
            warms.append(foreign_warms.get(key))
        warms = [w for w in warms if w is not None]
        point = solve_point(
            spec, scen, scalarization, mode,
            warm_start=warms or None, objective_bounds=objective_bounds,
            n_starts=n_starts, seed=seed, feas_tol=feas_tol,
        )
        state["warm"] = point.solution
        stats["solves"] += 1
        stats["scenario_solve_units"] += len(scen)
        points_by_weights[key] = point.solution
        return point

    solver.stats = stats
    solver.points_by_weights = points_by_weights
    return solver


def solve_point(
    spec: ProblemSpec,
    scenarios: Sequence[Scenario],
    scalarization: ScalarizationSpec,
    mode: SolveMode,
    warm_start=None,  # ReplicatedSolution or a sequence of them
    objective_bounds=None,
    n_starts: int = nlp.N_STARTS,
    seed: int = nlp.SEED,
    feas_tol: float = nlp.FEAS_TOL,
) -> ParetoPoint:
    """Solve the scalarized replicated problem and package the result."""
    problem, layout, scen = build_replicated(
        spec, scenarios, scalarization, mode,
        objective_bounds=objective_bounds, warm_start=warm_start,
        n_starts=n_starts, seed=seed,
    )
    # Bounded solves (lexicographic stages and friends) drive feasibility far
    # below the reporting tolerance: the bound sits on a vertical stretch of
    # the front, where tolerance-level overshoot amplifies into visible
    # objective wobble between otherwise equivalent runs.
    internal_feas = min(feas_tol, 1e-8) if objective_bounds is not None else feas_tol
    result = nlp.solve(problem, n_starts=len(problem.starts), seed=seed,
                       feas_tol=internal_feas)
    if objective_bounds is not None and internal_feas < feas_tol:
        # A degenerate bound (its gradient vanishes at the optimum) can repel
        # the tight pass entirely; fall back to the caller's tolerance when
        # no progress was made on the best starting value.
        f0 = min(problem.objective(s0) for s0 in problem.starts)
        if result.f >= f0 - 1e-9:
            alt = nlp.solve(problem, n_starts=len(problem.starts), seed=seed,
                            feas_tol=feas_tol)
            if alt.max_violation <= feas_tol and alt.f < result.f - 1e-9:
                result = alt

    z = result.x
    x = layout.x_of(z).copy()
    M, C, K = layout.M, spec.n_constraints, layout.K
    f_matrix = np.empty((M, K))
    g_matrix = np.empty((C, K))
    ys = {}
    for k, s in enumerate(scen):
        y = layout.y_of(z, k).copy()
        ys[s.id] = y
        f, g, _ = spec.eval_penalized(x, y, s.vector)
        f_matrix[:, k] = f
        g_matrix[:, k] = g

    # Infeasibility is judged at the caller's tolerance even when the solve
    # itself targeted a tighter internal one.
    if result.status == "infeasible" and result.max_violation > feas_tol:
        if C and g_matrix.size:
            c_idx, k_idx = np.unravel_index(np.argmax(g_matrix), g_matrix.shape)
            raise InfeasibleModel(
                f"no scenario-feasible point found: constraint "
                f"{spec.constraint_names[c_idx]} violated by {g_matrix[c_idx, k_idx]:.3g} "
                f"in scenario {scen[k_idx].id}",
                constraint=spec.constraint_names[c_idx],
                scenario_id=scen[k_idx].id,
                violation=float(g_matrix[c_idx, k_idx]),
            )
        raise InfeasibleModel("no feasible point found")

    ids = [s.id for s in scen]
    # The epigraph variables of zero-weight objectives are only bounded from
    # below by feasibility, so pin every t to the attained worst case.
    t = f_matrix.max(axis=1)
    nominal_id = next((s.id for s in scen if s.is_nominal), None)
    solution = ReplicatedSolution(
        x=x,
        y_by_scenario=ys,
        t=t,
        f_matrix=f_matrix,
        g_matrix=g_matrix,
        active_wc_objective={j: ids[int(np.argmax(f_matrix[j]))] for j in range(M)},
        active_wc_constraint={c: ids[int(np.argmax(g_matrix[c]))] for c in range(C)},
        mode=mode,
        scenario_ids=ids,
        nominal_scenario_id=nominal_id,
        nlp_status=result.status,
        nlp_iterations=result.iterations,
        max_violation=result.max_violation,
    )
    return ParetoPoint(
        objectives=t.copy(),
        solution=solution,
        scalarization=scalarization,
        scenario_ids=ids,
    )
