"""Price of robustness.

A robust design fixes the first-stage variables against the whole scenario
set.  Re-optimizing only the adjustable variables for the nominal scenario
(the NSR problem) shows what that design achieves when nothing bad happens;
extending the improvement direction until it meets the nominal front gives
the comparable non-robust solution.  The componentwise difference between
the two is the price paid for robustifying the first stage.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from . import nlp
from .errors import NsrInfeasible
from .front import FrontApproximation
from .model import ProblemSpec
from .robust import ParetoPoint, ScalarizationSpec

log = logging.getLogger(__name__)

D_ZERO_TOL = 1e-9


@dataclass
class NsrResult:
    y: np.ndarray
    objectives: np.ndarray

    def to_json(self) -> dict:
        return {
            "y": [float(v) for v in self.y],
            "objectives": [float(v) for v in self.objectives],
        }

    @classmethod
    def from_json(cls, data: dict) -> "NsrResult":
        return cls(
            y=np.array(data["y"], dtype=float),
            objectives=np.array(data["objectives"], dtype=float),
        )


@dataclass
class IntersectionFlags:
    d_zero: bool = False
    ray_misses_front: bool = False

    def to_json(self) -> dict:
        return {"d_zero": self.d_zero, "ray_misses_front": self.ray_misses_front}


@dataclass
class Intersection:
    alpha: float
    f_mo: np.ndarray
    lam: np.ndarray  # convex coefficients over the nominal front's points
    flags: IntersectionFlags


@dataclass
class PriceReport:
    """All quantities of the robustness-price construction for one point."""

    f_maro: np.ndarray
    f_nsr: np.ndarray
    d: np.ndarray
    alpha_star: float
    f_mo: np.ndarray
    p_r: np.ndarray
    lam: np.ndarray
    flags: IntersectionFlags

    def to_json(self) -> dict:
        return {
            "f_maro": [float(v) for v in self.f_maro],
            "f_nsr": [float(v) for v in self.f_nsr],
            "d": [float(v) for v in self.d],
            "alpha_star": float(self.alpha_star),
            "f_mo": [float(v) for v in self.f_mo],
            "p_r": [float(v) for v in self.p_r],
            "lambda": [float(v) for v in self.lam],
            "flags": self.flags.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "PriceReport":
        return cls(
            f_maro=np.array(data["f_maro"], dtype=float),
            f_nsr=np.array(data["f_nsr"], dtype=float),
            d=np.array(data["d"], dtype=float),
            alpha_star=float(data["alpha_star"]),
            f_mo=np.array(data["f_mo"], dtype=float),
            p_r=np.array(data["p_r"], dtype=float),
            lam=np.array(data["lambda"], dtype=float),
            flags=IntersectionFlags(**data["flags"]),
        )


def solve_nsr(
    spec: ProblemSpec,
    x_star: np.ndarray,
    preference: ScalarizationSpec,
    objective_caps: Optional[np.ndarray] = None,
    warm_y: Optional[np.ndarray] = None,
    n_starts: int = nlp.N_STARTS,
    seed: int = nlp.SEED,
    feas_tol: float = nlp.FEAS_TOL,
) -> NsrResult:
    """Re-optimize the adjustable variables for the nominal scenario at a
    fixed first stage, scalarized by the decision maker's preference.

    ``objective_caps`` (normally the robust point's worst-case values) keep
    the chosen point inside the region the robust solution already
    guarantees, so the re-optimization never trades one objective above it.
    The caps are always attainable: the robust solution's own nominal-scenario
    adjustment satisfies them.
    """
    x_star = np.asarray(x_star, dtype=float)
    u_nom = spec.uncertainty.nominal
    caps = None if objective_caps is None else np.asarray(objective_caps, dtype=float)

    def check_caps(f):
        return caps is None or float(np.max(f - caps)) <= feas_tol

    if spec.n_y == 0:
        f, g, ok = spec.eval_penalized(x_star, np.zeros(0), u_nom)
        if not ok or (spec.n_constraints and float(np.max(g)) > feas_tol) or not check_caps(f):
            raise NsrInfeasible(
                "nominal scenario infeasible at the fixed first stage; "
                "the robust solve that produced it must be wrong"
            )
        return NsrResult(y=np.zeros(0), objectives=f)

    w = preference.vector
    m_extra = 0 if caps is None else spec.n_objectives

    def objective(y):
        f, _, _ = spec.eval_fast(x_star, y, u_nom)
        return float(w @ f)

    def objective_grad(y):
        _, dfdy, _, _ = spec.jacobian(x_star, y, u_nom)
        return w @ dfdy

    def constraints(y):
        f, g, _ = spec.eval_fast(x_star, y, u_nom)
        if caps is None:
            return g
        return np.concatenate([g, f - caps])

    def constraints_jac(y):
        _, dfdy, _, dgdy = spec.jacobian(x_star, y, u_nom)
        if caps is None:
            return dgdy
        return np.vstack([dgdy, dfdy])

    y0 = np.clip(warm_y if warm_y is not None else spec.y_initial,
                 spec.y_lower, spec.y_upper)
    problem = nlp.NlpProblem(
        lower=spec.y_lower,
        upper=spec.y_upper,
        objective=objective,
        objective_grad=objective_grad,
        constraints=constraints if (spec.n_constraints or m_extra) else None,
        constraints_jac=constraints_jac if (spec.n_constraints or m_extra) else None,
        starts=[y0],
        n_constraints=spec.n_constraints + m_extra,
        name=f"nsr[{spec.name}]",
    )
    res = nlp.solve(problem, n_starts=n_starts, seed=seed, feas_tol=feas_tol)
    if res.max_violation > feas_tol:
        raise NsrInfeasible(
            f"nominal re-optimization infeasible (violation {res.max_violation:.3g}); "
            "the robust solve that produced this first stage must be wrong"
        )
    f, _, _ = spec.eval_penalized(x_star, res.x, u_nom)
    return NsrResult(y=res.x.copy(), objectives=f)


def intersect_nominal_front(
    f_maro: np.ndarray,
    d: np.ndarray,
    nominal_front: FrontApproximation,
) -> Intersection:
    """Largest-step intersection of the ray ``f_maro + alpha*d`` with the
    nominal front's piecewise-linear interpolation.

    Degenerate cases are flagged, never fatal: a zero direction projects
    along the normalized objective-space diagonal, and a ray that misses
    the front clamps to the nearest front endpoint.
    """
    f_maro = np.asarray(f_maro, dtype=float)
    d = np.asarray(d, dtype=float)
    if len(nominal_front) == 0:
        raise ValueError("nominal front is empty")
    flags = IntersectionFlags()
    if float(np.linalg.norm(d)) <= D_ZERO_TOL:
        flags.d_zero = True
        d = -nominal_front.scale / float(np.linalg.norm(nominal_front.scale))

    objs = nominal_front.objectives()
    n = len(objs)
    if n == 1:
        target = objs[0]
        denom = float(d @ d)
        alpha = float(d @ (target - f_maro)) / denom if denom > 0 else 0.0
        lam = np.ones(1)
        if np.max(np.abs(f_maro + alpha * d - target)) > 1e-9:
            flags.ray_misses_front = True
        return Intersection(alpha=alpha, f_mo=target.copy(), lam=lam, flags=flags)

    best: Optional[tuple[float, int, float]] = None  # (alpha, segment, s)
    for i in range(n - 1):
        a, b = objs[i], objs[i + 1]
        # f_maro + alpha*d = a + s*(b - a)
        A = np.column_stack([d, a - b])
        rhs = a - f_maro
        det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
        if abs(det) < 1e-14:
            continue
        alpha, s = np.linalg.solve(A, rhs)
        if -1e-9 <= s <= 1 + 1e-9 and alpha >= -1e-9:
            s = min(max(float(s), 0.0), 1.0)
            if best is None or alpha > best[0]:
                best = (float(alpha), i, s)

    if best is None:
        flags.ray_misses_front = True
        # Clamp to the front endpoint nearest to the ray.
        denom = float(d @ d)
        candidates = []
        for idx in (0, n - 1):
            e = objs[idx]
            alpha_e = float(d @ (e - f_maro)) / denom if denom > 0 else 0.0
            dist = float(np.linalg.norm(f_maro + alpha_e * d - e))
            candidates.append((dist, alpha_e, idx))
        _, alpha, idx = min(candidates)
        lam = np.zeros(n)
        lam[idx] = 1.0
        return Intersection(alpha=alpha, f_mo=objs[idx].copy(), lam=lam, flags=flags)

    alpha, i, s = best
    lam = np.zeros(n)
    lam[i] = 1.0 - s
    lam[i + 1] = s
    f_mo = (1.0 - s) * objs[i] + s * objs[i + 1]
    return Intersection(alpha=alpha, f_mo=f_mo, lam=lam, flags=flags)


def price(
    spec: ProblemSpec,
    maro_point: ParetoPoint,
    nominal_front: FrontApproximation,
    preference: Optional[ScalarizationSpec] = None,
    nsr: Optional[NsrResult] = None,
    n_starts: int = nlp.N_STARTS,
    seed: int = nlp.SEED,
) -> PriceReport:
    """Full price construction for one robust front point.

    ``preference`` defaults to the weights that produced the point; a
    precomputed NSR result can be passed to skip the re-optimization.
    """
    pref = preference if preference is not None else maro_point.scalarization
    if nsr is None:
        warm = maro_point.solution.y_for(
            maro_point.solution.nominal_scenario_id
            if maro_point.solution.nominal_scenario_id is not None
            else -1,
            spec.y_initial,
        ) if spec.n_y else None
        nsr = solve_nsr(spec, maro_point.solution.x, pref,
                        objective_caps=maro_point.objectives, warm_y=warm,
                        n_starts=n_starts, seed=seed)
    f_maro = np.asarray(maro_point.objectives, dtype=float)
    f_nsr = nsr.objectives
    d = f_nsr - f_maro
    inter = intersect_nominal_front(f_maro, d, nominal_front)
    if inter.flags.d_zero:
        p_r = np.zeros(spec.n_objectives)
    else:
        p_r = f_nsr - inter.f_mo
    return PriceReport(
        f_maro=f_maro,
        f_nsr=f_nsr,
        d=d,
        alpha_star=inter.alpha,
        f_mo=inter.f_mo,
        p_r=p_r,
        lam=inter.lam,
        flags=inter.flags,
    )
