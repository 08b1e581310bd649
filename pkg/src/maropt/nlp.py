"""Box-and-inequality constrained NLP solver.

Augmented Lagrangian outer loop (Powell-Hestenes-Rockafellar form for
inequalities) around a quasi-Newton inner solver with box projection
(scipy's L-BFGS-B).  Multistart from the caller's starting point plus
Latin-hypercube samples, fixed seed, so results are reproducible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np
from scipy.optimize import minimize
from scipy.stats import qmc

log = logging.getLogger(__name__)

FEAS_TOL = 1e-6
OPT_TOL = 1e-6
MAX_OUTER = 500
N_STARTS = 5
SEED = 42

_PENALTY_INIT = 10.0
_PENALTY_FACTOR = 10.0
_PENALTY_CAP = 1e8
_VIOLATION_IMPROVEMENT = 0.5
#: A feasible incumbent (e.g. a warm start carried over from a related
#: solve) is only displaced by at least this much objective improvement, so
#: solves that cannot genuinely improve return their input bit-for-bit.
#: Matches the optimality tolerance: sub-tolerance gains are solver noise.
_PRESERVE_TOL = 1e-6


@dataclass
class NlpProblem:
    """Smooth minimization over a box with inequality constraints ``c(z) <= 0``.

    ``objective``/``constraints`` return a float resp. an ``(m,)`` array;
    the gradient callables are optional and fall back to central finite
    differences on the stacked functions.
    """

    lower: np.ndarray
    upper: np.ndarray
    objective: Callable[[np.ndarray], float]
    constraints: Optional[Callable[[np.ndarray], np.ndarray]] = None
    objective_grad: Optional[Callable[[np.ndarray], np.ndarray]] = None
    constraints_jac: Optional[Callable[[np.ndarray], np.ndarray]] = None
    starts: Optional[list[np.ndarray]] = None
    n_constraints: Optional[int] = None
    name: str = ""

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        if self.lower.shape != self.upper.shape:
            raise ValueError("bound shape mismatch")
        if not (np.all(np.isfinite(self.lower)) and np.all(np.isfinite(self.upper))):
            raise ValueError("bounds must be finite")
        if np.any(self.lower >= self.upper):
            raise ValueError("lower bounds must be strictly below upper bounds")

    @property
    def n(self) -> int:
        return self.lower.size


@dataclass
class NlpResult:
    x: np.ndarray
    f: float
    max_violation: float
    status: str  # optimal | feasible_suboptimal | infeasible | iteration_limit
    iterations: int
    stationarity: float
    violation_history: list[float] = field(default_factory=list)
    start_index: int = 0

    @property
    def ok(self) -> bool:
        return self.status in ("optimal", "feasible_suboptimal")


def _fd_grad(fn, z, f0=None):
    n = z.size
    g = np.zeros(n)
    for i in range(n):
        h = max(1e-6 * abs(z[i]), 1e-8)
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        g[i] = (fn(zp) - fn(zm)) / (2 * h)
    return g


def _fd_jac(fn, z, m):
    n = z.size
    J = np.zeros((m, n))
    for i in range(n):
        h = max(1e-6 * abs(z[i]), 1e-8)
        zp, zm = z.copy(), z.copy()
        zp[i] += h
        zm[i] -= h
        J[:, i] = (fn(zp) - fn(zm)) / (2 * h)
    return J


class _Funcs:
    """Problem callables in box-scaled coordinates ``s = (z - lb)/span``.

    The unit-box scaling evens out gradient magnitudes across variables of
    very different physical scales, which is what quasi-Newton steps need.
    Gradients are analytic when provided, else central finite differences.
    """

    def __init__(self, problem: NlpProblem):
        self.p = problem
        self.span = problem.upper - problem.lower
        if problem.constraints is None:
            self.m = 0
        elif problem.n_constraints is not None:
            self.m = problem.n_constraints
        else:
            self.m = np.atleast_1d(np.asarray(problem.constraints(problem.lower))).size

    def to_scaled(self, z):
        return (np.asarray(z, dtype=float) - self.p.lower) / self.span

    def to_raw(self, s):
        return self.p.lower + np.asarray(s, dtype=float) * self.span

    def f(self, s):
        return float(self.p.objective(self.to_raw(s)))

    def fgrad(self, s):
        if self.p.objective_grad is not None:
            return np.asarray(self.p.objective_grad(self.to_raw(s)), dtype=float) * self.span
        return _fd_grad(self.f, s)

    def c(self, s):
        if self.m == 0:
            return np.zeros(0)
        return np.atleast_1d(np.asarray(self.p.constraints(self.to_raw(s)), dtype=float))

    def cjac(self, s):
        if self.m == 0:
            return np.zeros((0, s.size))
        if self.p.constraints_jac is not None:
            J = np.asarray(self.p.constraints_jac(self.to_raw(s)), dtype=float)
            return J.reshape(self.m, s.size) * self.span[None, :]
        return _fd_jac(self.c, s, self.m)


def _projected_gradient_norm(z, grad, lower, upper):
    return float(np.max(np.abs(z - np.clip(z - grad, lower, upper)))) if z.size else 0.0


def _auglag_from(funcs: _Funcs, z0, feas_tol, opt_tol, max_outer, inner_maxiter):
    """One augmented-Lagrangian run from a single start point.

    The best feasible iterate (including the start) is remembered: if the
    multiplier loop wanders off a knife-edge active set and cannot restore
    feasibility, that iterate is returned instead of the infeasible one.
    """
    p = funcs.p
    s = np.clip(funcs.to_scaled(np.clip(np.asarray(z0, dtype=float), p.lower, p.upper)),
                0.0, 1.0)
    lam = np.zeros(funcs.m)
    mu = _PENALTY_INIT
    bounds = [(0.0, 1.0)] * p.n
    history: list[float] = []
    status = "iteration_limit"
    violation = np.inf
    best_violation = np.inf
    stationarity = np.inf
    outer = 0
    stall_count = 0
    polish_count = 0
    lam_boost = 1
    f_stagnant = np.inf
    f_stagnant_count = 0
    c0 = funcs.c(s)
    viol0 = float(np.max(np.maximum(0.0, c0))) if funcs.m else 0.0
    best_feasible = (s.copy(), funcs.f(s), viol0) if viol0 <= feas_tol else None
    violation = viol0  # seeds the first inner solve's tolerance schedule

    for outer in range(1, max_outer + 1):

        def al_value_grad(v):
            fval = funcs.f(v)
            fg = funcs.fgrad(v)
            if funcs.m == 0:
                return fval, fg
            c = funcs.c(v)
            J = funcs.cjac(v)
            shifted = lam + mu * c
            active = np.maximum(0.0, shifted)
            val = fval + float(np.sum(active**2 - lam**2)) / (2.0 * mu)
            grad = fg + J.T @ active
            return val, grad

        # Inexact inner solves: precision tracks the violation, so early
        # outers are cheap and late outers can thread thin active sets.
        if np.isfinite(violation) and violation > 0:
            gtol = min(1e-3, max(0.1 * opt_tol, 0.05 * violation))
        elif violation == 0.0:
            gtol = 0.1 * opt_tol
        else:
            gtol = 1e-3
        res = minimize(
            al_value_grad,
            s,
            jac=True,
            method="L-BFGS-B",
            bounds=bounds,
            options={"maxiter": inner_maxiter, "ftol": 1e-14, "gtol": gtol,
                     "maxcor": min(30, max(10, p.n))},
        )
        s_prev = s
        s = np.clip(res.x, 0.0, 1.0)

        c = funcs.c(s)
        violation = float(np.max(np.maximum(0.0, c))) if funcs.m else 0.0
        history.append(violation)
        if violation <= feas_tol:
            f_here = funcs.f(s)
            if best_feasible is None or f_here < best_feasible[1] - _PRESERVE_TOL:
                best_feasible = (s.copy(), f_here, violation)
        lam_new = np.maximum(0.0, lam + mu * c)
        lagr_grad = funcs.fgrad(s)
        if funcs.m:
            lagr_grad = lagr_grad + funcs.cjac(s).T @ lam_new
        stationarity = _projected_gradient_norm(s, lagr_grad, 0.0, 1.0)
        log.debug(
            "%s outer=%d f=%.6g viol=%.3g pg=%.3g mu=%.1g",
            p.name, outer, funcs.f(s), violation, stationarity, mu,
        )

        if stationarity <= opt_tol and violation <= feas_tol:
            # Accept immediately only with violation well below tolerance;
            # otherwise keep polishing so downstream consumers (e.g. the
            # lexicographic bound of a second stage) see a truly feasible
            # value rather than one sitting feas_tol deep in violation.
            if violation <= 1e-2 * feas_tol:
                status = "optimal"
                break
            polish_count += 1
            if polish_count >= 3:
                status = "optimal"
                break
        else:
            polish_count = 0
        if funcs.m == 0:
            # Unconstrained: one inner solve decides, don't spin the loop.
            status = "optimal" if stationarity <= opt_tol else "feasible_suboptimal"
            break

        # Classic safeguarded update: take the multiplier step only when the
        # violation improved enough, otherwise tighten the penalty.  Once the
        # penalty is capped, multiplier steps are all that is left (they are
        # what resolves nearly degenerate active constraints); stagnating
        # steps there are extrapolated geometrically, since the plain series
        # builds the multiplier by only mu*violation per iteration.
        prev_viol = history[-2] if len(history) > 1 else np.inf
        lam_prev = lam
        improved = violation <= max(1e-2 * feas_tol,
                                    _VIOLATION_IMPROVEMENT * best_violation)
        if improved or mu >= _PENALTY_CAP:
            if improved or violation <= _VIOLATION_IMPROVEMENT * prev_viol:
                lam_boost = 1
            else:
                lam_boost = min(lam_boost * 2, 4096)
            lam = np.maximum(0.0, lam + lam_boost * mu * c)
            best_violation = min(best_violation, violation)
        else:
            mu = min(mu * _PENALTY_FACTOR, _PENALTY_CAP)

        # No-progress exit: iterate, violation, and multipliers have all
        # settled (the remaining gap is below what the inner solver
        # resolves).  Multiplier movement counts as progress: on nearly
        # degenerate active sets the multipliers keep growing toward their
        # KKT values for many outer iterations while the iterate barely moves.
        step = float(np.max(np.abs(s - s_prev)))
        lam_step = float(np.max(np.abs(lam - lam_prev))) if funcs.m else 0.0
        if (step < 1e-11 and abs(violation - prev_viol) <= 1e-12 * (1.0 + violation)
                and lam_step <= 1e-8 * (1.0 + float(np.max(lam)) if funcs.m else 1.0)):
            stall_count += 1
        else:
            stall_count = 0
        if stall_count >= 2 and (violation <= feas_tol or mu >= _PENALTY_CAP):
            status = "feasible_suboptimal" if violation <= feas_tol else "infeasible"
            break
        # Feasible with a stagnant objective: the multipliers may keep
        # drifting on a degenerate active set, but nothing observable
        # changes anymore.
        f_now = funcs.f(s)
        if violation <= feas_tol and abs(f_now - f_stagnant) <= 1e-12 * (1.0 + abs(f_now)):
            f_stagnant_count += 1
            if f_stagnant_count >= 4:
                status = "feasible_suboptimal"
                break
        else:
            f_stagnant_count = 0
            f_stagnant = f_now
    else:
        outer = max_outer

    if status == "iteration_limit" and violation > feas_tol:
        status = "infeasible"
    if best_feasible is not None:
        s_b, f_b, v_b = best_feasible
        f_final = funcs.f(s)
        swap = violation > feas_tol or (
            f_b <= f_final + _PRESERVE_TOL and v_b <= max(violation, 1e-8)
        )
        if swap and not np.array_equal(s_b, s):
            # Restore the feasible incumbent: either the loop ended
            # infeasible, or it never genuinely improved on it.
            s, violation = s_b, v_b
            status = "feasible_suboptimal"
            stationarity = np.inf
    z = np.clip(funcs.to_raw(s), p.lower, p.upper)
    return NlpResult(
        x=z,
        f=funcs.f(s),
        max_violation=violation,
        status=status,
        iterations=outer,
        stationarity=stationarity,
        violation_history=history,
    )


def latin_hypercube_starts(lower, upper, count, seed=SEED):
    """Deterministic LHS points inside the box."""
    if count <= 0:
        return []
    sampler = qmc.LatinHypercube(d=lower.size, seed=seed)
    sample = sampler.random(count)
    return list(qmc.scale(sample, lower, upper))


def solve(
    problem: NlpProblem,
    feas_tol: float = FEAS_TOL,
    opt_tol: float = OPT_TOL,
    max_outer: int = MAX_OUTER,
    n_starts: int = N_STARTS,
    seed: int = SEED,
    inner_maxiter: int = 300,
) -> NlpResult:
    """Best multistart result; feasible candidates ranked by objective,
    otherwise the least-violating candidate wins."""
    funcs = _Funcs(problem)
    starts = list(problem.starts) if problem.starts else [
        np.clip((problem.lower + problem.upper) / 2.0, problem.lower, problem.upper)
    ]
    if len(starts) < n_starts:
        starts += latin_hypercube_starts(
            problem.lower, problem.upper, n_starts - len(starts), seed=seed
        )
    starts = starts[:n_starts] if n_starts > 0 else starts

    best: Optional[NlpResult] = None
    for idx, z0 in enumerate(starts):
        res = _auglag_from(funcs, z0, feas_tol, opt_tol, max_outer, inner_maxiter)
        res.start_index = idx
        if best is None or _better(res, best, feas_tol):
            best = res
    assert best is not None
    log.debug("%s best start=%d status=%s f=%.6g", problem.name, best.start_index,
              best.status, best.f)
    return best


def _better(a: NlpResult, b: NlpResult, feas_tol: float) -> bool:
    """Does candidate ``a`` beat incumbent ``b``?  Feasibility first; among
    feasible results a later start must improve beyond solver noise, so
    high-quality warm starts (which run first) win ties deterministically."""
    a_feas = a.max_violation <= feas_tol
    b_feas = b.max_violation <= feas_tol
    if a_feas != b_feas:
        return a_feas
    if a_feas:
        return a.f < b.f - _PRESERVE_TOL
    return a.max_violation < b.max_violation
