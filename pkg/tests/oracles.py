"""Independent reference solvers used to pin expected values.

These never touch the package's NLP machinery: nominal solves use dense
grid search, and replicated worst-case solves exploit that the synthetic
problems are affine in the adjustable variable at fixed design, so the
inner problem is a small linear program (solved with scipy's HiGHS) on a
dense design grid.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linprog


def sp1_f(x, y, u):
    f1 = x**2 + y + 0.2 * u * (1.0 - y)
    f2 = (1.0 - x) ** 2 + 0.5 * (1.0 - y) + 0.2 * u * y
    return f1, f2


def sp1_g(x, y, u):
    return u * (0.5 - y) - 0.3


def grid_nominal_ws(weights, n=2001):
    """Dense-grid weighted-sum minimum of the nominal synthetic problem."""
    xs = np.linspace(0.0, 1.0, n)
    ys = np.linspace(0.0, 1.0, n)
    X, Y = np.meshgrid(xs, ys, indexing="ij")
    f1, f2 = sp1_f(X, Y, 0.0)
    val = weights[0] * f1 + weights[1] * f2
    feasible = sp1_g(X, Y, 0.0) <= 0.0
    val = np.where(feasible, val, np.inf)
    idx = np.unravel_index(np.argmin(val), val.shape)
    return {
        "value": float(val[idx]),
        "x": float(X[idx]),
        "y": float(Y[idx]),
        "objectives": np.array([float(f1[idx]), float(f2[idx])]),
    }


def _affine_rows(spec, x, u):
    """Affine-in-y coefficients of objectives/constraints at fixed (x, u);
    verifies the affinity assumption with a midpoint check."""
    y0 = np.zeros(spec.n_y)
    y1 = np.ones(spec.n_y)
    if spec.n_y != 1:
        raise ValueError("LP oracle assumes a single adjustable variable")
    f0, g0 = spec.eval_raw(x, y0, u)
    f1, g1 = spec.eval_raw(x, y1, u)
    fm, gm = spec.eval_raw(x, 0.5 * (y0 + y1), u)
    assert np.allclose(fm, 0.5 * (f0 + f1), atol=1e-12), "objectives not affine in y"
    assert np.allclose(gm, 0.5 * (g0 + g1), atol=1e-12), "constraints not affine in y"
    return f0, f1 - f0, g0, g1 - g0  # intercepts and slopes


def replicated_lp_at_x(spec, x, scenarios, weights, shared_y=False,
                       objective_caps=None):
    """Exact optimum over the adjustable copies at one fixed design point.

    Variables: one adjustable value per scenario (or one shared), plus one
    epigraph variable per objective bounding it across scenarios.
    """
    x = np.atleast_1d(np.asarray(x, dtype=float))
    K = len(scenarios)
    M = spec.n_objectives
    C = spec.n_constraints
    n_y = 1 if shared_y else K
    n = n_y + M
    c = np.concatenate([np.zeros(n_y), np.asarray(weights, dtype=float)])
    A, b = [], []
    for k, u in enumerate(scenarios):
        f0, fslope, g0, gslope = _affine_rows(spec, x, np.atleast_1d(u))
        col = 0 if shared_y else k
        for j in range(M):
            row = np.zeros(n)
            row[col] = fslope[j]
            row[n_y + j] = -1.0
            A.append(row)
            b.append(-f0[j])
        for cc in range(C):
            row = np.zeros(n)
            row[col] = gslope[cc]
            A.append(row)
            b.append(-g0[cc])
    bounds = [(0.0, 1.0)] * n_y + [
        (None, None if objective_caps is None or objective_caps[j] is None
         else float(objective_caps[j]))
        for j in range(M)
    ]
    res = linprog(c, A_ub=np.array(A), b_ub=np.array(b), bounds=bounds,
                  method="highs")
    if not res.success:
        return None
    return {
        "value": float(res.fun),
        "t": np.array(res.x[n_y:]),
        "y": np.array(res.x[:n_y]),
    }


def replicated_grid_lp(spec, scenarios, weights, shared_y=False,
                       objective_caps=None, n_x=1001):
    """Exact-in-y, grid-in-x oracle for the scalarized worst-case problem."""
    best = None
    for x in np.linspace(0.0, 1.0, n_x):
        sol = replicated_lp_at_x(spec, [x], scenarios, weights,
                                 shared_y=shared_y, objective_caps=objective_caps)
        if sol is None:
            continue
        if best is None or sol["value"] < best["value"]:
            best = dict(sol, x=float(x))
    return best


def lexicographic_grid_lp(spec, scenarios, j, shared_y=False, tol=1e-6, n_x=1001):
    """Two-stage endpoint oracle: minimize objective j, then the other
    subject to objective j staying within tol of its optimum."""
    w1 = [0.0, 0.0]
    w1[j] = 1.0
    stage1 = replicated_grid_lp(spec, scenarios, w1, shared_y=shared_y, n_x=n_x)
    caps = [None, None]
    caps[j] = stage1["t"][j] + tol
    w2 = [0.0, 0.0]
    w2[1 - j] = 1.0
    stage2 = replicated_grid_lp(spec, scenarios, w2, shared_y=shared_y,
                                objective_caps=caps, n_x=n_x)
    return stage2
