"""Built-in problem instances.

Two desk-scale synthetic problems with brute-force-verifiable behavior:

* ``sp1`` — one design variable, one operational variable, one uncertain
  parameter.  Its nominal front is convex, and at the ``x = 1`` end the
  nominal-optimal and robust-optimal design coincide, so the price of
  robustness provably vanishes there.
* ``sp2`` — same objectives driven by the first uncertain parameter, a
  two-dimensional uncertainty box, and an extra capacity-style constraint
  that can only become unsatisfiable at the (+1, +1) corner scenario.

Plus ``column_surrogate`` — a smooth stand-in for a binary distillation
design problem (stage count, feed stage, diameter, exchanger areas as design
variables; reflux ratio and specific reboiler duty as operational variables;
load, feed composition, and an activity-coefficient factor as uncertain
parameters).  It is not calibrated against any simulator; it encodes the
qualitative trends one expects from such a column:

* capital cost depends on the design variables only and grows with stage
  count, diameter, and exchanger areas;
* per-ton operating cost is independent of the load;
* product purities improve with stage count and reflux ratio;
* top-purity difficulty grows when the activity factor and the feed fraction
  are jointly high (the factor helps at low feed fractions), and dominates
  the scenario dependence of the achievable operating cost;
* reboiler/condenser duties and the vapor-load factor scale with the load,
  so the (high factor, high fraction, high load) corner stresses the
  equipment capacity limits.
"""

from __future__ import annotations

import numpy as np

from .model import (
    EvaluationHandle,
    Geometry,
    ProblemSpec,
    Role,
    UncertainParamSpec,
    UncertaintySet,
    VariableSpec,
)


def build_sp1() -> ProblemSpec:
    """Synthetic problem 1: x, y, u all scalar."""

    def fn(x, y, u):
        xv, yv, uv = x[0], y[0], u[0]
        f1 = xv**2 + yv + 0.2 * uv * (1.0 - yv)
        f2 = (1.0 - xv) ** 2 + 0.5 * (1.0 - yv) + 0.2 * uv * yv
        g = uv * (0.5 - yv) - 0.3
        return np.array([f1, f2]), np.array([g])

    def jac(x, y, u):
        xv, yv, uv = x[0], y[0], u[0]
        dfdx = np.array([[2.0 * xv], [-2.0 * (1.0 - xv)]])
        dfdy = np.array([[1.0 - 0.2 * uv], [-0.5 + 0.2 * uv]])
        dgdx = np.array([[0.0]])
        dgdy = np.array([[-uv]])
        return dfdx, dfdy, dgdx, dgdy

    def fn_batch(x, Ys, Us):
        xv = x[0]
        yv, uv = Ys[:, 0], Us[:, 0]
        F = np.stack(
            [xv**2 + yv + 0.2 * uv * (1.0 - yv),
             (1.0 - xv) ** 2 + 0.5 * (1.0 - yv) + 0.2 * uv * yv],
            axis=1,
        )
        G = (uv * (0.5 - yv) - 0.3)[:, None]
        return F, G

    def jac_batch(x, Ys, Us):
        xv = x[0]
        uv = Us[:, 0]
        K = Us.shape[0]
        dfdx = np.broadcast_to(
            np.array([[2.0 * xv], [-2.0 * (1.0 - xv)]]), (K, 2, 1)
        )
        dfdy = np.empty((K, 2, 1))
        dfdy[:, 0, 0] = 1.0 - 0.2 * uv
        dfdy[:, 1, 0] = -0.5 + 0.2 * uv
        dgdx = np.zeros((K, 1, 1))
        dgdy = (-uv)[:, None, None]
        return dfdx, dfdy, dgdx, dgdy

    return ProblemSpec(
        variables=(
            VariableSpec("x", 0.0, 1.0, Role.HERE_AND_NOW, 0.5),
            VariableSpec("y", 0.0, 1.0, Role.WAIT_AND_SEE, 0.5),
        ),
        uncertainty=UncertaintySet(
            params=(UncertainParamSpec("u", -1.0, 1.0, 0.0),), geometry=Geometry.BOX
        ),
        n_objectives=2,
        n_constraints=1,
        evaluator=EvaluationHandle(fn=fn, jac=jac, fn_batch=fn_batch,
                                   jac_batch=jac_batch, name="sp1"),
        objective_names=("f1", "f2"),
        constraint_names=("g1",),
        name="sp1",
    )


def build_sp1_no_wsv(y_fixed: float = 0.5) -> ProblemSpec:
    """SP1 with the operational variable frozen; exercises the degenerate
    worst-case search where the inner problem is a plain evaluation."""

    def fn(x, y, u):
        xv, uv = x[0], u[0]
        f1 = xv**2 + y_fixed + 0.2 * uv * (1.0 - y_fixed)
        f2 = (1.0 - xv) ** 2 + 0.5 * (1.0 - y_fixed) + 0.2 * uv * y_fixed
        g = uv * (0.5 - y_fixed) - 0.3
        return np.array([f1, f2]), np.array([g])

    def jac(x, y, u):
        xv = x[0]
        dfdx = np.array([[2.0 * xv], [-2.0 * (1.0 - xv)]])
        empty = np.zeros((2, 0))
        return dfdx, empty, np.zeros((1, 1)), np.zeros((1, 0))

    return ProblemSpec(
        variables=(VariableSpec("x", 0.0, 1.0, Role.HERE_AND_NOW, 0.5),),
        uncertainty=UncertaintySet(
            params=(UncertainParamSpec("u", -1.0, 1.0, 0.0),), geometry=Geometry.BOX
        ),
        n_objectives=2,
        n_constraints=1,
        evaluator=EvaluationHandle(fn=fn, jac=jac, name="sp1_no_wsv"),
        name="sp1_no_wsv",
    )


def build_sp2() -> ProblemSpec:
    """Synthetic problem 2: two uncertain parameters and a capacity-style
    constraint ``0.25*(u1+u2) + x - y - 0.45 <= 0``.

    At the corner scenario (1, 1) the constraint requires ``y >= x + 0.05``,
    so designs with ``x > 0.95`` admit no feasible adjustment there while all
    other grid scenarios stay adjustable; that makes the corner the unique
    constraint worst case for tight designs.
    """

    def fn(x, y, u):
        xv, yv = x[0], y[0]
        u1, u2 = u[0], u[1]
        f1 = xv**2 + yv + 0.2 * u1 * (1.0 - yv)
        f2 = (1.0 - xv) ** 2 + 0.5 * (1.0 - yv) + 0.2 * u1 * yv
        g1 = u1 * (0.5 - yv) - 0.3
        g2 = 0.25 * (u1 + u2) + xv - yv - 0.45
        return np.array([f1, f2]), np.array([g1, g2])

    def jac(x, y, u):
        xv, yv = x[0], y[0]
        u1 = u[0]
        dfdx = np.array([[2.0 * xv], [-2.0 * (1.0 - xv)]])
        dfdy = np.array([[1.0 - 0.2 * u1], [-0.5 + 0.2 * u1]])
        dgdx = np.array([[0.0], [1.0]])
        dgdy = np.array([[-u1], [-1.0]])
        return dfdx, dfdy, dgdx, dgdy

    def fn_batch(x, Ys, Us):
        xv = x[0]
        yv = Ys[:, 0]
        u1, u2 = Us[:, 0], Us[:, 1]
        F = np.stack(
            [xv**2 + yv + 0.2 * u1 * (1.0 - yv),
             (1.0 - xv) ** 2 + 0.5 * (1.0 - yv) + 0.2 * u1 * yv],
            axis=1,
        )
        G = np.stack(
            [u1 * (0.5 - yv) - 0.3,
             0.25 * (u1 + u2) + xv - yv - 0.45],
            axis=1,
        )
        return F, G

    def jac_batch(x, Ys, Us):
        xv = x[0]
        u1 = Us[:, 0]
        K = Us.shape[0]
        dfdx = np.broadcast_to(
            np.array([[2.0 * xv], [-2.0 * (1.0 - xv)]]), (K, 2, 1)
        )
        dfdy = np.empty((K, 2, 1))
        dfdy[:, 0, 0] = 1.0 - 0.2 * u1
        dfdy[:, 1, 0] = -0.5 + 0.2 * u1
        dgdx = np.broadcast_to(np.array([[0.0], [1.0]]), (K, 2, 1))
        dgdy = np.empty((K, 2, 1))
        dgdy[:, 0, 0] = -u1
        dgdy[:, 1, 0] = -1.0
        return dfdx, dfdy, dgdx, dgdy

    return ProblemSpec(
        variables=(
            VariableSpec("x", 0.0, 1.0, Role.HERE_AND_NOW, 0.5),
            VariableSpec("y", 0.0, 1.0, Role.WAIT_AND_SEE, 0.5),
        ),
        uncertainty=UncertaintySet(
            params=(
                UncertainParamSpec("u1", -1.0, 1.0, 0.0),
                UncertainParamSpec("u2", -1.0, 1.0, 0.0),
            ),
            geometry=Geometry.BOX,
        ),
        n_objectives=2,
        n_constraints=2,
        evaluator=EvaluationHandle(fn=fn, jac=jac, fn_batch=fn_batch,
                                   jac_batch=jac_batch, name="sp2"),
        objective_names=("f1", "f2"),
        constraint_names=("g1", "capacity"),
        name="sp2",
    )


# Column surrogate coefficients.  Scales are chosen so both objectives are
# O(1) at the initial design and the feasible region is non-empty for every
# scenario of the three-level uncertainty grid.
_CAPEX_SCALE = 300.0
_OPEX_SCALE = 14.0
_PURITY_BOT_MIN = 0.985
_PURITY_TOP_MIN = 0.98
_REBOILER_CAP_PER_AREA = 0.010
_CONDENSER_CAP_PER_AREA = 0.011
_FFACTOR_MAX = 2.2


def _column_parts(x, y, u):
    """Intermediate quantities shared by the evaluator and its jacobian."""
    N, Nf, D, Ar, Ac = x
    RV, Qr = y
    load, frac, fac = u

    q = (Nf - 3.0 - 0.05 * N) / 37.0
    fp = 1.0 - 0.2 * q**2
    neff = N * fp
    dif_t = 1.0 + 8.0 * (frac - 0.78) + 10.0 * (fac - 1.0) * (frac - 0.79)
    dif_b = 1.0 + 1.5 * (0.82 - frac) + 2.0 * (1.0 - fac) * (0.81 - frac)
    e_t = np.log1p(RV) + 2.0 * Qr
    e_b = np.log1p(RV) + 0.8 * Qr
    s_t = neff * e_t / 9.0
    s_b = neff * e_b / 10.0
    purity_top = 1.0 - 0.5 * dif_t * np.exp(-s_t)
    purity_bot = 1.0 - 0.12 * dif_b * np.exp(-s_b)
    # A harder separation moves more vapor per ton of product, so the
    # equipment loads scale with the top-section difficulty as well.
    vapor = 0.6 + 0.4 * dif_t
    q_reb = 8.0 * load * Qr * vapor
    q_cond = 8.0 * load * (0.92 * Qr + 0.015 * RV) * vapor
    f_factor = load * (1.0 + RV) * vapor / D**2
    return (q, fp, neff, dif_t, dif_b, e_t, e_b, s_t, s_b,
            purity_top, purity_bot, q_reb, q_cond, f_factor)


def _column_fn(x, y, u):
    N, Nf, D, Ar, Ac = x
    RV, Qr = y
    load = u[0]
    (_, _, _, _, _, _, _, _, _,
     purity_top, purity_bot, q_reb, q_cond, f_factor) = _column_parts(x, y, u)

    capex = (3.0 * N**0.9 * D**1.4 + 1.2 * (Ar**0.65 + Ac**0.65)) / _CAPEX_SCALE
    opex = (60.0 * Qr + 2.0 * RV) / _OPEX_SCALE
    g = np.array([
        _PURITY_BOT_MIN - purity_bot,
        _PURITY_TOP_MIN - purity_top,
        q_reb - _REBOILER_CAP_PER_AREA * Ar,
        q_cond - _CONDENSER_CAP_PER_AREA * Ac,
        f_factor - _FFACTOR_MAX,
    ])
    return np.array([capex, opex]), g


def _column_jac(x, y, u):
    N, Nf, D, Ar, Ac = x
    RV, Qr = y
    load = u[0]
    (q, fp, neff, dif_t, dif_b, e_t, e_b, s_t, s_b,
     purity_top, purity_bot, q_reb, q_cond, f_factor) = _column_parts(x, y, u)

    dq_dN = -0.05 / 37.0
    dq_dNf = 1.0 / 37.0
    dfp_dN = -0.4 * q * dq_dN
    dfp_dNf = -0.4 * q * dq_dNf
    dneff_dN = fp + N * dfp_dN
    dneff_dNf = N * dfp_dNf

    # s = neff * e / scale; purity = 1 - a*dif*exp(-s)
    def purity_grads(a, dif, e, s, scale):
        common = a * dif * np.exp(-s)  # d(purity)/ds
        ds_dN = dneff_dN * e / scale
        ds_dNf = dneff_dNf * e / scale
        ds_dRV = neff / (scale * (1.0 + RV))
        ds_dQr = neff * (2.0 if scale == 9.0 else 0.8) / scale
        dx = np.array([common * ds_dN, common * ds_dNf, 0.0, 0.0, 0.0])
        dy = np.array([common * ds_dRV, common * ds_dQr])
        return dx, dy

    dpt_dx, dpt_dy = purity_grads(0.5, dif_t, e_t, s_t, 9.0)
    dpb_dx, dpb_dy = purity_grads(0.12, dif_b, e_b, s_b, 10.0)

    dfdx = np.array([
        [3.0 * 0.9 * N**-0.1 * D**1.4 / _CAPEX_SCALE,
         0.0,
         3.0 * 1.4 * N**0.9 * D**0.4 / _CAPEX_SCALE,
         1.2 * 0.65 * Ar**-0.35 / _CAPEX_SCALE,
         1.2 * 0.65 * Ac**-0.35 / _CAPEX_SCALE],
        [0.0, 0.0, 0.0, 0.0, 0.0],
    ])
    dfdy = np.array([
        [0.0, 0.0],
        [2.0 / _OPEX_SCALE, 60.0 / _OPEX_SCALE],
    ])

    dgdx = np.zeros((5, 5))
    dgdy = np.zeros((5, 2))
    dgdx[0] = -dpb_dx
    dgdy[0] = -dpb_dy
    dgdx[1] = -dpt_dx
    dgdy[1] = -dpt_dy
    dgdx[2, 3] = -_REBOILER_CAP_PER_AREA
    vapor = 0.6 + 0.4 * dif_t
    dgdy[2, 1] = 8.0 * load * vapor
    dgdx[3, 4] = -_CONDENSER_CAP_PER_AREA
    dgdy[3] = np.array([8.0 * load * 0.015 * vapor, 8.0 * load * 0.92 * vapor])
    dgdx[4, 2] = -2.0 * load * (1.0 + RV) * vapor / D**3
    dgdy[4, 0] = load * vapor / D**2
    return dfdx, dfdy, dgdx, dgdy


def _column_fn_batch(x, Ys, Us):
    N, Nf, D, Ar, Ac = x
    RV, Qr = Ys[:, 0], Ys[:, 1]
    load = Us[:, 0]
    K = Us.shape[0]
    (_, _, _, _, _, _, _, _, _,
     purity_top, purity_bot, q_reb, q_cond, f_factor) = _column_parts(
        x, (RV, Qr), (load, Us[:, 1], Us[:, 2]))
    capex = (3.0 * N**0.9 * D**1.4 + 1.2 * (Ar**0.65 + Ac**0.65)) / _CAPEX_SCALE
    opex = (60.0 * Qr + 2.0 * RV) / _OPEX_SCALE
    F = np.empty((K, 2))
    F[:, 0] = capex
    F[:, 1] = opex
    G = np.stack(
        [
            _PURITY_BOT_MIN - purity_bot,
            _PURITY_TOP_MIN - purity_top,
            q_reb - _REBOILER_CAP_PER_AREA * Ar,
            q_cond - _CONDENSER_CAP_PER_AREA * Ac,
            f_factor - _FFACTOR_MAX,
        ],
        axis=1,
    )
    return F, G


def _column_jac_batch(x, Ys, Us):
    N, Nf, D, Ar, Ac = x
    RV, Qr = Ys[:, 0], Ys[:, 1]
    load = Us[:, 0]
    K = Us.shape[0]
    (q, fp, neff, dif_t, dif_b, e_t, e_b, s_t, s_b,
     *_rest) = _column_parts(x, (RV, Qr), (load, Us[:, 1], Us[:, 2]))

    dq_dN = -0.05 / 37.0
    dq_dNf = 1.0 / 37.0
    dfp_dN = -0.4 * q * dq_dN
    dfp_dNf = -0.4 * q * dq_dNf
    dneff_dN = fp + N * dfp_dN
    dneff_dNf = N * dfp_dNf

    def purity_grads(a, dif, e, s, scale, qr_coeff):
        common = a * dif * np.exp(-s)  # (K,)
        ds_dN = dneff_dN * e / scale
        ds_dNf = dneff_dNf * e / scale
        ds_dRV = neff / (scale * (1.0 + RV))
        ds_dQr = np.full(K, neff * qr_coeff / scale)
        return common * ds_dN, common * ds_dNf, common * ds_dRV, common * ds_dQr

    pt_N, pt_Nf, pt_RV, pt_Qr = purity_grads(0.5, dif_t, e_t, s_t, 9.0, 2.0)
    pb_N, pb_Nf, pb_RV, pb_Qr = purity_grads(0.12, dif_b, e_b, s_b, 10.0, 0.8)

    dfdx = np.zeros((K, 2, 5))
    dfdx[:, 0, 0] = 3.0 * 0.9 * N**-0.1 * D**1.4 / _CAPEX_SCALE
    dfdx[:, 0, 2] = 3.0 * 1.4 * N**0.9 * D**0.4 / _CAPEX_SCALE
    dfdx[:, 0, 3] = 1.2 * 0.65 * Ar**-0.35 / _CAPEX_SCALE
    dfdx[:, 0, 4] = 1.2 * 0.65 * Ac**-0.35 / _CAPEX_SCALE
    dfdy = np.zeros((K, 2, 2))
    dfdy[:, 1, 0] = 2.0 / _OPEX_SCALE
    dfdy[:, 1, 1] = 60.0 / _OPEX_SCALE

    dgdx = np.zeros((K, 5, 5))
    dgdy = np.zeros((K, 5, 2))
    dgdx[:, 0, 0] = -pb_N
    dgdx[:, 0, 1] = -pb_Nf
    dgdy[:, 0, 0] = -pb_RV
    dgdy[:, 0, 1] = -pb_Qr
    dgdx[:, 1, 0] = -pt_N
    dgdx[:, 1, 1] = -pt_Nf
    dgdy[:, 1, 0] = -pt_RV
    dgdy[:, 1, 1] = -pt_Qr
    dgdx[:, 2, 3] = -_REBOILER_CAP_PER_AREA
    vapor = 0.6 + 0.4 * dif_t
    dgdy[:, 2, 1] = 8.0 * load * vapor
    dgdx[:, 3, 4] = -_CONDENSER_CAP_PER_AREA
    dgdy[:, 3, 0] = 8.0 * load * 0.015 * vapor
    dgdy[:, 3, 1] = 8.0 * load * 0.92 * vapor
    dgdx[:, 4, 2] = -2.0 * load * (1.0 + RV) * vapor / D**3
    dgdy[:, 4, 0] = load * vapor / D**2
    return dfdx, dfdy, dgdx, dgdy


def build_column_surrogate() -> ProblemSpec:
    """Smooth surrogate of the binary distillation design problem."""
    return ProblemSpec(
        variables=(
            VariableSpec("N", 10.0, 150.0, Role.HERE_AND_NOW, 33.0),
            VariableSpec("N_f", 3.0, 40.0, Role.HERE_AND_NOW, 5.0),
            VariableSpec("D", 0.8, 2.0, Role.HERE_AND_NOW, 1.09),
            VariableSpec("A_r", 50.0, 1000.0, Role.HERE_AND_NOW, 216.98),
            VariableSpec("A_c", 50.0, 1000.0, Role.HERE_AND_NOW, 191.91),
            VariableSpec("R_V", 0.5, 2.0, Role.WAIT_AND_SEE, 0.74),
            VariableSpec("Q_r", 0.0625, 0.375, Role.WAIT_AND_SEE, 0.21),
        ),
        uncertainty=UncertaintySet(
            params=(
                UncertainParamSpec("load", 0.6, 1.2, 1.0),
                UncertainParamSpec("w_feed", 0.78, 0.82, 0.8),
                UncertainParamSpec("act_factor", 0.9, 1.1, 1.0),
            ),
            geometry=Geometry.BOX,
        ),
        n_objectives=2,
        n_constraints=5,
        evaluator=EvaluationHandle(fn=_column_fn, jac=_column_jac,
                                   fn_batch=_column_fn_batch,
                                   jac_batch=_column_jac_batch,
                                   name="column_surrogate"),
        objective_names=("capex", "opex"),
        constraint_names=(
            "purity_bottom",
            "purity_top",
            "reboiler_duty",
            "condenser_duty",
            "f_factor",
        ),
        name="column_surrogate",
    )


BUILTIN_PROBLEMS = {
    "sp1": build_sp1,
    "sp2": build_sp2,
    "column_surrogate": build_column_surrogate,
}


def build(name: str) -> ProblemSpec:
    """Look up a built-in problem by name."""
    try:
        factory = BUILTIN_PROBLEMS[name]
    except KeyError:
        raise KeyError(
            f"unknown built-in problem {name!r}; available: {sorted(BUILTIN_PROBLEMS)}"
        ) from None
    return factory()
