"""Real-time navigation over a precomputed worst-case front.

The navigated point moves along the piecewise-linear interpolation of the
front, driven by per-objective slider targets and upper-bound restrictions.
Re-optimized nominal values are interpolated with the same coefficients,
and the comparable non-robust point is recomputed per move by intersecting
the improvement ray with the nominal front, so the price of robustness
updates live.  All state transitions are pure functions of
``(session, command)``.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np

from .errors import InfeasibleRestrictions, MissingNsr
from .front import FrontApproximation
from .price import IntersectionFlags, NsrResult, intersect_nominal_front


@dataclass(frozen=True)
class Markers:
    f_nav: np.ndarray
    nsr: np.ndarray
    mo: np.ndarray
    price: np.ndarray
    alpha: float
    flags: IntersectionFlags
    nominal_lam: np.ndarray


@dataclass(frozen=True)
class NavigationSession:
    maro_front: FrontApproximation
    nominal_front: FrontApproximation
    nsr_values: tuple[NsrResult, ...]
    lam: np.ndarray
    restrictions: np.ndarray  # per-objective upper bounds (+inf = none)
    markers: Markers
    clamped: bool = False
    revision: int = 0

    @property
    def n_points(self) -> int:
        return len(self.maro_front)


# -- polyline positions ----------------------------------------------------


def _lambda_from_position(n: int, i: int, s: float) -> np.ndarray:
    lam = np.zeros(n)
    if n == 1:
        lam[0] = 1.0
        return lam
    if s <= 0.0:
        lam[i] = 1.0
    elif s >= 1.0:
        lam[i + 1] = 1.0
    else:
        lam[i] = 1.0 - s
        lam[i + 1] = s
    return lam


def _position_from_lambda(lam: np.ndarray) -> tuple[int, float]:
    support = np.nonzero(lam > 0)[0]
    if len(support) == 1:
        i = int(support[0])
        return (i, 0.0) if i < len(lam) - 1 else (i - 1, 1.0) if len(lam) > 1 else (0, 0.0)
    i = int(support[0])
    return i, float(lam[support[1]])


def _blend(vectors: Sequence[np.ndarray], lam: np.ndarray) -> np.ndarray:
    """Convex combination; pass stored vectors through bit-exactly when a
    single coefficient is one (anchor points)."""
    support = np.nonzero(lam > 0)[0]
    if len(support) == 1 and lam[support[0]] == 1.0:
        return np.array(vectors[int(support[0])], dtype=float)
    out = np.zeros_like(np.asarray(vectors[0], dtype=float))
    for i in support:
        out = out + lam[i] * np.asarray(vectors[i], dtype=float)
    return out


def _objective_values(front: FrontApproximation, j: int) -> np.ndarray:
    return front.objectives()[:, j]


def _position_for_target(front: FrontApproximation, j: int, target: float) -> tuple[int, float]:
    """Polyline position where objective j equals the target (objective 0 is
    increasing along the front, objective 1 decreasing)."""
    vals = _objective_values(front, j)
    n = len(vals)
    if n == 1:
        return 0, 0.0
    increasing = vals[-1] >= vals[0]
    v = vals if increasing else -vals
    t = target if increasing else -target
    if t <= v[0]:
        return 0, 0.0
    if t >= v[-1]:
        return n - 2, 1.0
    i = int(np.searchsorted(v, t, side="right")) - 1
    i = min(max(i, 0), n - 2)
    span = v[i + 1] - v[i]
    s = 0.0 if span <= 0 else float((t - v[i]) / span)
    return i, min(max(s, 0.0), 1.0)


def _pos_key(pos: tuple[int, float]) -> float:
    return pos[0] + pos[1]


def _feasible_interval(
    front: FrontApproximation, restrictions: np.ndarray
) -> tuple[tuple[int, float], tuple[int, float]]:
    """Position interval satisfying all restrictions; raises when empty."""
    n = len(front)
    lo: tuple[int, float] = (0, 0.0)
    hi: tuple[int, float] = (max(n - 2, 0), 1.0) if n > 1 else (0, 0.0)
    for j, bound in enumerate(restrictions):
        if not np.isfinite(bound):
            continue
        vals = _objective_values(front, j)
        if np.min(vals) > bound + 1e-12:
            raise InfeasibleRestrictions(
                f"bound {bound} on objective {j} excludes the whole front"
            )
        if n == 1:
            continue
        pos = _position_for_target(front, j, float(bound))
        if vals[-1] >= vals[0]:  # increasing: restriction caps from above
            hi = min(hi, pos, key=_pos_key)
        else:
            lo = max(lo, pos, key=_pos_key)
    if _pos_key(lo) > _pos_key(hi) + 1e-12:
        raise InfeasibleRestrictions("restrictions exclude the whole front")
    return lo, hi


# -- markers ----------------------------------------------------------------


def _compute_markers(
    maro_front: FrontApproximation,
    nominal_front: FrontApproximation,
    nsr_values: tuple[NsrResult, ...],
    lam: np.ndarray,
) -> Markers:
    f_nav = _blend([p.objectives for p in maro_front.points], lam)
    nsr = _blend([r.objectives for r in nsr_values], lam)
    d = nsr - f_nav
    inter = intersect_nominal_front(f_nav, d, nominal_front)
    if inter.flags.d_zero:
        p = np.zeros_like(f_nav)
    else:
        p = nsr - inter.f_mo
    return Markers(
        f_nav=f_nav,
        nsr=nsr,
        mo=inter.f_mo,
        price=p,
        alpha=inter.alpha,
        flags=inter.flags,
        nominal_lam=inter.lam,
    )


# -- session operations ------------------------------------------------------


def open_session(
    maro_front: FrontApproximation,
    nominal_front: FrontApproximation,
    nsr_values: Sequence[NsrResult],
) -> NavigationSession:
    """Session at the balanced start (midway between the two middle points),
    no restrictions."""
    n = len(maro_front)
    if len(nsr_values) != n:
        raise MissingNsr(
            f"need one re-optimized value per front point: {len(nsr_values)} != {n}"
        )
    lam = np.zeros(n)
    if n == 1:
        lam[0] = 1.0
    else:
        mid = (n - 1) // 2
        lam[mid] = 0.5
        lam[mid + 1] = 0.5
    markers = _compute_markers(maro_front, nominal_front, tuple(nsr_values), lam)
    return NavigationSession(
        maro_front=maro_front,
        nominal_front=nominal_front,
        nsr_values=tuple(nsr_values),
        lam=lam,
        restrictions=np.full(maro_front.ideal.size, np.inf),
        markers=markers,
    )


def _with_position(session: NavigationSession, pos: tuple[int, float], clamped: bool):
    lam = _lambda_from_position(session.n_points, pos[0], pos[1])
    markers = _compute_markers(
        session.maro_front, session.nominal_front, session.nsr_values, lam
    )
    return replace(
        session, lam=lam, markers=markers, clamped=clamped,
        revision=session.revision + 1,
    )


def move_slider(session: NavigationSession, objective: int, target: float) -> NavigationSession:
    """Move the navigated point so the given objective hits the target,
    clamped into the range allowed by the front and the restrictions."""
    if session.n_points == 1:
        return replace(session, revision=session.revision + 1, clamped=False)
    lo, hi = _feasible_interval(session.maro_front, session.restrictions)
    pos = _position_for_target(session.maro_front, objective, float(target))
    clamped = False
    vals = _objective_values(session.maro_front, objective)
    span = (np.min(vals), np.max(vals))
    if target < span[0] - 1e-12 or target > span[1] + 1e-12:
        clamped = True
    if _pos_key(pos) < _pos_key(lo):
        pos, clamped = lo, True
    elif _pos_key(pos) > _pos_key(hi):
        pos, clamped = hi, True
    return _with_position(session, pos, clamped)


def set_restriction(
    session: NavigationSession, objective: int, bound: Optional[float]
) -> NavigationSession:
    """Record an upper bound for one objective; the navigated point projects
    onto the remaining feasible stretch if it became excluded."""
    restrictions = session.restrictions.copy()
    restrictions[objective] = np.inf if bound is None else float(bound)
    lo, hi = _feasible_interval(session.maro_front, restrictions)  # may raise
    session = replace(session, restrictions=restrictions)
    if session.n_points == 1:
        return replace(session, revision=session.revision + 1, clamped=False)
    pos = _position_from_lambda(session.lam)
    clamped = False
    if _pos_key(pos) < _pos_key(lo):
        pos, clamped = lo, True
    elif _pos_key(pos) > _pos_key(hi):
        pos, clamped = hi, True
    return _with_position(session, pos, clamped)


def reset(session: NavigationSession) -> NavigationSession:
    """Back to the balanced start with all restrictions cleared."""
    fresh = open_session(session.maro_front, session.nominal_front, session.nsr_values)
    return replace(fresh, revision=session.revision + 1)


# -- snapshot -----------------------------------------------------------------


def _named(names: Sequence[str], values: np.ndarray) -> dict:
    return {n: float(v) for n, v in zip(names, values)}


def snapshot(session: NavigationSession, objective_names: Sequence[str],
             hnv_names: Sequence[str], wsv_names: Sequence[str]) -> dict:
    """Full JSON-ready view of the session: navigated point, markers, and
    interpolated variable read-outs (blends of anchor solutions, not
    re-optimized values)."""
    m = session.markers
    maro_points = session.maro_front.points
    x_blend = _blend([p.solution.x for p in maro_points], session.lam)
    if wsv_names:
        y_rob = _blend(
            [
                p.solution.y_for(
                    p.solution.nominal_scenario_id
                    if p.solution.nominal_scenario_id is not None else -1,
                    np.zeros(len(wsv_names)),
                )
                for p in maro_points
            ],
            session.lam,
        )
        y_nsr = _blend([r.y for r in session.nsr_values], session.lam)
    else:
        y_rob = np.zeros(0)
        y_nsr = np.zeros(0)
    nom_points = session.nominal_front.points
    x_nom = _blend([p.solution.x for p in nom_points], m.nominal_lam)
    if wsv_names:
        y_nom = _blend(
            [next(iter(p.solution.y_by_scenario.values())) for p in nom_points],
            m.nominal_lam,
        )
    else:
        y_nom = np.zeros(0)
    return {
        "lambda": [float(v) for v in session.lam],
        "f_nav": _named(objective_names, m.f_nav),
        "markers": {
            "nsr": _named(objective_names, m.nsr),
            "mo": _named(objective_names, m.mo),
            "price": _named(objective_names, m.price),
        },
        "alpha_star": float(m.alpha),
        "flags": {
            "d_zero": m.flags.d_zero,
            "ray_misses_front": m.flags.ray_misses_front,
            "clamped": session.clamped,
        },
        "restrictions": {
            n: (None if not np.isfinite(v) else float(v))
            for n, v in zip(objective_names, session.restrictions)
        },
        "variables": {
            "hnv": _named(hnv_names, x_blend),
            "wsv_robust": _named(wsv_names, y_rob),
            "wsv_nsr": _named(wsv_names, y_nsr),
            "hnv_nominal": _named(hnv_names, x_nom),
            "wsv_nominal": _named(wsv_names, y_nom),
        },
        "revision": session.revision,
    }
