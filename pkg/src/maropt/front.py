"""Bi-objective Pareto front approximation by sandwiching.

Fronts are assumed convex (detected and reported otherwise).  Each solved
weighted-sum point contributes a supporting line, so the front is enclosed
between the piecewise-linear interpolation of the solved points (inner
approximation) and the upper envelope of the supporting lines (outer
approximation).  The certified gap between the two is the approximation
quality; refinement always splits the segment with the largest gap.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field, replace
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DisjointRanges, InfeasibleModel
from .robust import ParetoPoint, ScalarizationSpec, SolveMode

log = logging.getLogger(__name__)

DEFAULT_GAP = 0.01
DEFAULT_MAX_SOLVES = 20
LEXI_TOL = 1e-6

#: A supporting line ``w . F >= v`` valid for the whole front.
Support = tuple[tuple[float, ...], float]

#: Solver callback: weighted-sum scalarization plus optional per-objective
#: upper bounds (used by the lexicographic stages) -> ParetoPoint.
SolverCallback = Callable[[ScalarizationSpec, Optional[Sequence[Optional[float]]]], ParetoPoint]


@dataclass
class FrontApproximation:
    """Ordered nondominated points with sandwich bounds and provenance."""

    points: tuple[ParetoPoint, ...]
    mode: SolveMode
    ideal: np.ndarray
    nadir: np.ndarray
    point_supports: tuple[tuple[Support, ...], ...]
    gap: Optional[float]
    warnings: tuple[str, ...] = ()

    def __len__(self) -> int:
        return len(self.points)

    def objectives(self) -> np.ndarray:
        return np.array([p.objectives for p in self.points])

    @property
    def f1_range(self) -> tuple[float, float]:
        obj = self.objectives()
        return float(obj[0, 0]), float(obj[-1, 0])

    def interpolate(self, f1) -> np.ndarray:
        """Piecewise-linear inner approximation, evaluated at first-objective
        values (must lie within the front's range)."""
        obj = self.objectives()
        f1 = np.atleast_1d(np.asarray(f1, dtype=float))
        lo, hi = self.f1_range
        if np.any(f1 < lo - 1e-9) or np.any(f1 > hi + 1e-9):
            raise ValueError("interpolation outside the front's range")
        return np.interp(f1, obj[:, 0], obj[:, 1])

    @property
    def scale(self) -> np.ndarray:
        return np.maximum(self.nadir - self.ideal, 1e-12)

    def to_json(self) -> dict:
        return {
            "mode": self.mode.value,
            "ideal": [float(v) for v in self.ideal],
            "nadir": [float(v) for v in self.nadir],
            "gap": None if self.gap is None else float(self.gap),
            "warnings": list(self.warnings),
            "points": [p.to_json() for p in self.points],
            "point_supports": [
                [[list(w), float(v)] for (w, v) in sup] for sup in self.point_supports
            ],
        }

    @classmethod
    def from_json(cls, data: dict) -> "FrontApproximation":
        return cls(
            points=tuple(ParetoPoint.from_json(p) for p in data["points"]),
            mode=SolveMode(data["mode"]),
            ideal=np.array(data["ideal"], dtype=float),
            nadir=np.array(data["nadir"], dtype=float),
            point_supports=tuple(
                tuple((tuple(float(x) for x in w), float(v)) for w, v in sup)
                for sup in data["point_supports"]
            ),
            gap=None if data["gap"] is None else float(data["gap"]),
            warnings=tuple(data["warnings"]),
        )


@dataclass
class ExtremeCompromises:
    """Per-objective lexicographic optima: front endpoints.

    ``support_values[j]`` is the plain minimum of objective ``j`` (the
    first-stage optimum), which is a valid lower bound for the whole front.
    """

    points: tuple[ParetoPoint, ...]
    support_values: tuple[float, ...]


def extreme_compromises(solver: SolverCallback, lexi_tol: float = LEXI_TOL) -> ExtremeCompromises:
    """Two-stage lexicographic endpoints: minimize one objective, then the
    other subject to staying within ``lexi_tol`` of the first optimum.

    The returned points carry the weights of the objective they minimize
    (the second stage only breaks ties), so downstream preference defaults
    read naturally.
    """
    points = []
    support_values = []
    for j in range(2):
        # An adaptive solver may grow its scenario set during the second
        # stage, leaving a first-stage bound that is a hair too tight; in
        # that case rebuild the bound on the grown set and retry.
        for attempt in range(4):
            stage1 = solver(ScalarizationSpec.unit(j, 2), None)
            bounds: list[Optional[float]] = [None, None]
            bounds[j] = float(stage1.objectives[j]) + lexi_tol
            try:
                stage2 = solver(ScalarizationSpec.unit(1 - j, 2), bounds)
            except InfeasibleModel:
                if attempt == 3:
                    raise
                continue
            break
        stage2 = replace(stage2, scalarization=ScalarizationSpec.unit(j, 2))
        points.append(stage2)
        support_values.append(float(min(stage1.objectives[j], stage2.objectives[j])))
    return ExtremeCompromises(points=tuple(points), support_values=tuple(support_values))


# -- normalized geometry helpers ------------------------------------------


def _normalize_objs(F, ideal, scale):
    return (np.asarray(F, dtype=float) - ideal) / scale


def _normalize_support(support: Support, ideal, scale) -> tuple[np.ndarray, float]:
    w = np.array(support[0], dtype=float)
    v = float(support[1])
    wn = w * scale
    total = float(wn.sum())
    if total <= 0:
        return np.array([0.5, 0.5]), -np.inf
    return wn / total, (v - float(w @ ideal)) / total


def _segment_weights(a_n, b_n) -> Optional[np.ndarray]:
    """Inward normal of the segment between two normalized points (sum one);
    None when the segment is degenerate for a decreasing front."""
    w = np.array([a_n[1] - b_n[1], b_n[0] - a_n[0]])
    if w[0] < -1e-12 or w[1] < -1e-12:
        return None
    total = float(w.sum())
    if total <= 1e-15:
        return None
    return w / total


def _segment_gap(a_n, b_n, supports_a, supports_b, ideal, scale) -> Optional[float]:
    """Certified sandwich gap of one inner segment, from the tightest pair of
    supporting lines at its endpoints.  None when uncertifiable."""
    w_seg = _segment_weights(a_n, b_n)
    if w_seg is None:
        return 0.0
    c_inner = float(w_seg @ a_n)
    best: Optional[float] = None
    for sa in supports_a:
        wa, va = _normalize_support(sa, ideal, scale)
        for sb in supports_b:
            wb, vb = _normalize_support(sb, ideal, scale)
            A = np.array([wa, wb])
            det = A[0, 0] * A[1, 1] - A[0, 1] * A[1, 0]
            if abs(det) < 1e-14:
                # Parallel tangents only certify a locally flat segment,
                # where both lines run along the segment normal.
                if np.max(np.abs(wa - w_seg)) > 1e-6:
                    continue
                gap = max(0.0, c_inner - max(va, vb))
            else:
                q = np.linalg.solve(A, np.array([va, vb]))
                gap = max(0.0, c_inner - float(w_seg @ q))
            best = gap if best is None else min(best, gap)
    return best


def build_front(
    points: Sequence[ParetoPoint],
    mode: SolveMode,
    supports: Optional[Sequence[Sequence[Support]]] = None,
    ideal: Optional[np.ndarray] = None,
    nadir: Optional[np.ndarray] = None,
    warnings: Sequence[str] = (),
) -> FrontApproximation:
    """Assemble an approximation: sort by the first objective, drop
    duplicates and dominated points, compute normalization and gap."""
    if not points:
        raise ValueError("cannot build a front from zero points")
    sup = [list(s) for s in supports] if supports is not None else [[] for _ in points]
    order = sorted(range(len(points)), key=lambda i: (points[i].objectives[0],
                                                      points[i].objectives[1]))
    kept: list[int] = []
    for i in order:
        f1, f2 = points[i].objectives
        if kept:
            pf1, pf2 = points[kept[-1]].objectives
            if abs(f1 - pf1) <= 1e-9:
                # Same first objective: keep the better second objective,
                # merging the supporting lines.
                if f2 < pf2 - 1e-12:
                    sup[i] = sup[kept[-1]] + sup[i]
                    kept[-1] = i
                else:
                    sup[kept[-1]] = sup[kept[-1]] + sup[i]
                continue
            if f2 >= pf2 - 1e-12:
                continue  # dominated by the previous kept point
        kept.append(i)
    pts = tuple(points[i] for i in kept)
    objs_kept = np.array([points[i].objectives for i in kept])
    # Reconcile supports with the points: a supporting value may carry the
    # solver tolerance of the weighted-sum solve that produced it, so clamp
    # it to the attained inner minimum (more conservative, still a bound).
    point_supports = tuple(
        tuple(
            (w, min(float(v), float(np.min(objs_kept @ np.asarray(w)))))
            for (w, v) in sup[i]
        )
        for i in kept
    )
    objs = np.array([p.objectives for p in pts])
    ideal_v = np.asarray(ideal, dtype=float) if ideal is not None else objs.min(axis=0)
    nadir_v = np.asarray(nadir, dtype=float) if nadir is not None else objs.max(axis=0)
    scale = np.maximum(nadir_v - ideal_v, 1e-12)

    gap: Optional[float] = 0.0
    for i in range(len(pts) - 1):
        a_n = _normalize_objs(pts[i].objectives, ideal_v, scale)
        b_n = _normalize_objs(pts[i + 1].objectives, ideal_v, scale)
        if not point_supports[i] or not point_supports[i + 1]:
            gap = None
            break
        seg = _segment_gap(a_n, b_n, point_supports[i], point_supports[i + 1],
                           ideal_v, scale)
        if seg is None:
            gap = None
            break
        gap = max(gap, seg)

    return FrontApproximation(
        points=pts,
        mode=mode,
        ideal=ideal_v,
        nadir=nadir_v,
        point_supports=point_supports,
        gap=gap,
        warnings=tuple(warnings),
    )


def sandwich(
    solver: SolverCallback,
    mode: SolveMode,
    eps: float = DEFAULT_GAP,
    max_solves: int = DEFAULT_MAX_SOLVES,
) -> FrontApproximation:
    """Adaptive weighted-sum refinement until the certified normalized gap
    drops below ``eps`` (or the solve budget runs out)."""
    ec = extreme_compromises(solver)
    left, right = ec.points
    warnings: list[str] = []
    if np.allclose(left.objectives, right.objectives, atol=1e-9):
        return build_front([left], mode, supports=[[((1.0, 0.0), ec.support_values[0]),
                                                    ((0.0, 1.0), ec.support_values[1])]])
    if left.objectives[0] > right.objectives[0]:
        left, right = right, left
    entries: list[dict] = [
        {"point": left, "supports": [((1.0, 0.0), ec.support_values[0])]},
        {"point": right, "supports": [((0.0, 1.0), ec.support_values[1])]},
    ]
    # Segments refer to entries by identity; flags: certified, closed.
    segments = [{"a": entries[0], "b": entries[1], "certified": True,
                 "closed": False, "last_gap": None}]
    ideal = np.minimum(left.objectives, right.objectives)
    nadir = np.maximum(left.objectives, right.objectives)
    scale = np.maximum(nadir - ideal, 1e-12)
    solves = 0

    def seg_gap(seg) -> Optional[float]:
        if not seg["certified"]:
            return None
        a_n = _normalize_objs(seg["a"]["point"].objectives, ideal, scale)
        b_n = _normalize_objs(seg["b"]["point"].objectives, ideal, scale)
        return _segment_gap(a_n, b_n, seg["a"]["supports"], seg["b"]["supports"],
                            ideal, scale)

    while solves < max_solves:
        open_gaps = [(seg_gap(s), s) for s in segments if not s["closed"] and s["certified"]]
        open_gaps = [(g, s) for g, s in open_gaps if g is not None]
        if not open_gaps:
            break
        gap, seg = max(open_gaps, key=lambda t: t[0])
        if gap <= eps:
            break
        a, b = seg["a"], seg["b"]
        a_n = _normalize_objs(a["point"].objectives, ideal, scale)
        b_n = _normalize_objs(b["point"].objectives, ideal, scale)
        w_n = _segment_weights(a_n, b_n)
        if w_n is None:
            seg["closed"] = True
            continue
        w_raw = w_n / scale
        spec_w = ScalarizationSpec(tuple(w_raw / w_raw.sum()))
        point = solver(spec_w, None)
        solves += 1
        v_raw = float(np.array(spec_w.weights) @ point.objectives)
        support: Support = (spec_w.weights, v_raw)
        wn, vn = _normalize_support(support, ideal, scale)
        # Compare the new supporting value against the chord in the solved
        # weight's own direction.
        chord_val = float(wn @ _normalize_objs(a["point"].objectives, ideal, scale))
        chord_val = min(chord_val,
                        float(wn @ _normalize_objs(b["point"].objectives, ideal, scale)))
        if vn > chord_val + 1e-6:
            warnings.append(
                f"non-convexity detected at weights {spec_w.weights}: "
                f"solved value above the inner approximation"
            )
            seg["certified"] = False
            p1 = float(point.objectives[0])
            dominated = any(
                np.all(e["point"].objectives <= point.objectives + 1e-12)
                for e in entries
            )
            if not dominated and a["point"].objectives[0] + 1e-9 < p1 < b["point"].objectives[0] - 1e-9:
                entry = {"point": point, "supports": []}
                entries.append(entry)
                segments = [s for s in segments if s is not seg]
                segments.append({"a": a, "b": entry, "certified": False,
                                 "closed": False, "last_gap": None})
                segments.append({"a": entry, "b": b, "certified": False,
                                 "closed": False, "last_gap": None})
            continue
        p_n = _normalize_objs(point.objectives, ideal, scale)
        if np.max(np.abs(p_n - a_n)) <= 1e-9 or np.max(np.abs(p_n - b_n)) <= 1e-9:
            # Solve landed on an endpoint: the new tangent tightens the gap.
            target = a if np.max(np.abs(p_n - a_n)) <= 1e-9 else b
            target["supports"].append(support)
            new_gap = seg_gap(seg)
            if new_gap is not None and seg["last_gap"] is not None and new_gap >= seg["last_gap"] - 1e-12:
                seg["closed"] = True  # no further progress possible here
            seg["last_gap"] = new_gap
            continue
        entry = {"point": point, "supports": [support]}
        entries.append(entry)
        segments = [s for s in segments if s is not seg]
        segments.append({"a": a, "b": entry, "certified": seg["certified"],
                         "closed": False, "last_gap": None})
        segments.append({"a": entry, "b": b, "certified": seg["certified"],
                         "closed": False, "last_gap": None})

    return build_front(
        [e["point"] for e in entries],
        mode,
        supports=[e["supports"] for e in entries],
        warnings=warnings,
    )


def schedule_weights(n_points: int) -> list[float]:
    """First-objective weights for the interior of an evenly spaced
    schedule of ``n_points`` front points (endpoints are lexicographic)."""
    if n_points < 2:
        raise ValueError("a front schedule needs at least the two endpoints")
    return [float(w) for w in np.linspace(1.0, 0.0, n_points)[1:-1]]


def solve_front_schedule(
    solver: SolverCallback, mode: SolveMode, n_points: int = 8
) -> FrontApproximation:
    """Front from a fixed schedule: lexicographic endpoints plus evenly
    spaced interior weighted-sum solves (high first-objective weight first,
    so consecutive solves warm-start their neighbors)."""
    ec = extreme_compromises(solver)
    points = [ec.points[0]]
    supports: list[list[Support]] = [[((1.0, 0.0), ec.support_values[0])]]
    for w1 in schedule_weights(n_points):
        spec_w = ScalarizationSpec((w1, 1.0 - w1))
        p = solver(spec_w, None)
        points.append(p)
        supports.append([(spec_w.weights, float(np.array(spec_w.weights) @ p.objectives))])
    points.append(ec.points[1])
    supports.append([((0.0, 1.0), ec.support_values[1])])
    return build_front(points, mode, supports=supports)


@dataclass
class DominanceReport:
    """Signed vertical distance of one interpolant above another."""

    max_above: float
    at_f1: float
    shared_range: tuple[float, float]


def dominance_check(
    front_a: FrontApproximation,
    front_b: FrontApproximation,
    normalization: Optional[tuple[np.ndarray, np.ndarray]] = None,
) -> DominanceReport:
    """Largest amount by which front_a's interpolant exceeds front_b's over
    their shared first-objective range (positive means a is above b)."""
    lo = max(front_a.f1_range[0], front_b.f1_range[0])
    hi = min(front_a.f1_range[1], front_b.f1_range[1])
    if lo > hi + 1e-12:
        raise DisjointRanges(
            f"fronts share no first-objective range: "
            f"{front_a.f1_range} vs {front_b.f1_range}"
        )
    breakpoints = np.concatenate([
        front_a.objectives()[:, 0], front_b.objectives()[:, 0], [lo, hi]
    ])
    breakpoints = np.unique(np.clip(breakpoints, lo, hi))
    diff = front_a.interpolate(breakpoints) - front_b.interpolate(breakpoints)
    if normalization is not None:
        ideal, nadir = normalization
        diff = diff / max(float(nadir[1] - ideal[1]), 1e-12)
    idx = int(np.argmax(diff))
    return DominanceReport(
        max_above=float(diff[idx]),
        at_f1=float(breakpoints[idx]),
        shared_range=(float(lo), float(hi)),
    )


def compare_fronts(
    front_a: FrontApproximation, front_b: FrontApproximation
) -> float:
    """Max componentwise difference between paired points, normalized by
    front_b's ideal-nadir ranges.  Fronts must have the same point count."""
    if len(front_a) != len(front_b):
        raise ValueError(
            f"fronts have different point counts: {len(front_a)} vs {len(front_b)}"
        )
    diff = np.abs(front_a.objectives() - front_b.objectives()) / front_b.scale
    return float(diff.max())
