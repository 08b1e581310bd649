"""Two-stage uncertain multi-objective problem definition and evaluation.

A problem couples first-stage design variables (fixed before the uncertainty
realizes) with second-stage operational variables (adjustable afterwards),
an uncertainty set over model parameters, and an evaluator mapping
``(x, y, u)`` to objective and constraint vectors.  Constraints use the
convention ``g(x, y, u) <= 0`` means satisfied.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .errors import DimensionMismatch, NonFiniteEvaluation

#: Objective/constraint value substituted when the model returns NaN/Inf,
#: so that solvers treat the point as strongly infeasible instead of crashing.
PENALTY_VALUE = 1e10

_EMPTY = np.zeros(0)


class Role(enum.Enum):
    HERE_AND_NOW = "here_and_now"
    WAIT_AND_SEE = "wait_and_see"


@dataclass(frozen=True)
class VariableSpec:
    """One decision variable with its box domain and stage role."""

    name: str
    lower: float
    upper: float
    role: Role
    initial: float

    def __post_init__(self):
        if not self.lower < self.upper:
            raise ValueError(f"variable {self.name}: lower must be < upper")
        if not self.lower <= self.initial <= self.upper:
            raise ValueError(f"variable {self.name}: initial outside bounds")


@dataclass(frozen=True)
class UncertainParamSpec:
    """One uncertain model parameter with its range and nominal value."""

    name: str
    lower: float
    upper: float
    nominal: float

    def __post_init__(self):
        if not self.lower <= self.nominal <= self.upper:
            raise ValueError(f"parameter {self.name}: nominal outside bounds")


class Geometry(enum.Enum):
    BOX = "box"
    ELLIPSOID = "ellipsoid"


@dataclass(frozen=True)
class UncertaintySet:
    """Box- or ellipsoid-shaped uncertainty region over the parameters."""

    params: tuple[UncertainParamSpec, ...]
    geometry: Geometry = Geometry.BOX
    ellipsoid_center: Optional[tuple[float, ...]] = None
    ellipsoid_radii: Optional[tuple[float, ...]] = None

    def __post_init__(self):
        object.__setattr__(self, "params", tuple(self.params))
        if self.geometry is Geometry.ELLIPSOID:
            if self.ellipsoid_center is None or self.ellipsoid_radii is None:
                raise ValueError("ellipsoid geometry needs center and radii")
            center = tuple(float(c) for c in self.ellipsoid_center)
            radii = tuple(float(r) for r in self.ellipsoid_radii)
            if len(center) != self.dim or len(radii) != self.dim:
                raise ValueError("ellipsoid center/radii dimension mismatch")
            if any(r <= 0 for r in radii):
                raise ValueError("ellipsoid radii must be positive")
            for c, p in zip(center, self.params):
                if not p.lower <= c <= p.upper:
                    raise ValueError(
                        f"ellipsoid center outside bounds of parameter {p.name}"
                    )
            object.__setattr__(self, "ellipsoid_center", center)
            object.__setattr__(self, "ellipsoid_radii", radii)

    @property
    def dim(self) -> int:
        return len(self.params)

    @property
    def nominal(self) -> np.ndarray:
        return np.array([p.nominal for p in self.params])

    @property
    def lower(self) -> np.ndarray:
        return np.array([p.lower for p in self.params])

    @property
    def upper(self) -> np.ndarray:
        return np.array([p.upper for p in self.params])

    def contains(self, u: np.ndarray, tol: float = 1e-9) -> bool:
        u = np.asarray(u, dtype=float)
        if u.shape != (self.dim,):
            return False
        if np.any(u < self.lower - tol) or np.any(u > self.upper + tol):
            return False
        if self.geometry is Geometry.ELLIPSOID:
            c = np.array(self.ellipsoid_center)
            r = np.array(self.ellipsoid_radii)
            return float(np.sum(((u - c) / r) ** 2)) <= 1.0 + tol
        return True


#: Evaluator signature: (x, y, u) -> (objectives, constraints).
EvalFn = Callable[[np.ndarray, np.ndarray, np.ndarray], tuple[np.ndarray, np.ndarray]]

#: Jacobian signature: (x, y, u) -> (df/dx, df/dy, dg/dx, dg/dy) with shapes
#: (M, nx), (M, ny), (C, nx), (C, ny).
JacFn = Callable[
    [np.ndarray, np.ndarray, np.ndarray],
    tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray],
]


@dataclass(frozen=True)
class EvaluationHandle:
    """Deterministic, smooth model callable with optional analytic jacobian.

    The callable must be pure (identical inputs give bit-identical outputs)
    and safe to call concurrently.  When ``jac`` is absent, derivatives fall
    back to central finite differences.

    ``fn_batch``/``jac_batch`` optionally evaluate one design against many
    (adjustment, parameter) rows at once — shapes ``(K, ny)``/``(K, du)`` in,
    ``(K, M)``/``(K, C)`` (and stacked jacobian blocks) out — which the
    scenario-replicated solves use as a fast path.
    """

    fn: EvalFn
    jac: Optional[JacFn] = None
    fn_batch: Optional[Callable] = None
    jac_batch: Optional[Callable] = None
    name: str = ""

    @property
    def has_gradients(self) -> bool:
        return self.jac is not None


@dataclass(frozen=True)
class ProblemSpec:
    """Immutable definition of the two-stage uncertain problem."""

    variables: tuple[VariableSpec, ...]
    uncertainty: UncertaintySet
    n_objectives: int
    n_constraints: int
    evaluator: EvaluationHandle
    objective_names: tuple[str, ...] = ()
    constraint_names: tuple[str, ...] = ()
    name: str = ""

    def __post_init__(self):
        object.__setattr__(self, "variables", tuple(self.variables))
        if self.n_objectives < 2:
            raise ValueError("need at least two objectives")
        if not any(v.role is Role.HERE_AND_NOW for v in self.variables):
            raise ValueError("need at least one here-and-now variable")
        if not self.objective_names:
            object.__setattr__(
                self,
                "objective_names",
                tuple(f"f{j + 1}" for j in range(self.n_objectives)),
            )
        if not self.constraint_names:
            object.__setattr__(
                self,
                "constraint_names",
                tuple(f"g{c + 1}" for c in range(self.n_constraints)),
            )
        if len(self.objective_names) != self.n_objectives:
            raise ValueError("objective_names length mismatch")
        if len(self.constraint_names) != self.n_constraints:
            raise ValueError("constraint_names length mismatch")
        # Cache the variable blocks; these are hot-path lookups.
        hnv = tuple(v for v in self.variables if v.role is Role.HERE_AND_NOW)
        wsv = tuple(v for v in self.variables if v.role is Role.WAIT_AND_SEE)

        def frozen(values):
            arr = np.array(values, dtype=float)
            arr.flags.writeable = False
            return arr

        object.__setattr__(self, "_hnv", hnv)
        object.__setattr__(self, "_wsv", wsv)
        object.__setattr__(self, "_x_lower", frozen([v.lower for v in hnv]))
        object.__setattr__(self, "_x_upper", frozen([v.upper for v in hnv]))
        object.__setattr__(self, "_y_lower", frozen([v.lower for v in wsv]))
        object.__setattr__(self, "_y_upper", frozen([v.upper for v in wsv]))
        object.__setattr__(self, "_x_initial", frozen([v.initial for v in hnv]))
        object.__setattr__(self, "_y_initial", frozen([v.initial for v in wsv]))
        # Probe once so dimension mismatches surface at construction time.
        f, g = self.eval_raw(self.x_initial, self.y_initial, self.uncertainty.nominal)
        if f.shape != (self.n_objectives,) or g.shape != (self.n_constraints,):
            raise DimensionMismatch(
                f"evaluator returned shapes {f.shape}/{g.shape}, expected "
                f"({self.n_objectives},)/({self.n_constraints},)"
            )

    # -- variable blocks -------------------------------------------------

    @property
    def hnv(self) -> tuple[VariableSpec, ...]:
        return self._hnv

    @property
    def wsv(self) -> tuple[VariableSpec, ...]:
        return self._wsv

    @property
    def n_x(self) -> int:
        return len(self._hnv)

    @property
    def n_y(self) -> int:
        return len(self._wsv)

    @property
    def x_lower(self) -> np.ndarray:
        return self._x_lower

    @property
    def x_upper(self) -> np.ndarray:
        return self._x_upper

    @property
    def y_lower(self) -> np.ndarray:
        return self._y_lower

    @property
    def y_upper(self) -> np.ndarray:
        return self._y_upper

    @property
    def x_initial(self) -> np.ndarray:
        return self._x_initial

    @property
    def y_initial(self) -> np.ndarray:
        return self._y_initial

    # -- evaluation -------------------------------------------------------

    def _check_dims(self, x, y, u):
        if x.shape != (self.n_x,):
            raise DimensionMismatch(f"x has shape {x.shape}, expected ({self.n_x},)")
        if y.shape != (self.n_y,):
            raise DimensionMismatch(f"y has shape {y.shape}, expected ({self.n_y},)")
        if u.shape != (self.uncertainty.dim,):
            raise DimensionMismatch(
                f"u has shape {u.shape}, expected ({self.uncertainty.dim},)"
            )

    def eval_raw(self, x, y, u) -> tuple[np.ndarray, np.ndarray]:
        """Evaluate without bound checks; non-finite output raises."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        u = np.asarray(u, dtype=float)
        self._check_dims(x, y, u)
        f, g = self.evaluator.fn(x, y, u)
        f = np.atleast_1d(np.asarray(f, dtype=float))
        g = np.atleast_1d(np.asarray(g, dtype=float)) if self.n_constraints else np.zeros(0)
        if f.shape != (self.n_objectives,) or g.shape != (self.n_constraints,):
            raise DimensionMismatch(
                f"evaluator returned shapes {f.shape}/{g.shape} at x={x}, y={y}, u={u}"
            )
        if not (np.all(np.isfinite(f)) and np.all(np.isfinite(g))):
            raise NonFiniteEvaluation(
                f"model returned non-finite values at x={x}, y={y}, u={u}"
            )
        return f, g

    def evaluate(self, x, y, u) -> tuple[np.ndarray, np.ndarray]:
        """Bound-checked evaluation: errors before calling the model if the
        point is outside the variable boxes or the uncertainty set."""
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        u = np.asarray(u, dtype=float)
        self._check_dims(x, y, u)
        tol = 1e-9
        if np.any(x < self.x_lower - tol) or np.any(x > self.x_upper + tol):
            raise ValueError(f"x={x} outside variable bounds")
        if self.n_y and (np.any(y < self.y_lower - tol) or np.any(y > self.y_upper + tol)):
            raise ValueError(f"y={y} outside variable bounds")
        if not self.uncertainty.contains(u, tol):
            raise ValueError(f"u={u} outside the uncertainty set")
        return self.eval_raw(x, y, u)

    def eval_penalized(self, x, y, u) -> tuple[np.ndarray, np.ndarray, bool]:
        """Evaluation for solvers: non-finite output becomes a large penalty
        instead of an exception.  Returns (f, g, ok)."""
        try:
            f, g = self.eval_raw(x, y, u)
            return f, g, True
        except NonFiniteEvaluation:
            return (
                np.full(self.n_objectives, PENALTY_VALUE),
                np.full(self.n_constraints, PENALTY_VALUE),
                False,
            )

    def eval_batch(self, x, Ys, Us) -> tuple[np.ndarray, np.ndarray]:
        """One design against ``K`` (adjustment, parameter) rows; non-finite
        rows are penalty-substituted.  Returns ``(F (K, M), G (K, C))``."""
        K = Ys.shape[0] if self.n_y else Us.shape[0]
        if self.evaluator.fn_batch is not None:
            F, G = self.evaluator.fn_batch(x, Ys, Us)
            F = np.asarray(F, dtype=float).reshape(K, self.n_objectives)
            G = np.asarray(G, dtype=float).reshape(K, self.n_constraints)
            bad = ~(np.isfinite(F).all(axis=1) & np.isfinite(G).all(axis=1))
            if bad.any():
                F = F.copy()
                G = G.copy()
                F[bad] = PENALTY_VALUE
                G[bad] = PENALTY_VALUE
            return F, G
        F = np.empty((K, self.n_objectives))
        G = np.empty((K, self.n_constraints))
        for k in range(K):
            f, g, _ = self.eval_fast(x, Ys[k], Us[k])
            F[k] = f
            G[k] = g
        return F, G

    def jac_batch(self, x, Ys, Us):
        """Stacked jacobian blocks for one design against ``K`` rows:
        ``(dF/dx (K,M,nx), dF/dy (K,M,ny), dG/dx (K,C,nx), dG/dy (K,C,ny))``."""
        K = Ys.shape[0] if self.n_y else Us.shape[0]
        if self.evaluator.jac_batch is not None:
            return self.evaluator.jac_batch(x, Ys, Us)
        M, C, nx, ny = self.n_objectives, self.n_constraints, self.n_x, self.n_y
        dfdx = np.empty((K, M, nx))
        dfdy = np.empty((K, M, ny))
        dgdx = np.empty((K, C, nx))
        dgdy = np.empty((K, C, ny))
        for k in range(K):
            a, b, c, d = self.jacobian(x, Ys[k], Us[k])
            dfdx[k], dfdy[k], dgdx[k], dgdy[k] = a, b, c, d
        return dfdx, dfdy, dgdx, dgdy

    def eval_fast(self, x, y, u) -> tuple[np.ndarray, np.ndarray, bool]:
        """Hot-path evaluation for solver inner loops: no dimension or bound
        checks (the construction-time probe established the shapes), penalty
        substitution on non-finite output.  Returns (f, g, ok)."""
        f, g = self.evaluator.fn(x, y, u)
        f = np.asarray(f, dtype=float)
        g = np.asarray(g, dtype=float) if self.n_constraints else _EMPTY
        if np.isfinite(f).all() and (not self.n_constraints or np.isfinite(g).all()):
            return f, g, True
        return (
            np.full(self.n_objectives, PENALTY_VALUE),
            np.full(self.n_constraints, PENALTY_VALUE),
            False,
        )

    # -- derivatives ------------------------------------------------------

    def gradient(self, x, y, u, kind: str, index: int, wrt: str) -> np.ndarray:
        """Gradient of one objective (``kind='objective'``) or constraint
        (``kind='constraint'``) with respect to the x- or y-block.

        Uses the handle's analytic jacobian when available, otherwise central
        finite differences with relative step ``max(1e-6*|v|, 1e-8)``.
        """
        x = np.asarray(x, dtype=float)
        y = np.asarray(y, dtype=float)
        u = np.asarray(u, dtype=float)
        self._check_dims(x, y, u)
        if kind not in ("objective", "constraint"):
            raise ValueError(f"unknown kind {kind!r}")
        if wrt not in ("x", "y"):
            raise ValueError(f"unknown wrt {wrt!r}")
        dfdx, dfdy, dgdx, dgdy = self.jacobian(x, y, u)
        block = {"objective": {"x": dfdx, "y": dfdy},
                 "constraint": {"x": dgdx, "y": dgdy}}[kind][wrt]
        return np.array(block[index], dtype=float)

    def jacobian(self, x, y, u):
        """Full jacobian blocks (df/dx, df/dy, dg/dx, dg/dy)."""
        if self.evaluator.jac is not None:
            if getattr(self, "_jac_trusted", False):
                return self.evaluator.jac(x, y, u)
            dfdx, dfdy, dgdx, dgdy = self.evaluator.jac(x, y, u)
            out = (
                np.asarray(dfdx, dtype=float).reshape(self.n_objectives, self.n_x),
                np.asarray(dfdy, dtype=float).reshape(self.n_objectives, self.n_y),
                np.asarray(dgdx, dtype=float).reshape(self.n_constraints, self.n_x),
                np.asarray(dgdy, dtype=float).reshape(self.n_constraints, self.n_y),
            )
            if all(o is r for o, r in zip(out, (dfdx, dfdy, dgdx, dgdy))):
                # The handle returns exactly shaped float arrays: skip the
                # conversion from now on.
                object.__setattr__(self, "_jac_trusted", True)
            return out
        return self.fd_jacobian(x, y, u)

    def fd_jacobian(self, x, y, u):
        """Central finite-difference jacobian blocks (the fallback scheme)."""
        M, C = self.n_objectives, self.n_constraints

        def diff_block(v, rebuild):
            n = v.size
            df = np.zeros((M, n))
            dg = np.zeros((C, n))
            for i in range(n):
                h = max(1e-6 * abs(v[i]), 1e-8)
                vp = v.copy()
                vm = v.copy()
                vp[i] += h
                vm[i] -= h
                fp, gp = self.eval_raw(*rebuild(vp))
                fm, gm = self.eval_raw(*rebuild(vm))
                df[:, i] = (fp - fm) / (2 * h)
                if C:
                    dg[:, i] = (gp - gm) / (2 * h)
            return df, dg

        dfdx, dgdx = diff_block(np.array(x, dtype=float), lambda v: (v, y, u))
        if self.n_y:
            dfdy, dgdy = diff_block(np.array(y, dtype=float), lambda v: (x, v, u))
        else:
            dfdy, dgdy = np.zeros((M, 0)), np.zeros((C, 0))
        return dfdx, dfdy, dgdx, dgdy


def evaluate(spec: ProblemSpec, x, y, u):
    """Functional form of :meth:`ProblemSpec.evaluate`."""
    return spec.evaluate(x, y, u)


def gradient(spec: ProblemSpec, x, y, u, kind: str, index: int, wrt: str):
    """Functional form of :meth:`ProblemSpec.gradient`."""
    return spec.gradient(x, y, u, kind, index, wrt)
