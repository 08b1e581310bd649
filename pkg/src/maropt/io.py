"""Problem files, run artifacts, and canonical JSON.

Everything is JSON for auditability.  Serialization is canonical (sorted
keys, two-space indent, shortest round-trip floats), so serialize-parse-
serialize is byte-identical and artifacts diff cleanly.  Problem files are
either a built-in model key or an expression-based definition parsed with
sympy (which also supplies analytic derivatives).
"""

from __future__ import annotations

import datetime
import hashlib
import importlib.resources
import json
from dataclasses import dataclass, field
from typing import Optional

import jsonschema
import numpy as np
import sympy as sp

from . import problems
from .adaptive import RefinementTrace, WcScenarioSet
from .discretize import ReferenceDiscretization
from .errors import SchemaError
from .front import FrontApproximation
from .model import (
    EvaluationHandle,
    Geometry,
    ProblemSpec,
    Role,
    UncertainParamSpec,
    UncertaintySet,
    VariableSpec,
)
from .pipeline import PriceBundle
from .price import NsrResult, PriceReport

TOOL_VERSION = "maropt 0.1.0"
ARTIFACT_FORMAT = 1


def canonical_json(data) -> str:
    """Canonical serialization: stable ordering, round-trip-exact floats."""
    return json.dumps(data, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def load_schema(name: str) -> dict:
    ref = importlib.resources.files("maropt") / "schemas" / f"{name}.schema.json"
    return json.loads(ref.read_text())


def validate(data, schema_name: str):
    try:
        jsonschema.validate(data, load_schema(schema_name))
    except jsonschema.ValidationError as exc:
        path = "$" + "".join(f"[{p!r}]" for p in exc.absolute_path)
        raise SchemaError(f"{schema_name} file invalid at {path}: {exc.message}") from exc


def read_json(path) -> dict:
    try:
        with open(path, "r") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}") from exc
    except OSError as exc:
        raise SchemaError(f"{path}: {exc.strerror or exc}") from exc


# -- problem files -----------------------------------------------------------

_ALLOWED_FUNCTIONS = {
    "exp": sp.exp, "log": sp.log, "log1p": lambda v: sp.log(1 + v),
    "sqrt": sp.sqrt, "sin": sp.sin, "cos": sp.cos, "tan": sp.tan,
    "tanh": sp.tanh, "pi": sp.pi, "E": sp.E, "Min": sp.Min, "Max": sp.Max,
}


def _expression_problem(data: dict) -> ProblemSpec:
    variables = tuple(
        VariableSpec(
            name=v["name"], lower=float(v["lower"]), upper=float(v["upper"]),
            role=Role(v["role"]), initial=float(v["initial"]),
        )
        for v in data["variables"]
    )
    params = tuple(
        UncertainParamSpec(
            name=p["name"], lower=float(p["lower"]), upper=float(p["upper"]),
            nominal=float(p["nominal"]),
        )
        for p in data["uncertain_params"]
    )
    geo = data.get("uncertainty_geometry", {"kind": "box"})
    if geo["kind"] == "ellipsoid":
        uncertainty = UncertaintySet(
            params=params, geometry=Geometry.ELLIPSOID,
            ellipsoid_center=tuple(geo["center"]), ellipsoid_radii=tuple(geo["radii"]),
        )
    else:
        uncertainty = UncertaintySet(params=params, geometry=Geometry.BOX)

    x_names = [v.name for v in variables if v.role is Role.HERE_AND_NOW]
    y_names = [v.name for v in variables if v.role is Role.WAIT_AND_SEE]
    u_names = [p.name for p in params]
    all_names = x_names + y_names + u_names
    symbols = {n: sp.Symbol(n, real=True) for n in all_names}
    local = dict(_ALLOWED_FUNCTIONS)
    local.update(symbols)

    def parse(entry, what):
        try:
            expr = sp.parse_expr(entry["expr"], local_dict=local, evaluate=True)
        except Exception as exc:
            raise SchemaError(f"{what} {entry['name']!r}: cannot parse expression "
                              f"{entry['expr']!r}: {exc}") from exc
        unknown = expr.free_symbols - set(symbols.values())
        if unknown:
            raise SchemaError(
                f"{what} {entry['name']!r} uses unknown symbols {sorted(map(str, unknown))}"
            )
        return expr

    obj_entries = data["objectives"]
    con_entries = data.get("constraints", [])
    f_exprs = [parse(e, "objective") for e in obj_entries]
    g_exprs = [parse(e, "constraint") for e in con_entries]
    sym_list = [symbols[n] for n in all_names]
    f_fns = [sp.lambdify(sym_list, e, modules="numpy") for e in f_exprs]
    g_fns = [sp.lambdify(sym_list, e, modules="numpy") for e in g_exprs]
    fx_grads = [[sp.lambdify(sym_list, sp.diff(e, symbols[n]), modules="numpy")
                 for n in x_names] for e in f_exprs]
    fy_grads = [[sp.lambdify(sym_list, sp.diff(e, symbols[n]), modules="numpy")
                 for n in y_names] for e in f_exprs]
    gx_grads = [[sp.lambdify(sym_list, sp.diff(e, symbols[n]), modules="numpy")
                 for n in x_names] for e in g_exprs]
    gy_grads = [[sp.lambdify(sym_list, sp.diff(e, symbols[n]), modules="numpy")
                 for n in y_names] for e in g_exprs]

    def fn(x, y, u):
        args = [*x, *y, *u]
        f = np.array([float(fi(*args)) for fi in f_fns])
        g = np.array([float(gi(*args)) for gi in g_fns])
        return f, g

    def jac(x, y, u):
        args = [*x, *y, *u]
        dfdx = np.array([[float(d(*args)) for d in row] for row in fx_grads]).reshape(
            len(f_fns), len(x_names))
        dfdy = np.array([[float(d(*args)) for d in row] for row in fy_grads]).reshape(
            len(f_fns), len(y_names))
        dgdx = np.array([[float(d(*args)) for d in row] for row in gx_grads]).reshape(
            len(g_fns), len(x_names))
        dgdy = np.array([[float(d(*args)) for d in row] for row in gy_grads]).reshape(
            len(g_fns), len(y_names))
        return dfdx, dfdy, dgdx, dgdy

    return ProblemSpec(
        variables=variables,
        uncertainty=uncertainty,
        n_objectives=len(f_fns),
        n_constraints=len(g_fns),
        evaluator=EvaluationHandle(fn=fn, jac=jac, name=data.get("name", "expression")),
        objective_names=tuple(e["name"] for e in obj_entries),
        constraint_names=tuple(e["name"] for e in con_entries),
        name=data.get("name", "expression"),
    )


def problem_from_dict(data: dict) -> ProblemSpec:
    validate(data, "problem")
    if "builtin" in data:
        return problems.build(data["builtin"])
    return _expression_problem(data)


def load_problem(source) -> tuple[ProblemSpec, dict]:
    """Problem from a file path, built-in name, or parsed dict.

    Returns the spec plus the reference dict recorded in artifacts.
    """
    if isinstance(source, dict):
        return problem_from_dict(source), source
    name = str(source)
    if name in problems.BUILTIN_PROBLEMS:
        ref = {"builtin": name}
        return problems.build(name), ref
    data = read_json(name)
    return problem_from_dict(data), data


def problem_hash(reference: dict) -> str:
    return hashlib.sha256(canonical_json(reference).encode()).hexdigest()


# -- run artifacts ------------------------------------------------------------


@dataclass
class RunArtifact:
    """Self-contained run record: a navigation session can be opened from it
    without re-solving anything."""

    problem: dict
    problem_hash: str
    objective_names: list[str]
    constraint_names: list[str]
    hnv_names: list[str]
    wsv_names: list[str]
    discretization: ReferenceDiscretization
    nominal_front: FrontApproximation
    maro_front: FrontApproximation
    nsr: list[NsrResult]
    price_reports: list[PriceReport]
    mro_front: Optional[FrontApproximation] = None
    scenario_fronts: dict[int, FrontApproximation] = field(default_factory=dict)
    traces: list[RefinementTrace] = field(default_factory=list)
    wc_union: Optional[WcScenarioSet] = None
    stats: dict = field(default_factory=dict)
    seed: int = 42
    created: str = ""
    tool_version: str = TOOL_VERSION

    def to_json(self) -> dict:
        return {
            "format": ARTIFACT_FORMAT,
            "tool_version": self.tool_version,
            "created": self.created,
            "seed": self.seed,
            "problem": self.problem,
            "problem_hash": self.problem_hash,
            "objective_names": list(self.objective_names),
            "constraint_names": list(self.constraint_names),
            "hnv_names": list(self.hnv_names),
            "wsv_names": list(self.wsv_names),
            "discretization": self.discretization.to_json(),
            "fronts": {
                "nominal": self.nominal_front.to_json(),
                "maro": self.maro_front.to_json(),
                "mro": self.mro_front.to_json() if self.mro_front else None,
                "scenario": {str(k): v.to_json() for k, v in self.scenario_fronts.items()},
            },
            "nsr": [r.to_json() for r in self.nsr],
            "price_reports": [r.to_json() for r in self.price_reports],
            "traces": [t.to_json() for t in self.traces],
            "wc_union": self.wc_union.to_json() if self.wc_union else None,
            "stats": self.stats,
        }

    @classmethod
    def from_json(cls, data: dict) -> "RunArtifact":
        validate(data, "artifact")
        fronts = data["fronts"]
        wc = data.get("wc_union")
        return cls(
            problem=data["problem"],
            problem_hash=data["problem_hash"],
            objective_names=list(data["objective_names"]),
            constraint_names=list(data.get("constraint_names", [])),
            hnv_names=list(data["hnv_names"]),
            wsv_names=list(data["wsv_names"]),
            discretization=ReferenceDiscretization.from_json(data["discretization"]),
            nominal_front=FrontApproximation.from_json(fronts["nominal"]),
            maro_front=FrontApproximation.from_json(fronts["maro"]),
            mro_front=(FrontApproximation.from_json(fronts["mro"])
                       if fronts.get("mro") else None),
            scenario_fronts={
                int(k): FrontApproximation.from_json(v)
                for k, v in fronts.get("scenario", {}).items()
            },
            nsr=[NsrResult.from_json(r) for r in data["nsr"]],
            price_reports=[PriceReport.from_json(r) for r in data["price_reports"]],
            traces=[RefinementTrace.from_json(t) for t in data.get("traces", [])],
            wc_union=(WcScenarioSet(
                ids=tuple(wc["ids"]),
                provenance={int(k): v for k, v in wc["provenance"].items()},
            ) if wc else None),
            stats=data.get("stats", {}),
            seed=int(data["seed"]),
            created=data["created"],
            tool_version=data["tool_version"],
        )

    def save(self, path):
        with open(path, "w") as fh:
            fh.write(canonical_json(self.to_json()))

    @classmethod
    def load(cls, path) -> "RunArtifact":
        return cls.from_json(read_json(path))


def make_artifact(
    spec: ProblemSpec,
    problem_ref: dict,
    reference: ReferenceDiscretization,
    bundle: PriceBundle,
    seed: int,
    timestamp: Optional[str] = None,
) -> RunArtifact:
    wc_union = bundle.wc_union
    return RunArtifact(
        problem=problem_ref,
        problem_hash=problem_hash(problem_ref),
        objective_names=list(spec.objective_names),
        constraint_names=list(spec.constraint_names),
        hnv_names=[v.name for v in spec.hnv],
        wsv_names=[v.name for v in spec.wsv],
        discretization=reference,
        nominal_front=bundle.nominal_front,
        maro_front=bundle.robust_front,
        mro_front=bundle.mro_front,
        scenario_fronts=bundle.scenario_fronts,
        nsr=bundle.nsr_values,
        price_reports=bundle.reports,
        traces=bundle.traces,
        wc_union=wc_union,
        stats=bundle.adaptive_stats,
        seed=seed,
        created=timestamp if timestamp is not None
        else datetime.datetime.now(datetime.timezone.utc).isoformat(),
    )
