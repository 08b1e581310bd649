"""Command-line interface.

Subcommands: ``discretize`` (emit the reference scenario set), ``front``
(nominal / worst-case / non-adjustable / per-scenario fronts), ``price``
(full artifact with re-optimizations and price reports), ``trace``
(worst-case occurrence table), ``compare-fronts``, and ``serve`` (HTTP
service for the navigation UI).  All outputs are JSON; ``--csv`` mirrors
the tabular ones.  Exit codes: 0 success, 1 infeasible, 2 usage/schema.
"""

from __future__ import annotations

import argparse
import csv
import io as _stdio
import json
import logging
import sys
from typing import Optional

import numpy as np

from . import adaptive, discretize, front as front_mod, io as mio, pipeline, robust
from .errors import (
    InfeasibleModel,
    InfeasibleRestrictions,
    MaroptError,
    NsrInfeasible,
    SchemaError,
)
from .robust import SolveMode

log = logging.getLogger(__name__)


def _write(text: str, out: Optional[str]):
    if out:
        with open(out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _csv_text(header, rows) -> str:
    buf = _stdio.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    writer.writerows(rows)
    return buf.getvalue()


def _load(args):
    spec, ref = mio.load_problem(args.problem)
    reference = discretize.generate(spec.uncertainty, cap=getattr(args, "cap", 10_000))
    return spec, ref, reference


def cmd_discretize(args) -> int:
    spec, _, reference = _load(args)
    if args.csv:
        rows = [
            [s.id, *s.values, s.is_nominal, s.label]
            for s in reference
        ]
        header = ["id", *[p.name for p in spec.uncertainty.params], "is_nominal", "label"]
        _write(_csv_text(header, rows), args.out)
    else:
        _write(mio.canonical_json(reference.to_json()), args.out)
    return 0


def _parse_mode(mode: str):
    if mode.startswith("scenario:"):
        return "scenario", int(mode.split(":", 1)[1])
    if mode in ("nominal", "maro", "mro"):
        return mode, None
    raise SchemaError(f"unknown mode {mode!r}; use nominal, maro, mro, or scenario:<id>")


def _front_csv(spec, fr) -> str:
    header = [*spec.objective_names, *[v.name for v in spec.hnv],
              *[f"{v.name}@nominal" for v in spec.wsv]]
    rows = []
    for p in fr.points:
        sol = p.solution
        nid = sol.nominal_scenario_id if sol.nominal_scenario_id is not None else -1
        y = sol.y_for(nid, np.zeros(len(spec.wsv))) if spec.wsv else []
        rows.append([*(float(v) for v in p.objectives),
                     *(float(v) for v in sol.x), *(float(v) for v in y)])
    return _csv_text(header, rows)


def cmd_front(args) -> int:
    spec, _, reference = _load(args)
    kind, scenario_id = _parse_mode(args.mode)
    eps = args.sandwich
    foreign = None
    if args.warm_from:
        warm_front = front_mod.FrontApproximation.from_json(mio.read_json(args.warm_from))
        foreign = robust.warms_from_front(warm_front)
    if kind == "nominal":
        fr = pipeline.nominal_front(spec, reference, n_points=args.points, seed=args.seed)
    elif kind == "scenario":
        fr = pipeline.scenario_front(spec, reference, scenario_id,
                                     n_points=args.points, seed=args.seed,
                                     foreign_warms=foreign)
    else:
        mode = SolveMode.ADJUSTABLE if kind == "maro" else SolveMode.NON_ADJUSTABLE
        fr = pipeline.robust_front(
            spec, reference, mode=mode,
            adaptive_scenarios=not args.all_scenarios,
            n_points=args.points, sandwich_eps=eps, seed=args.seed,
            foreign_warms=foreign,
        ).front
    if args.csv:
        _write(_front_csv(spec, fr), args.out)
    else:
        _write(mio.canonical_json(fr.to_json()), args.out)
    return 0


def cmd_price(args) -> int:
    spec, prob_ref, reference = _load(args)
    bundle = pipeline.build_price_bundle(
        spec, reference, n_points=args.points,
        adaptive_scenarios=not args.all_scenarios,
        with_mro=args.with_mro, with_scenario_fronts=args.with_scenario_fronts,
        seed=args.seed,
    )
    artifact = mio.make_artifact(
        spec, prob_ref, reference, bundle, seed=args.seed,
        timestamp="" if args.no_timestamp else None,
    )
    if args.out:
        artifact.save(args.out)
    if args.csv:
        header = [spec.objective_names[0],
                  *[f"price_{n}" for n in spec.objective_names],
                  "alpha_star", "d_zero", "ray_misses_front"]
        rows = [
            [float(r.f_maro[0]), *(float(v) for v in r.p_r), float(r.alpha_star),
             r.flags.d_zero, r.flags.ray_misses_front]
            for r in bundle.reports
        ]
        _write(_csv_text(header, rows), args.csv_out)
    elif not args.out:
        _write(mio.canonical_json(artifact.to_json()), None)
    return 0


def _collect_wc_occurrence(spec, reference, fr, wc_sets) -> dict[int, set]:
    """Scenario id -> set of objective/constraint names it is worst for,
    collected across all front points (active worst cases plus the reasons
    recorded when scenarios were added)."""
    occurrence: dict[int, set] = {}
    for p in fr.points:
        sol = p.solution
        for j, sid in sol.active_wc_objective.items():
            occurrence.setdefault(sid, set()).add(spec.objective_names[j])
        for c, sid in sol.active_wc_constraint.items():
            k = sol.scenario_ids.index(sid)
            if sol.g_matrix[c, k] >= -1e-6:
                occurrence.setdefault(sid, set()).add(spec.constraint_names[c])
    for wc in wc_sets:
        for sid, reason in wc.provenance.items():
            if reason == "initial":
                continue
            occurrence.setdefault(sid, set()).add(reason.split(":", 1)[1])
    return occurrence


def cmd_trace(args) -> int:
    spec, _, reference = _load(args)
    mode = SolveMode.ADJUSTABLE if args.mode == "maro" else SolveMode.NON_ADJUSTABLE
    result = adaptive.solve_adaptive_front(
        spec, reference, mode=mode, n_points=args.points, seed=args.seed
    )
    occurrence = _collect_wc_occurrence(spec, reference, result.front, result.wc_sets)
    rows = []
    for s in reference:
        if s.id not in occurrence:
            continue
        rows.append({
            "scenario": s.id,
            "values": {p.name: v for p, v in zip(spec.uncertainty.params, s.values)},
            "is_nominal": s.is_nominal,
            "wc_occurrence": sorted(occurrence[s.id]),
        })
    payload = {
        "problem": spec.name,
        "mode": args.mode,
        "worst_case_scenarios": rows,
        "traces": [t.to_json() for t in result.traces],
        "stats": {
            "master_solves": result.master_solves,
            "scenario_solve_units": result.scenario_solve_units,
            "reference_size": len(reference),
            "wc_union_size": len(result.wc_union.ids),
        },
    }
    if args.csv:
        header = ["scenario", *[p.name for p in spec.uncertainty.params], "wc_occurrence"]
        csv_rows = [
            [r["scenario"], *r["values"].values(), ";".join(r["wc_occurrence"])]
            for r in rows
        ]
        _write(_csv_text(header, csv_rows), args.out)
    else:
        _write(mio.canonical_json(payload), args.out)
    return 0


def cmd_compare_fronts(args) -> int:
    fa = front_mod.FrontApproximation.from_json(mio.read_json(args.front_a))
    fb = front_mod.FrontApproximation.from_json(mio.read_json(args.front_b))
    try:
        diff = front_mod.compare_fronts(fa, fb)
    except ValueError as exc:
        sys.stderr.write(f"{exc}\n")
        return 1
    sys.stdout.write(f"max normalized pointwise difference: {diff:.3e} "
                     f"(tolerance {args.tol:.1e})\n")
    return 0 if diff <= args.tol else 1


def cmd_serve(args) -> int:
    import uvicorn

    from .service import create_app

    artifact = mio.RunArtifact.load(args.artifact)
    app = create_app(artifact, ui_dir=args.ui)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maropt",
        description="Worst-case Pareto fronts under parametric uncertainty, "
                    "price-of-robustness analysis, and interactive navigation.",
    )
    parser.add_argument("--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_problem(p):
        p.add_argument("--problem", required=True,
                       help="built-in name (sp1, sp2, column_surrogate) or JSON file")
        p.add_argument("--seed", type=int, default=42)
        p.add_argument("-o", "--out", default=None, help="output file (default stdout)")

    p = sub.add_parser("discretize", help="emit the reference scenario set")
    add_problem(p)
    p.add_argument("--cap", type=int, default=10_000)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_discretize)

    p = sub.add_parser("front", help="compute one Pareto front approximation")
    add_problem(p)
    p.add_argument("--mode", required=True,
                   help="nominal | maro | mro | scenario:<id>")
    g = p.add_mutually_exclusive_group()
    g.add_argument("--adaptive", action="store_true", default=True)
    g.add_argument("--all-scenarios", action="store_true")
    p.add_argument("--points", type=int, default=8)
    p.add_argument("--sandwich", type=float, default=None,
                   help="gap-driven refinement with this tolerance instead of "
                        "the fixed schedule")
    p.add_argument("--warm-from", default=None, metavar="FRONT_JSON",
                   help="reuse another front's solutions as warm starts "
                        "(aligns runs being compared point-for-point)")
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_front)

    p = sub.add_parser("price", help="full run artifact with price reports")
    add_problem(p)
    g = p.add_mutually_exclusive_group()
    g.add_argument("--adaptive", action="store_true", default=True)
    g.add_argument("--all-scenarios", action="store_true")
    p.add_argument("--points", type=int, default=8)
    p.add_argument("--with-mro", action="store_true")
    p.add_argument("--with-scenario-fronts", action="store_true")
    p.add_argument("--csv", action="store_true",
                   help="emit the price-vs-first-objective table as CSV")
    p.add_argument("--csv-out", default=None, help="CSV output file (default stdout)")
    p.add_argument("--no-timestamp", action="store_true",
                   help="omit the creation timestamp (reproducible artifacts)")
    p.set_defaults(func=cmd_price)

    p = sub.add_parser("trace", help="worst-case scenario occurrence report")
    add_problem(p)
    p.add_argument("--mode", choices=["maro", "mro"], default="maro")
    p.add_argument("--points", type=int, default=8)
    p.add_argument("--csv", action="store_true")
    p.set_defaults(func=cmd_trace)

    p = sub.add_parser("compare-fronts", help="pointwise diff of two front files")
    p.add_argument("front_a")
    p.add_argument("front_b")
    p.add_argument("--tol", type=float, default=1e-4)
    p.set_defaults(func=cmd_compare_fronts)

    p = sub.add_parser("serve", help="HTTP service for the navigation UI")
    p.add_argument("--artifact", required=True)
    p.add_argument("--host", default="127.0.0.1")
    p.add_argument("--port", type=int, default=8080)
    p.add_argument("--ui", default=None,
                   help="directory with the built web client, served at /")
    p.set_defaults(func=cmd_serve)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
    )
    try:
        return args.func(args)
    except (InfeasibleModel, NsrInfeasible, InfeasibleRestrictions) as exc:
        sys.stderr.write(f"infeasible: {exc}\n")
        return 1
    except SchemaError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 2
    except MaroptError as exc:
        sys.stderr.write(f"error: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
