import json
import time

import numpy as np
import pytest
from fastapi.testclient import TestClient

from maropt import io as mio, navigate
from maropt.service import create_app


@pytest.fixture(scope="module")
def client(sp1_artifact):
    return TestClient(create_app(sp1_artifact))


@pytest.fixture()
def session_id(client):
    return client.post("/session").json()["id"]


def test_meta(client, sp1_artifact):
    meta = client.get("/meta").json()
    assert [o["name"] for o in meta["objectives"]] == ["f1", "f2"]
    assert meta["points"] == len(sp1_artifact.maro_front)
    assert meta["variables"] == {"hnv": ["x"], "wsv": ["y"]}
    assert meta["problem_hash"] == sp1_artifact.problem_hash


def test_fronts(client, sp1_artifact):
    fronts = client.get("/fronts").json()
    assert np.allclose(fronts["maro"], sp1_artifact.maro_front.objectives())
    assert np.allclose(fronts["nominal"], sp1_artifact.nominal_front.objectives())
    assert len(fronts["nsr"]) == len(sp1_artifact.nsr)
    assert fronts["mro"] is not None


def test_open_and_get_session(client):
    opened = client.post("/session").json()
    assert set(opened) == {"id", "snapshot"}
    snap = client.get(f"/session/{opened['id']}").json()
    assert snap == opened["snapshot"]


def test_unknown_session_404(client):
    assert client.get("/session/nope").status_code == 404
    r = client.post("/session/nope/command", json={"command": "reset"})
    assert r.status_code == 404


def test_move_to_anchor_matches_offline_pipeline_exactly(client, session_id,
                                                         sp1_artifact):
    idx = 2
    target = float(sp1_artifact.maro_front.points[idx].objectives[0])
    snap = client.post(
        f"/session/{session_id}/command",
        json={"command": "move", "objective": "f1", "value": target},
    ).json()
    lam = np.zeros(len(sp1_artifact.maro_front))
    lam[idx] = 1.0
    assert snap["lambda"] == lam.tolist()
    report = sp1_artifact.price_reports[idx]
    nsr = sp1_artifact.nsr[idx]
    assert snap["markers"]["nsr"] == {
        "f1": float(nsr.objectives[0]), "f2": float(nsr.objectives[1])
    }
    assert snap["markers"]["mo"] == {
        "f1": float(report.f_mo[0]), "f2": float(report.f_mo[1])
    }
    assert snap["markers"]["price"] == {
        "f1": float(report.p_r[0]), "f2": float(report.p_r[1])
    }


def test_malformed_commands_422(client, session_id):
    url = f"/session/{session_id}/command"
    r = client.post(url, json={"command": "teleport"})
    assert r.status_code == 422
    r = client.post(url, json={"command": "move", "objective": "f1"})
    assert r.status_code == 422
    assert any("value" in str(d.get("loc")) for d in r.json()["detail"])
    r = client.post(url, json={"command": "move", "objective": "zzz", "value": 1.0})
    assert r.status_code == 422
    assert any("objective" in str(d.get("loc")) for d in r.json()["detail"])
    r = client.post(url, json={"command": "move", "objective": "f1",
                               "value": "high"})
    assert r.status_code == 422


def test_infeasible_restrictions_409_session_unchanged(client, session_id):
    url = f"/session/{session_id}/command"
    before = client.get(f"/session/{session_id}").json()
    r = client.post(url, json={"command": "restrict", "objective": "f1",
                               "value": -1e9})
    assert r.status_code == 409
    after = client.get(f"/session/{session_id}").json()
    assert after == before


def test_restrict_and_reset_flow(client, session_id, sp1_artifact):
    url = f"/session/{session_id}/command"
    lo, hi = sp1_artifact.maro_front.f1_range
    snap = client.post(url, json={"command": "restrict", "objective": "f1",
                                  "value": 0.5 * (lo + hi)}).json()
    assert snap["restrictions"]["f1"] == pytest.approx(0.5 * (lo + hi))
    snap = client.post(url, json={"command": "move", "objective": "f1",
                                  "value": hi}).json()
    assert snap["flags"]["clamped"]
    assert snap["f_nav"]["f1"] <= 0.5 * (lo + hi) + 1e-9
    snap = client.post(url, json={"command": "reset"}).json()
    assert snap["restrictions"]["f1"] is None


def test_zero_price_end_marker(client, session_id, sp1_artifact):
    hi = sp1_artifact.maro_front.f1_range[1]
    snap = client.post(
        f"/session/{session_id}/command",
        json={"command": "move", "objective": "f1", "value": hi},
    ).json()
    assert abs(snap["markers"]["price"]["f2"]) <= 1e-6


def test_sessions_are_independent(client):
    a = client.post("/session").json()["id"]
    b = client.post("/session").json()["id"]
    hi = client.get("/meta").json()["objectives"][0]["front_max"]
    client.post(f"/session/{a}/command",
                json={"command": "move", "objective": "f1", "value": hi})
    snap_b = client.get(f"/session/{b}").json()
    assert snap_b["revision"] == 0


def test_serve_does_not_mutate_artifact(tmp_path, sp1_artifact):
    path = tmp_path / "artifact.json"
    sp1_artifact.save(path)
    before = path.read_bytes()
    art = mio.RunArtifact.load(path)
    client = TestClient(create_app(art))
    sid = client.post("/session").json()["id"]
    hi = art.maro_front.f1_range[1]
    for value in np.linspace(art.maro_front.f1_range[0], hi, 7):
        client.post(f"/session/{sid}/command",
                    json={"command": "move", "objective": "f1", "value": float(value)})
    assert path.read_bytes() == before


def make_synthetic_front_artifact(n_points):
    """Analytic quarter-circle front with matching re-optimized values, for
    latency measurements on larger fronts."""
    from maropt.front import build_front
    from maropt.price import NsrResult, PriceReport, IntersectionFlags
    from maropt.robust import (ParetoPoint, ReplicatedSolution,
                               ScalarizationSpec, SolveMode)
    from maropt.discretize import ReferenceDiscretization, Scenario
    from maropt.model import Geometry

    def pt(objs, mode):
        objs = np.asarray(objs, dtype=float)
        sol = ReplicatedSolution(
            x=np.array([objs[0]]), y_by_scenario={0: np.array([objs[1]])},
            t=objs.copy(), f_matrix=objs.reshape(2, 1), g_matrix=np.zeros((0, 1)),
            active_wc_objective={0: 0, 1: 0}, active_wc_constraint={},
            mode=mode, scenario_ids=[0], nominal_scenario_id=0,
            nlp_status="optimal", nlp_iterations=1, max_violation=0.0,
        )
        return ParetoPoint(objectives=objs, solution=sol,
                           scalarization=ScalarizationSpec((0.5, 0.5)),
                           scenario_ids=[0])

    ts = np.linspace(0, np.pi / 2, n_points)
    maro_pts = [pt([1 - np.cos(t) + 0.3, 1 - np.sin(t) + 0.3], SolveMode.ADJUSTABLE)
                for t in ts]
    nom_pts = [pt([1 - np.cos(t), 1 - np.sin(t)], SolveMode.NOMINAL) for t in ts]
    maro = build_front(maro_pts, SolveMode.ADJUSTABLE)
    nominal = build_front(nom_pts, SolveMode.NOMINAL)
    nsr = [NsrResult(y=np.array([0.5]), objectives=p.objectives - 0.05)
           for p in maro.points]
    reports = [
        PriceReport(
            f_maro=p.objectives, f_nsr=n.objectives, d=n.objectives - p.objectives,
            alpha_star=1.0, f_mo=n.objectives, p_r=np.zeros(2),
            lam=np.zeros(len(nominal)), flags=IntersectionFlags(),
        )
        for p, n in zip(maro.points, nsr)
    ]
    ref = ReferenceDiscretization(
        scenarios=(Scenario(0, (0.0,), True, "nominal"),), geometry=Geometry.BOX
    )
    return mio.RunArtifact(
        problem={"builtin": "sp1"}, problem_hash="synthetic",
        objective_names=["f1", "f2"], constraint_names=[],
        hnv_names=["x"], wsv_names=["y"], discretization=ref,
        nominal_front=nominal, maro_front=maro, nsr=nsr, price_reports=reports,
        created="", seed=42,
    )


def test_command_latency_p95_on_100_point_front():
    art = make_synthetic_front_artifact(100)
    client = TestClient(create_app(art))
    sid = client.post("/session").json()["id"]
    lo, hi = art.maro_front.f1_range
    targets = np.linspace(lo, hi, 200)
    latencies = []
    for v in targets:
        t0 = time.perf_counter()
        r = client.post(f"/session/{sid}/command",
                        json={"command": "move", "objective": "f1",
                              "value": float(v)})
        latencies.append(time.perf_counter() - t0)
        assert r.status_code == 200
    p95 = float(np.percentile(latencies, 95))
    assert p95 <= 0.050, f"p95 latency {p95 * 1e3:.1f} ms exceeds 50 ms"
