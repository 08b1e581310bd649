"""HTTP service backing the navigation client.

Serves one immutable run artifact; sessions live in memory, keyed by id,
with commands serialized per session.  The artifact file is never written.
"""

from __future__ import annotations

import threading
import uuid
from typing import Literal, Optional

import numpy as np
from fastapi import FastAPI, HTTPException
from pydantic import BaseModel

from . import navigate
from .errors import InfeasibleRestrictions
from .io import RunArtifact


class Command(BaseModel):
    command: Literal["move", "restrict", "reset"]
    objective: Optional[str] = None
    value: Optional[float] = None

    model_config = {"extra": "forbid"}


def _unprocessable(loc: str, message: str):
    return HTTPException(status_code=422, detail=[{"loc": ["body", loc], "msg": message}])


def create_app(artifact: RunArtifact, ui_dir: Optional[str] = None) -> FastAPI:
    app = FastAPI(title="maropt navigation service")
    sessions: dict[str, navigate.NavigationSession] = {}
    locks: dict[str, threading.Lock] = {}
    registry_lock = threading.Lock()

    obj_names = list(artifact.objective_names)
    maro_objs = artifact.maro_front.objectives()
    nom_objs = artifact.nominal_front.objectives()
    nsr_objs = np.array([r.objectives for r in artifact.nsr])

    def snapshot(session: navigate.NavigationSession) -> dict:
        return navigate.snapshot(
            session, obj_names, artifact.hnv_names, artifact.wsv_names
        )

    def get_session(session_id: str):
        try:
            return sessions[session_id], locks[session_id]
        except KeyError:
            raise HTTPException(status_code=404, detail=f"unknown session {session_id}")

    @app.get("/meta")
    def meta():
        stacked = np.vstack([maro_objs, nom_objs, nsr_objs])
        return {
            "problem_hash": artifact.problem_hash,
            "tool_version": artifact.tool_version,
            "objectives": [
                {
                    "name": n,
                    "min": float(stacked[:, j].min()),
                    "max": float(stacked[:, j].max()),
                    "front_min": float(maro_objs[:, j].min()),
                    "front_max": float(maro_objs[:, j].max()),
                }
                for j, n in enumerate(obj_names)
            ],
            "variables": {
                "hnv": artifact.hnv_names,
                "wsv": artifact.wsv_names,
            },
            "points": len(artifact.maro_front),
        }

    @app.get("/fronts")
    def fronts():
        return {
            "maro": [[float(v) for v in row] for row in maro_objs],
            "nominal": [[float(v) for v in row] for row in nom_objs],
            "nsr": [[float(v) for v in row] for row in nsr_objs],
            "mro": (
                [[float(v) for v in row] for row in artifact.mro_front.objectives()]
                if artifact.mro_front else None
            ),
        }

    @app.post("/session")
    def open_session():
        session = navigate.open_session(
            artifact.maro_front, artifact.nominal_front, artifact.nsr
        )
        session_id = uuid.uuid4().hex
        with registry_lock:
            sessions[session_id] = session
            locks[session_id] = threading.Lock()
        return {"id": session_id, "snapshot": snapshot(session)}

    @app.get("/session/{session_id}")
    def get_snapshot(session_id: str):
        session, _ = get_session(session_id)
        return snapshot(session)

    @app.post("/session/{session_id}/command")
    def command(session_id: str, cmd: Command):
        session, lock = get_session(session_id)
        with lock:
            session = sessions[session_id]
            if cmd.command == "reset":
                updated = navigate.reset(session)
            else:
                if cmd.objective is None:
                    raise _unprocessable("objective", f"{cmd.command} needs an objective")
                if cmd.objective not in obj_names:
                    raise _unprocessable(
                        "objective",
                        f"unknown objective {cmd.objective!r}; expected one of {obj_names}",
                    )
                j = obj_names.index(cmd.objective)
                if cmd.command == "move":
                    if cmd.value is None:
                        raise _unprocessable("value", "move needs a target value")
                    updated = navigate.move_slider(session, j, cmd.value)
                else:
                    try:
                        updated = navigate.set_restriction(session, j, cmd.value)
                    except InfeasibleRestrictions as exc:
                        raise HTTPException(status_code=409, detail=str(exc))
            sessions[session_id] = updated
        return snapshot(updated)

    if ui_dir:
        from fastapi.staticfiles import StaticFiles

        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
