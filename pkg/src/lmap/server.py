"""Local HTTP/JSON service for the interactive viewer.

In-memory sessions only: upload a mesh, submit a ROI, launch a flatten job,
poll its status, then fetch the deformed mesh and distortion metrics. One
in-flight job per mesh id; the stored original is never mutated.
"""

from __future__ import annotations

import json
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Literal

import numpy as np
from fastapi import FastAPI, Request, Response
from fastapi.responses import JSONResponse
from pydantic import BaseModel, Field, ValidationError

from .cli import thread_cap
from .distortion import build_report, histogram_json, roi_face_scope
from .errors import LmapError, NumericalError, UsageError
from .extrinsic import FlowConfig, run_extrinsic_flow
from .mesh import (
    RoiSelection,
    TriangleMesh,
    detect_format,
    euler_characteristic,
    load_mesh,
)
from .metric import DiscreteMetric

SCHEMA = "lmap/1"


class MeshJson(BaseModel):
    positions: list[float] = Field(..., description="flat x,y,z triples")
    faces: list[int] = Field(..., description="flat vertex-id triples")


class MeshStats(BaseModel):
    id: str
    v: int
    e: int
    f: int
    chi: int
    boundary_loops: int


class RoiRequest(BaseModel):
    vertices: list[int]


class RoiStats(BaseModel):
    size: int
    interior_count: int
    rim_count: int


class FlattenRequest(BaseModel):
    steps: int = 5
    epsilon: float = 1e-6
    max_newton: int = 50
    max_gd: int = 500
    pin_rim: bool = False
    seed: int | None = None
    radius: float | None = None


class JobStatus(BaseModel):
    status: Literal["none", "pending", "running", "done", "failed"]
    error: str | None = None


class Overlay(BaseModel):
    name: str
    values: list[float]


@dataclass
class Session:
    mesh: TriangleMesh
    roi: RoiSelection | None = None
    status: str = "none"
    error: str | None = None
    result: TriangleMesh | None = None
    report: dict | None = None
    metrics: dict | None = None


class SessionStore:
    """Lock-guarded id -> Session map."""

    def __init__(self):
        self._lock = threading.Lock()
        self._sessions: dict[str, Session] = {}

    def add(self, mesh: TriangleMesh) -> str:
        sid = uuid.uuid4().hex
        with self._lock:
            self._sessions[sid] = Session(mesh=mesh)
        return sid

    def get(self, sid: str) -> Session | None:
        with self._lock:
            return self._sessions.get(sid)

    def update(self, sid: str, **kwargs) -> None:
        with self._lock:
            session = self._sessions[sid]
            for k, v in kwargs.items():
                setattr(session, k, v)


def _mesh_payload(mesh: TriangleMesh) -> dict:
    return {
        "positions": mesh.positions.reshape(-1).tolist(),
        "faces": mesh.faces.reshape(-1).tolist(),
    }


def _mesh_from_payload(payload: MeshJson) -> TriangleMesh:
    if len(payload.positions) % 3 or len(payload.faces) % 3:
        raise UsageError("positions and faces must be flat arrays of triples")
    positions = np.array(payload.positions, dtype=float).reshape(-1, 3)
    faces = np.array(payload.faces, dtype=np.int64).reshape(-1, 3)
    return TriangleMesh(positions, faces)


def _metrics_payload(original: TriangleMesh, deformed: TriangleMesh, roi: RoiSelection) -> dict:
    # shared connectivity: replay the deformed faces onto the original positions
    replayed = TriangleMesh(original.positions, deformed.faces, check_areas=False)
    report = build_report(replayed, deformed, roi)
    ids = sorted(roi.vertices)
    eta = report.angle_eta
    finite_eta = eta[np.isfinite(eta)]

    # vertex-averaged |eta| over incident corners, for overlay rendering
    vertex_eta = np.zeros(original.vertex_count)
    counts = np.zeros(original.vertex_count)
    fscope = roi_face_scope(replayed, roi)
    for fid in fscope:
        for m in range(3):
            v = int(replayed.faces[fid, m])
            vertex_eta[v] += abs(eta[fid, m])
            counts[v] += 1
    nonzero = counts > 0
    vertex_eta[nonzero] /= counts[nonzero]

    return {
        "schema": SCHEMA,
        "area_eps": {
            "vertex_ids": ids,
            "values": [float(report.area_eps[v]) for v in ids],
            "hist": histogram_json(report.area_hist),
        },
        "angle_eta": {
            "corner_count": int(len(finite_eta)),
            "vertex_ids": [int(v) for v in np.flatnonzero(nonzero)],
            "vertex_mean_abs": [float(x) for x in vertex_eta[nonzero]],
            "hist": histogram_json(report.angle_hist),
        },
    }


def create_app(store: SessionStore | None = None, max_workers: int | None = None) -> FastAPI:
    store = store or SessionStore()
    executor = ThreadPoolExecutor(max_workers=max_workers or thread_cap())
    app = FastAPI(title="lmap", version="0.1.0")
    app.state.store = store

    def _not_found() -> JSONResponse:
        return JSONResponse(status_code=404, content={"detail": "unknown mesh id"})

    @app.post("/mesh", status_code=201, response_model=MeshStats)
    async def post_mesh(request: Request):
        body = await request.body()
        text = body.decode("utf-8", errors="replace").strip()
        try:
            if text.startswith("{"):
                payload = MeshJson.model_validate_json(text)
                mesh = _mesh_from_payload(payload)
            else:
                fmt = detect_format(None, text)
                mesh = load_mesh(body, format=fmt)
        except (ValidationError, LmapError, ValueError) as exc:
            return JSONResponse(status_code=400, content={"detail": str(exc)})
        sid = store.add(mesh)
        return MeshStats(
            id=sid,
            v=mesh.vertex_count,
            e=mesh.edge_count,
            f=mesh.face_count,
            chi=euler_characteristic(mesh),
            boundary_loops=mesh.boundary_loop_count(),
        )

    @app.get("/mesh/{sid}")
    def get_mesh(sid: str):
        session = store.get(sid)
        if session is None:
            return _not_found()
        return _mesh_payload(session.mesh)

    @app.get("/mesh/{sid}/curvature", response_model=Overlay)
    def get_curvature(sid: str):
        session = store.get(sid)
        if session is None:
            return _not_found()
        field = DiscreteMetric.from_mesh(session.mesh).vertex_curvature()
        return Overlay(name="curvature", values=[float(x) for x in field.values])

    @app.post("/mesh/{sid}/roi", response_model=RoiStats)
    def post_roi(sid: str, payload: RoiRequest):
        session = store.get(sid)
        if session is None:
            return _not_found()
        try:
            roi = RoiSelection.from_vertices(session.mesh, payload.vertices)
        except LmapError as exc:
            return JSONResponse(status_code=422, content={"detail": str(exc)})
        store.update(sid, roi=roi)
        return RoiStats(
            size=len(roi.vertices),
            interior_count=len(roi.interior),
            rim_count=len(roi.rim),
        )

    def _run_job(sid: str, roi: RoiSelection, request: FlattenRequest):
        session = store.get(sid)
        store.update(sid, status="running")
        try:
            config = FlowConfig(
                epsilon=request.epsilon,
                max_newton=request.max_newton,
                max_gd=request.max_gd,
                pin_rim=request.pin_rim,
            )
            deformed, steps = run_extrinsic_flow(
                session.mesh, roi, steps=request.steps, config=config
            )
            metrics = _metrics_payload(session.mesh, deformed, roi)
            interior = sorted(roi.interior)
            K = DiscreteMetric.from_mesh(deformed).vertex_curvature().values
            report = {
                "schema": SCHEMA,
                "steps": [
                    {
                        "step": r.step,
                        "converged": r.intrinsic.converged,
                        "newton_iterations": r.intrinsic.iterations,
                        "max_residual": r.intrinsic.max_residual,
                        "flips_replayed": r.flips_replayed,
                        "gd_iterations": r.gd_iterations,
                        "energy_initial": r.energies[0],
                        "energy_final": r.energies[-1],
                    }
                    for r in steps
                ],
                "final_curvature": {
                    "interior_max_abs": float(np.max(np.abs(K[interior]))),
                    "interior_sum_abs": float(np.sum(np.abs(K[interior]))),
                },
            }
            store.update(
                sid, status="done", result=deformed, report=report, metrics=metrics
            )
        except Exception as exc:  # job failures surface through /status
            store.update(sid, status="failed", error=type(exc).__name__)

    @app.post("/mesh/{sid}/flatten", status_code=202)
    def post_flatten(sid: str, request: FlattenRequest):
        session = store.get(sid)
        if session is None:
            return _not_found()
        if session.status in ("pending", "running"):
            return JSONResponse(
                status_code=409, content={"detail": "a job is already running"}
            )
        if request.steps < 1 or request.epsilon <= 0:
            return JSONResponse(
                status_code=422, content={"detail": "steps must be >= 1, epsilon > 0"}
            )
        roi = session.roi
        if request.seed is not None and request.radius is not None:
            from .mesh import geodesic_ball

            try:
                roi = RoiSelection.from_vertices(
                    session.mesh,
                    geodesic_ball(session.mesh, request.seed, request.radius),
                )
            except LmapError as exc:
                return JSONResponse(status_code=422, content={"detail": str(exc)})
            store.update(sid, roi=roi)
        if roi is None or not roi.vertices:
            return JSONResponse(status_code=422, content={"detail": "ROI is empty"})
        if not roi.interior:
            return JSONResponse(
                status_code=422, content={"detail": "ROI interior is empty"}
            )
        store.update(sid, status="pending", error=None, result=None,
                     report=None, metrics=None)
        executor.submit(_run_job, sid, roi, request)
        return {"job": {"status": "pending"}}

    @app.get("/mesh/{sid}/status", response_model=JobStatus)
    def get_status(sid: str):
        session = store.get(sid)
        if session is None:
            return _not_found()
        return JobStatus(status=session.status, error=session.error)

    @app.get("/mesh/{sid}/result")
    def get_result(sid: str):
        session = store.get(sid)
        if session is None:
            return _not_found()
        if session.status != "done" or session.result is None:
            return JSONResponse(status_code=404, content={"detail": "no result yet"})
        payload = _mesh_payload(session.result)
        payload["report"] = session.report
        return payload

    @app.get("/mesh/{sid}/metrics")
    def get_metrics(sid: str):
        session = store.get(sid)
        if session is None:
            return _not_found()
        if session.status != "done" or session.metrics is None:
            return JSONResponse(status_code=404, content={"detail": "no metrics yet"})
        return session.metrics

    return app
