"""Localhost HTTP/JSON bridge for the interactive planner UI.

One session per process; mutating requests serialize through a lock.
Mesh payloads travel as binary STL (the UI and the exporter share one
format); reports ride in the X-Report header next to the geometry.
"""

import io
import json
import math
import threading
import zipfile
from typing import Optional

from fastapi import FastAPI, HTTPException
from fastapi.responses import JSONResponse, Response
from pydantic import BaseModel

from .baseline import adjust_marker, baseline_to_dict, compute_baseline, make_seed_frame
from .catalog import catalog as builtin_catalog
from .catalog import model_by_id, save_catalog
from .errors import (
    BaselineTooShort,
    EmptySession,
    IndexOutOfRange,
    NothingToSave,
    SeedMiss,
)
from .implant import generate_implant, implant_span_mm
from .session import Session, export_all, save_current, set_current
from .spatial import build_index
from .stl import save_stl

DEFAULT_WHEEL_STEP_DEG = 5.0
DEFAULT_STEP_MM = 0.5


class SeedBody(BaseModel):
    point: list
    angle_deg: float = 0.0
    model_id: str
    step_mm: Optional[float] = None


class RotateBody(BaseModel):
    delta_ticks: int


class WheelStepBody(BaseModel):
    degrees: float


class AdjustBody(BaseModel):
    index: int
    point: list


class ExportBody(BaseModel):
    mode: str = "combined"


class PlannerState:
    """All mutable planning state, guarded by one lock."""

    def __init__(self, mesh, models, mesh_ref):
        self.mesh = mesh
        self.index = build_index(mesh) if mesh is not None else None
        self.models = models
        self.session = Session(mesh_ref=mesh_ref)
        self.frame = None
        self.baseline = None
        self.click = None
        self.angle_deg = 0.0
        self.model_id = None
        self.step_mm = DEFAULT_STEP_MM
        self.wheel_step_deg = DEFAULT_WHEEL_STEP_DEG
        self.lock = threading.Lock()

    def recompute(self):
        model = model_by_id(self.models, self.model_id)
        self.frame = make_seed_frame(self.index, self.click, math.radians(self.angle_deg))
        self.baseline = compute_baseline(self.index, self.frame, model, self.step_mm)


def create_app(mesh=None, models=None, mesh_ref: str = "anatomy") -> FastAPI:
    models = list(models) if models is not None else builtin_catalog()
    app = FastAPI(title="plateforge planner", docs_url=None, redoc_url=None)
    state = PlannerState(mesh, models, mesh_ref)
    app.state.planner = state

    def model_ids():
        return [m.id for m in state.models]

    @app.get("/mesh")
    def get_mesh():
        if state.mesh is None:
            raise HTTPException(status_code=503, detail="no mesh loaded")
        lo, hi = state.mesh.bbox()
        return Response(
            content=save_stl(state.mesh, "binary"),
            media_type="application/octet-stream",
            headers={
                "X-Face-Count": str(state.mesh.n_faces),
                "X-Bbox": json.dumps({"min": list(lo), "max": list(hi)}),
            },
        )

    @app.get("/catalog")
    def get_catalog():
        return JSONResponse(json.loads(save_catalog(state.models)))

    @app.post("/seed")
    def post_seed(body: SeedBody):
        if body.model_id not in model_ids():
            raise HTTPException(
                status_code=400,
                detail={"error": f"unknown model {body.model_id!r}", "catalog": model_ids()},
            )
        with state.lock:
            state.click = [float(c) for c in body.point]
            state.angle_deg = float(body.angle_deg)
            state.model_id = body.model_id
            if body.step_mm is not None:
                state.step_mm = float(body.step_mm)
            try:
                state.recompute()
            except SeedMiss as exc:
                state.frame = None
                state.baseline = None
                raise HTTPException(status_code=422, detail=str(exc)) from None
            return JSONResponse(baseline_to_dict(state.baseline))

    @app.post("/rotate")
    def post_rotate(body: RotateBody):
        with state.lock:
            if state.frame is None:
                raise HTTPException(status_code=409, detail="no seed placed")
            state.angle_deg += body.delta_ticks * state.wheel_step_deg
            state.recompute()
            return JSONResponse(baseline_to_dict(state.baseline))

    @app.post("/wheel_step")
    def post_wheel_step(body: WheelStepBody):
        if body.degrees <= 0:
            raise HTTPException(status_code=400, detail="wheel step must be positive")
        with state.lock:
            state.wheel_step_deg = float(body.degrees)
            return {"wheel_step_deg": state.wheel_step_deg}

    @app.post("/adjust_marker")
    def post_adjust(body: AdjustBody):
        with state.lock:
            if state.baseline is None:
                raise HTTPException(status_code=409, detail="no baseline computed")
            try:
                state.baseline = adjust_marker(
                    state.baseline, state.index, body.index, [float(c) for c in body.point]
                )
            except IndexOutOfRange as exc:
                raise HTTPException(status_code=400, detail=str(exc)) from None
            return JSONResponse(baseline_to_dict(state.baseline))

    @app.post("/generate")
    def post_generate():
        with state.lock:
            if state.baseline is None:
                raise HTTPException(status_code=409, detail="no baseline computed")
            model = model_by_id(state.models, state.model_id)
            try:
                implant = generate_implant(state.baseline, model)
            except BaselineTooShort as exc:
                raise HTTPException(
                    status_code=422,
                    detail={
                        "error": str(exc),
                        "required_mm": exc.required_mm,
                        "available_mm": exc.available_mm,
                    },
                ) from None
            state.session = set_current(state.session, implant)
            report = {
                "ring_count": len(implant.placements),
                "triangle_count": implant.mesh.n_faces,
                "span_mm": implant_span_mm(implant),
            }
            return Response(
                content=save_stl(implant.mesh, "binary"),
                media_type="application/octet-stream",
                headers={"X-Report": json.dumps(report)},
            )

    @app.post("/save")
    def post_save():
        with state.lock:
            try:
                state.session = save_current(state.session)
            except NothingToSave as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from None
            return {"saved_count": len(state.session.saved)}

    @app.post("/export")
    def post_export(body: ExportBody = ExportBody()):
        with state.lock:
            try:
                if body.mode == "combined":
                    payload = export_all(state.session, "combined")
                    return Response(
                        content=payload,
                        media_type="application/octet-stream",
                        headers={"Content-Disposition": 'attachment; filename="implants.stl"'},
                    )
                if body.mode == "per_implant":
                    files = export_all(state.session, "per_implant")
                    buf = io.BytesIO()
                    with zipfile.ZipFile(buf, "w", zipfile.ZIP_STORED) as zf:
                        for name, data in files:
                            # fixed timestamp keeps the archive byte-reproducible
                            info = zipfile.ZipInfo(name, date_time=(1980, 1, 1, 0, 0, 0))
                            zf.writestr(info, data)
                    return Response(
                        content=buf.getvalue(),
                        media_type="application/zip",
                        headers={"Content-Disposition": 'attachment; filename="implants.zip"'},
                    )
                raise HTTPException(status_code=400, detail=f"unknown export mode {body.mode!r}")
            except EmptySession as exc:
                raise HTTPException(status_code=409, detail=str(exc)) from None

    return app
