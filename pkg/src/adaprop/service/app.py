"""FastAPI application exposing the proposal toolkit over HTTP."""

from __future__ import annotations

from fastapi import FastAPI, HTTPException

from ..config import RunConfig
from . import handlers, schemas as S

__all__ = ["create_app", "app"]


def create_app() -> FastAPI:
    app = FastAPI(
        title="adaprop",
        description="Adaptive per-category region-proposal toolkit",
        version="0.1.0",
    )

    @app.get("/healthz")
    def healthz() -> dict:
        return {"status": "ok"}

    @app.get("/defaults", response_model=RunConfig)
    def defaults() -> RunConfig:
        return RunConfig()

    def _wrap(fn, req):
        try:
            return fn(req)
        except (ValueError, RuntimeError) as exc:
            raise HTTPException(status_code=422, detail=str(exc)) from exc

    @app.post("/simulate", response_model=S.SimulateResponse)
    def simulate(req: S.SimulateRequest):
        return _wrap(handlers.handle_simulate, req)

    @app.post("/assign-counts", response_model=S.AssignCountsResponse)
    def assign_counts(req: S.AssignCountsRequest):
        return _wrap(handlers.handle_assign_counts, req)

    @app.post("/predict-counts", response_model=S.PredictCountsResponse)
    def predict_counts(req: S.PredictCountsRequest):
        return _wrap(handlers.handle_predict_counts, req)

    @app.post("/label-anchors", response_model=S.LabelAnchorsResponse)
    def label_anchors(req: S.LabelAnchorsRequest):
        return _wrap(handlers.handle_label_anchors, req)

    @app.post("/nms", response_model=S.DetectionsResponse)
    def nms(req: S.NmsRequest):
        return _wrap(handlers.handle_nms, req)

    @app.post("/select", response_model=S.SelectResponse)
    def select(req: S.SelectRequest):
        return _wrap(handlers.handle_select, req)

    @app.post("/evaluate", response_model=S.EvaluateResponse)
    def evaluate(req: S.EvaluateRequest):
        return _wrap(handlers.handle_evaluate, req)

    @app.post("/pipeline", response_model=S.PipelineResponse)
    def pipeline(req: S.PipelineRequest):
        return _wrap(handlers.handle_pipeline, req)

    return app


app = create_app()
