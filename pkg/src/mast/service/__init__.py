"""HTTP API for live what-if sessions: set impacts, set/clear evidence, infer.

The service holds model sessions in memory (optionally snapshotted to
SNAPSHOT_DIR) and exposes every number at full precision; display rounding is
the client's job.
"""

from __future__ import annotations

import os

from fastapi import FastAPI, HTTPException, Response
from fastapi.middleware.cors import CORSMiddleware

from .. import inference, model_io
from ..model import build_model, infer_training
from .schemas import (
    CreateModelRequest,
    EvidenceWrite,
    FactorInfo,
    ImpactsPatch,
    InferResponse,
    ModelCreated,
    RevisionResponse,
    SensitivityRequest,
    SensitivityResponse,
    SensitivityRowBody,
    SessionSnapshot,
)
from .sessions import ModelSession, SessionStore, SessionView, UnknownSessionError

DEFAULT_PORT = 8080


def _factor_infos(view: ModelSession | SessionView) -> list[FactorInfo]:
    return [
        FactorInfo(id=f.id, label=f.label, impact=f.impact)
        for f in view.model.factors
    ]


def create_app(snapshot_dir: str | None = None, cors_origins: list[str] | None = None) -> FastAPI:
    app = FastAPI(title="mast", version="0.1.0")
    app.add_middleware(
        CORSMiddleware,
        allow_origins=cors_origins or ["*"],
        allow_methods=["*"],
        allow_headers=["*"],
    )
    store = SessionStore(snapshot_dir)
    app.state.store = store

    def fetch(model_id: str) -> ModelSession:
        try:
            return store.get(model_id)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail=f"unknown model {model_id!r}") from None

    def fetch_view(model_id: str) -> SessionView:
        try:
            return store.read(model_id)
        except UnknownSessionError:
            raise HTTPException(status_code=404, detail=f"unknown model {model_id!r}") from None

    def fetch_factor(session: ModelSession | SessionView, factor_id: str):
        try:
            return session.model.factor(factor_id)
        except KeyError as exc:
            raise HTTPException(status_code=404, detail=exc.args[0]) from None

    @app.get("/api/health")
    def health() -> dict:
        return {"status": "ok"}

    @app.post("/api/models", response_model=ModelCreated, status_code=201)
    def create_model(body: CreateModelRequest) -> ModelCreated:
        session = store.create(body.impacts, body.base_cost)
        return ModelCreated(
            model_id=session.model_id,
            factors=_factor_infos(session),
            revision=session.revision,
        )

    @app.get("/api/models/{model_id}", response_model=SessionSnapshot)
    def get_model(model_id: str) -> SessionSnapshot:
        view = fetch_view(model_id)
        return SessionSnapshot(
            model_id=view.model_id,
            factors=_factor_infos(view),
            base_cost=view.model.base_cost,
            evidence=view.evidence,
            revision=view.revision,
            created_at=view.created_at,
            updated_at=view.updated_at,
        )

    @app.put("/api/models/{model_id}/evidence/{factor_id}", response_model=RevisionResponse)
    def put_evidence(model_id: str, factor_id: str, body: EvidenceWrite) -> RevisionResponse:
        session = fetch_view(model_id)
        factor = fetch_factor(session, factor_id)
        if body.state not in factor.scale.states:
            raise HTTPException(
                status_code=422,
                detail=f"unknown state {body.state!r} for factor {factor_id!r} "
                       f"(valid: {', '.join(factor.scale.states)})",
            )
        session = store.mutate(model_id, lambda s: s.evidence.__setitem__(factor_id, body.state))
        return RevisionResponse(revision=session.revision)

    @app.delete("/api/models/{model_id}/evidence/{factor_id}", response_model=RevisionResponse)
    def clear_evidence(model_id: str, factor_id: str) -> RevisionResponse:
        fetch_factor(fetch_view(model_id), factor_id)
        session = store.mutate(model_id, lambda s: s.evidence.pop(factor_id, None))
        return RevisionResponse(revision=session.revision)

    @app.patch("/api/models/{model_id}/impacts", response_model=SessionSnapshot)
    def patch_impacts(model_id: str, body: ImpactsPatch) -> SessionSnapshot:
        fetch(model_id)

        def rebuild(s: ModelSession) -> None:
            s.model = build_model(body.impacts, s.model.base_cost)

        store.mutate(model_id, rebuild)
        return get_model(model_id)

    @app.post("/api/models/{model_id}/infer", response_model=InferResponse)
    def infer(model_id: str) -> InferResponse:
        view = fetch_view(model_id)
        estimate = infer_training(view.model, view.evidence)
        post = inference.posterior(
            view.model.diagram, view.evidence, view.model.training_node_id)
        return InferResponse(
            probability=estimate.probability,
            percentage=estimate.percentage,
            cost=estimate.cost,
            posterior=dict(post.probabilities),
            evidence=view.evidence,
            revision=view.revision,
        )

    @app.post("/api/models/{model_id}/sensitivity", response_model=SensitivityResponse)
    def run_sensitivity(model_id: str, body: SensitivityRequest) -> SensitivityResponse:
        view = fetch_view(model_id)
        if body.vary not in view.model.factor_ids:
            raise HTTPException(
                status_code=422,
                detail=f"unknown factor {body.vary!r} "
                       f"(valid: {', '.join(view.model.factor_ids)})",
            )
        result = inference.sensitivity(
            view.model.diagram,
            view.evidence,
            view.model.training_node_id,
            body.vary,
            target_state="Yes",
        )
        return SensitivityResponse(
            vary=result.vary,
            target_state=result.target_state,
            rows=[
                SensitivityRowBody(
                    state=row.state,
                    posterior=dict(row.posterior.probabilities),
                    expected_utility=row.expected_utility,
                )
                for row in result.rows
            ],
            spread=result.spread,
            revision=view.revision,
        )

    @app.get("/api/models/{model_id}/export")
    def export_model(model_id: str, format: str = "native") -> Response:
        view = fetch_view(model_id)
        if format == "xdsl":
            data = model_io.export_xdsl(view.model.diagram)
            media, filename = "application/xml", f"{model_id}.xdsl"
        elif format == "native":
            data = model_io.save_model(view.model, evidence=view.evidence)
            media, filename = "application/json", f"{model_id}.mast.json"
        else:
            raise HTTPException(
                status_code=422,
                detail=f"unknown format {format!r} (valid: native, xdsl)",
            )
        return Response(
            content=data,
            media_type=media,
            headers={"Content-Disposition": f'attachment; filename="{filename}"'},
        )

    return app


app = create_app(os.environ.get("SNAPSHOT_DIR") or None)
