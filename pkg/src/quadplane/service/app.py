"""FastAPI application exposing the model suite over HTTP."""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from ..db import CoefficientDatabase
from ..exceptions import (DomainError, EnvelopeError, FormatError,
                          InfeasibleError, QuadplaneError, SequencingError,
                          SingularFitError)
from . import handlers
from . import schemas as s

_STATUS = (
    (InfeasibleError, 409),
    (FormatError, 400),
    (SequencingError, 400),
    (DomainError, 400),
    (EnvelopeError, 422),
    (SingularFitError, 422),
)


def _status_for(exc: QuadplaneError) -> int:
    for cls, code in _STATUS:
        if isinstance(exc, cls):
            return code
    return 422


def create_app(db_path: str | None = None) -> FastAPI:
    db = CoefficientDatabase.load(db_path)
    app = FastAPI(title="quadplane model service", version="0.1.0")

    @app.exception_handler(QuadplaneError)
    async def _domain_error(request: Request, exc: QuadplaneError):
        body = s.ErrorResponse(error=s.ErrorBody(
            type=type(exc).__name__,
            reason=getattr(exc, "reason", "error"),
            message=str(exc),
            detail=getattr(exc, "detail", {}) or {},
        ))
        return JSONResponse(status_code=_status_for(exc), content=body.model_dump())

    @app.get("/health")
    async def health():
        return {"status": "ok", "database": db.name}

    @app.get("/info", response_model=s.InfoResponse)
    async def info():
        return handlers.handle_info(db)

    @app.post("/eval", response_model=s.EvalResponse)
    async def eval_condition(req: s.EvalRequest):
        return handlers.handle_eval(db, req)

    @app.post("/thrust", response_model=s.ThrustResponse)
    async def thrust(req: s.ThrustRequest):
        return handlers.handle_thrust(db, req)

    @app.post("/trim", response_model=s.TrimResponse)
    async def trim(req: s.TrimRequest):
        return handlers.handle_trim(db, req)

    @app.post("/transition", response_model=s.TransitionResponse)
    async def transition(req: s.TransitionRequest):
        return handlers.handle_transition(db, req)

    @app.post("/envelope", response_model=s.EnvelopeResponse)
    async def envelope(req: s.EnvelopeRequest):
        return handlers.handle_envelope(db, req)

    @app.post("/mesh", response_model=s.MeshResponse)
    async def mesh(req: s.MeshRequest):
        return handlers.handle_mesh(db, req)

    @app.post("/reduce", response_model=s.ReduceResponse)
    async def reduce(req: s.ReduceRequest):
        return handlers.handle_reduce(db, req)

    @app.post("/fit", response_model=s.FitResponse)
    async def fit(req: s.FitRequest):
        return handlers.handle_fit(db, req)

    return app
