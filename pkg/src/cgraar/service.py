"""FastAPI service exposing the reconstruction pipeline.

Jobs run synchronously in the serving process and read/write files on its
filesystem, which suits a lab compute box shared over a local network. The
CLI talks to these endpoints when given ``--server``; otherwise it invokes
the same job functions in-process.
"""

from __future__ import annotations

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse

from . import __version__, jobs
from .errors import CgraarError, ContainerError
from .schemas import (
    EnsembleRequest,
    EnsembleResponse,
    EvaluateRequest,
    EvaluateResponse,
    HealthResponse,
    ReconstructRequest,
    ReconstructResponse,
    SimulateRequest,
    SimulateResponse,
)

__all__ = ["create_app"]


def create_app() -> FastAPI:
    app = FastAPI(
        title="cgraar",
        version=__version__,
        description="Complexity-guided RAAR phase retrieval service",
    )

    @app.exception_handler(ContainerError)
    async def container_error(request: Request, exc: ContainerError):
        return JSONResponse(status_code=400, content={"detail": str(exc), "code": "data-format"})

    @app.exception_handler(CgraarError)
    async def cgraar_error(request: Request, exc: CgraarError):
        return JSONResponse(status_code=400, content={"detail": str(exc), "code": "invalid-input"})

    @app.exception_handler(FileNotFoundError)
    async def missing_file(request: Request, exc: FileNotFoundError):
        return JSONResponse(status_code=400, content={"detail": str(exc), "code": "data-format"})

    @app.exception_handler(ValueError)
    async def value_error(request: Request, exc: ValueError):
        return JSONResponse(status_code=422, content={"detail": str(exc), "code": "invalid-value"})

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/simulate", response_model=SimulateResponse)
    def simulate(req: SimulateRequest) -> SimulateResponse:
        return jobs.run_simulate(req)

    @app.post("/reconstruct", response_model=ReconstructResponse)
    def reconstruct(req: ReconstructRequest) -> ReconstructResponse:
        return jobs.run_reconstruct(req)

    @app.post("/ensemble", response_model=EnsembleResponse)
    def ensemble(req: EnsembleRequest) -> EnsembleResponse:
        return jobs.run_ensemble(req)

    @app.post("/evaluate", response_model=EvaluateResponse)
    def evaluate(req: EvaluateRequest) -> EvaluateResponse:
        return jobs.run_evaluate(req)

    return app
