"""Pydantic request/response models shared by the HTTP service and the CLI.

Paths in requests refer to the filesystem of the process executing the job
(the server's when running remotely); every response echoes its request so
outputs are reproducible from the report alone.
"""

from __future__ import annotations

from typing import Literal

from pydantic import BaseModel, ConfigDict, Field

Algorithm = Literal["er", "hio", "dm", "raar", "raar-er", "cg-raar"]
PhantomKind = Literal["disc-blobs", "annulus", "text-like"]


class SimulateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    phantom: PhantomKind = "disc-blobs"
    window: int = Field(default=512, ge=8)
    support: int = Field(default=160, ge=2, description="support side length in pixels")
    photons: float | None = Field(default=500.0, gt=0, description="mean photons/pixel; null for noiseless data")
    beamstop_radius: float = Field(default=0.0, ge=0)
    seed: int = 0
    out: str


class SimulateResponse(BaseModel):
    out_dir: str
    phantom_path: str
    support_path: str
    intensity_path: str
    preview_path: str
    zero_count_fraction: float
    unmeasured_fraction: float
    zeta0: float
    config: SimulateRequest


class ReconstructRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    algo: Algorithm = "raar-er"
    data: str
    support: str
    out: str
    beta: float = Field(default=0.9, gt=0, le=1)
    gamma_m: float | None = None
    gamma_s: float | None = None
    iters: int = Field(default=1000, ge=0, description="main iterations (non-guided algorithms)")
    er_tail: int | None = Field(default=None, ge=0, description="concluding ER iterations; defaults to 100 for raar-er, 0 otherwise")
    warmup: int = Field(default=500, ge=0, description="plain RAAR iterations before guidance (cg-raar)")
    guided: int = Field(default=500, ge=0, description="complexity-guided iterations (cg-raar)")
    seed: int = 0
    tolerance: float = Field(default=0.005, gt=0, lt=1)
    tau: float = Field(default=5e-3, gt=0)
    window: int = Field(default=20, ge=2, description="history length for outside-complexity control")
    max_out_subiters: int = Field(default=50, ge=1)
    max_in_subiters: int = Field(default=200, ge=1)
    refresh_zeta0: bool | None = Field(
        default=None,
        description="re-estimate target complexity each guided iteration; defaults to on when blocked pixels exist",
    )


class ReconstructResponse(BaseModel):
    out_dir: str
    field_path: str
    trace_path: str
    report_path: str
    e_fourier: float
    iterations_run: int
    zeta_final: float | None
    zeta0: float | None
    elapsed_seconds: float
    warning: str | None = None
    config: ReconstructRequest


class EnsembleRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    algo: Algorithm = "raar-er"
    data: str
    support: str
    out: str
    trials: int = Field(default=10, ge=1)
    threshold: float = Field(default=0.96, gt=0, le=1)
    jobs: int | None = Field(default=None, ge=1, description="worker count; defaults to $CGRAAR_JOBS or 1")
    base_seed: int = 0
    beta: float = Field(default=0.9, gt=0, le=1)
    gamma_m: float | None = None
    gamma_s: float | None = None
    iters: int = Field(default=1000, ge=0)
    er_tail: int | None = Field(default=None, ge=0)
    warmup: int = Field(default=500, ge=0)
    guided: int = Field(default=500, ge=0)
    tolerance: float = Field(default=0.005, gt=0, lt=1)
    tau: float = Field(default=5e-3, gt=0)
    window: int = Field(default=20, ge=2)
    max_out_subiters: int = Field(default=50, ge=1)
    max_in_subiters: int = Field(default=200, ge=1)
    refresh_zeta0: bool | None = None


class TrialRow(BaseModel):
    index: int
    seed: int
    e_fourier: float | None
    correlation: float | None
    selected: bool
    error: str | None = None


class EnsembleResponse(BaseModel):
    out_dir: str
    averaged_path: str | None
    trials_path: str
    prtf_path: str | None
    report_path: str
    magnitude_path: str | None
    selected_count: int
    total_count: int
    e_fourier_average: float | None
    resolution_pixels: float | None
    resolution_crossed: bool | None
    trials: list[TrialRow]
    config: EnsembleRequest


class EvaluateRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    field: str
    data: str
    out: str
    truth: str | None = None


class EvaluateResponse(BaseModel):
    out_dir: str
    prtf_path: str
    report_path: str
    e_fourier: float
    e_real: float | None
    resolution_pixels: float
    resolution_crossed: bool
    e_fourier_domain: Literal["measured"] = "measured"
    config: EvaluateRequest


class HealthResponse(BaseModel):
    status: str
    version: str
