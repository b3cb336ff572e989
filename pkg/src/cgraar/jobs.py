"""Job layer: the four pipeline operations behind both the service and the CLI.

Each job reads/writes ``.cgr`` containers, CSV curves, PGM previews, and a
JSON report that embeds the request for reproducibility. Ensemble outputs
carry no timestamps or timings, so reruns with identical inputs and seeds
are byte-identical at any worker count.
"""

from __future__ import annotations

import json
import math
import os
import time
from pathlib import Path

import numpy as np

from .complexity import ComplexityBudget, complexity_spectral
from .constraints import IntensityData, SupportMask
from .container import RasterRecord, read_container, write_container
from .datagen import apply_beamstop, exact_intensity, make_phantom, simulate_intensity
from .ensemble import EnsembleConfig, run_trials, select_and_average
from .errors import PayloadShapeError
from .field import ComplexField
from .metrics import error_fourier, error_real, prtf_map, prtf_radial, resolution_from_prtf
from .pgm import write_pgm
from .schemas import (
    EnsembleRequest,
    EnsembleResponse,
    EvaluateRequest,
    EvaluateResponse,
    ReconstructRequest,
    ReconstructResponse,
    SimulateRequest,
    SimulateResponse,
    TrialRow,
)
from .solvers import SolverConfig, run_reconstruction

__all__ = [
    "save_field",
    "load_field",
    "save_support",
    "load_support",
    "save_intensity",
    "load_intensity",
    "run_simulate",
    "run_reconstruct",
    "run_ensemble",
    "run_evaluate",
]


def save_field(path, field: ComplexField, name: str = "field") -> None:
    write_container(path, [RasterRecord(name=name, data=field.values, dx=field.dx, dy=field.dy, role="field")])


def load_field(path) -> ComplexField:
    records, _ = read_container(path)
    for rec in records:
        if rec.role == "field":
            return ComplexField(rec.data.astype(np.complex128), dx=rec.dx, dy=rec.dy)
    raise PayloadShapeError(f"{path}: no raster with role 'field'")


def save_support(path, support: SupportMask) -> None:
    write_container(path, [RasterRecord(name="support", data=support.mask, role="support")])


def load_support(path) -> SupportMask:
    records, _ = read_container(path)
    for rec in records:
        if rec.role == "support":
            data = rec.data if rec.data.dtype == np.bool_ else rec.data != 0.0
            return SupportMask(data)
    raise PayloadShapeError(f"{path}: no raster with role 'support'")


def save_intensity(path, data: IntensityData) -> None:
    write_container(
        path,
        [
            RasterRecord(name="counts", data=data.counts, role="intensity"),
            RasterRecord(name="measured", data=data.measured, role="mask"),
        ],
    )


def load_intensity(path) -> IntensityData:
    records, _ = read_container(path)
    counts = mask = None
    for rec in records:
        if rec.role == "intensity" and counts is None:
            counts = rec.data
        elif rec.role == "mask" and mask is None:
            mask = rec.data if rec.data.dtype == np.bool_ else rec.data != 0.0
    if counts is None:
        raise PayloadShapeError(f"{path}: no raster with role 'intensity'")
    return IntensityData.from_counts(counts, mask)


def _write_json(path, payload: dict) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def _out_dir(out: str) -> Path:
    path = Path(out)
    path.mkdir(parents=True, exist_ok=True)
    return path


def run_simulate(req: SimulateRequest) -> SimulateResponse:
    """Generate a phantom, its support, and (optionally noisy) intensity data."""
    out = _out_dir(req.out)
    fraction = (req.support / req.window) ** 2
    phantom, support = make_phantom(req.phantom, req.window, fraction)
    if req.photons is None:
        data = exact_intensity(phantom)
    else:
        data = simulate_intensity(phantom, req.photons, req.seed)
    if req.beamstop_radius > 0:
        data = apply_beamstop(data, req.beamstop_radius)

    phantom_path = out / "phantom.cgr"
    support_path = out / "support.cgr"
    intensity_path = out / "intensity.cgr"
    preview_path = out / "preview.pgm"
    save_field(phantom_path, phantom, name="phantom")
    save_support(support_path, support)
    save_intensity(intensity_path, data)
    display = data.counts**0.1
    peak = display.max()
    write_pgm(preview_path, np.fft.fftshift(display / peak if peak > 0 else display))

    response = SimulateResponse(
        out_dir=str(out),
        phantom_path=str(phantom_path),
        support_path=str(support_path),
        intensity_path=str(intensity_path),
        preview_path=str(preview_path),
        zero_count_fraction=float((data.counts == 0).mean()),
        unmeasured_fraction=float(data.unmeasured_fraction),
        zeta0=complexity_spectral(data),
        config=req,
    )
    _write_json(out / "simulate.json", response.model_dump())
    return response


def _solver_config(req: ReconstructRequest | EnsembleRequest, data: IntensityData, seed: int) -> SolverConfig:
    er_tail = req.er_tail
    if er_tail is None:
        er_tail = 100 if req.algo == "raar-er" else 0
    refresh = req.refresh_zeta0
    if refresh is None:
        # retained-count blocked pixels (a simulated beam stop) imply refresh
        refresh = bool(((data.counts > 0) & ~data.measured).any())
    budget = ComplexityBudget(
        tolerance=req.tolerance,
        tau=req.tau,
        window=req.window,
        max_out_subiters=req.max_out_subiters,
        max_in_subiters=req.max_in_subiters,
    )
    return SolverConfig(
        algorithm=req.algo,
        beta=req.beta,
        gamma_m=req.gamma_m,
        gamma_s=req.gamma_s,
        n_main=req.iters,
        n_er=er_tail,
        n_warmup=req.warmup,
        n_guided=req.guided,
        budget=budget,
        seed=seed,
        refresh_zeta0=refresh,
    )


def run_reconstruct(req: ReconstructRequest) -> ReconstructResponse:
    """One seeded reconstruction; writes the field, trace CSV, and run report."""
    out = _out_dir(req.out)
    data = load_intensity(req.data)
    support = load_support(req.support)
    config = _solver_config(req, data, req.seed)

    start = time.perf_counter()
    solution = run_reconstruction(data, support, config)
    elapsed = time.perf_counter() - start

    field_path = out / "solution.cgr"
    trace_path = out / "trace.csv"
    save_field(field_path, solution.field, name="solution")
    solution.trace.to_csv(trace_path)

    warning = None
    if solution.iterations_run == 0:
        warning = "schedule ran zero iterations; the output is the random initial guess"
    final = solution.trace.final if len(solution.trace) else None
    response = ReconstructResponse(
        out_dir=str(out),
        field_path=str(field_path),
        trace_path=str(trace_path),
        report_path=str(out / "report.json"),
        e_fourier=solution.e_fourier,
        iterations_run=solution.iterations_run,
        zeta_final=final.zeta if final else None,
        zeta0=final.zeta0 if final else None,
        elapsed_seconds=elapsed,
        warning=warning,
        config=req,
    )
    _write_json(out / "report.json", response.model_dump())
    return response


def _trial_rows(report) -> list[TrialRow]:
    rows = []
    for t in report.trials:
        rows.append(
            TrialRow(
                index=t.index,
                seed=t.seed,
                e_fourier=None if math.isnan(t.e_fourier) else t.e_fourier,
                correlation=None if math.isnan(t.correlation) else t.correlation,
                selected=t.selected,
                error=t.error,
            )
        )
    return rows


def run_ensemble(req: EnsembleRequest) -> EnsembleResponse:
    """Seeded trials, alignment, correlation selection, coherent average, PRTF."""
    out = _out_dir(req.out)
    data = load_intensity(req.data)
    support = load_support(req.support)
    jobs = req.jobs
    if jobs is None:
        jobs = int(os.environ.get("CGRAAR_JOBS", "1"))
    config = _solver_config(req, data, req.base_seed)
    ensemble_config = EnsembleConfig(
        n_trials=req.trials,
        correlation_threshold=req.threshold,
        parallelism=jobs,
        base_seed=req.base_seed,
    )
    runs = run_trials(data, support, config, ensemble_config)
    report = select_and_average(runs, support, ensemble_config, data=data)

    trials_path = out / "trials.csv"
    with open(trials_path, "w", encoding="utf-8", newline="") as fh:
        fh.write("index,seed,e_fourier,correlation,selected,error\n")
        for t in report.trials:
            ef = "" if math.isnan(t.e_fourier) else repr(t.e_fourier)
            co = "" if math.isnan(t.correlation) else repr(t.correlation)
            err = t.error or ""
            fh.write(f"{t.index},{t.seed},{ef},{co},{int(t.selected)},{err}\n")

    averaged_path = prtf_path = magnitude_path = None
    if report.averaged_field is not None:
        averaged_path = out / "averaged.cgr"
        save_field(averaged_path, report.averaged_field, name="averaged")
        prtf_path = out / "prtf.csv"
        report.prtf_curve.to_csv(prtf_path)
        magnitude = np.abs(report.averaged_field.values)
        peak = magnitude.max()
        magnitude_path = out / "averaged_magnitude.pgm"
        write_pgm(magnitude_path, magnitude / peak if peak > 0 else magnitude)

    response = EnsembleResponse(
        out_dir=str(out),
        averaged_path=str(averaged_path) if averaged_path else None,
        trials_path=str(trials_path),
        prtf_path=str(prtf_path) if prtf_path else None,
        report_path=str(out / "report.json"),
        magnitude_path=str(magnitude_path) if magnitude_path else None,
        selected_count=report.selected_count,
        total_count=report.total_count,
        e_fourier_average=report.e_fourier_average,
        resolution_pixels=report.resolution.pixels if report.resolution else None,
        resolution_crossed=report.resolution.crossed if report.resolution else None,
        trials=_trial_rows(report),
        config=req,
    )
    _write_json(out / "report.json", response.model_dump())
    return response


def run_evaluate(req: EvaluateRequest) -> EvaluateResponse:
    """PRTF curve, resolution, and error metrics for a saved reconstruction."""
    out = _out_dir(req.out)
    field = load_field(req.field)
    data = load_intensity(req.data)
    ratio, valid = prtf_map(field, data)
    curve = prtf_radial(ratio, valid)
    resolution = resolution_from_prtf(curve)
    e_f = error_fourier(field, data)
    e_r = None
    if req.truth is not None:
        e_r = error_real(field, load_field(req.truth))

    prtf_path = out / "prtf.csv"
    curve.to_csv(prtf_path)
    response = EvaluateResponse(
        out_dir=str(out),
        prtf_path=str(prtf_path),
        report_path=str(out / "evaluation.json"),
        e_fourier=e_f,
        e_real=e_r,
        resolution_pixels=resolution.pixels,
        resolution_crossed=resolution.crossed,
        config=req,
    )
    _write_json(out / "evaluation.json", response.model_dump())
    return response
