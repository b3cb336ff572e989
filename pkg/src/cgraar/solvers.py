"""Iteration engines: ER, HIO, DM, RAAR, the RAAR-ER pipeline, and CG-RAAR.

All engines start from a seeded random guess confined to the support, run a
fixed schedule, record a per-iteration complexity trace, and return the final
field with its Fourier-domain error. One run is strictly single-threaded and
deterministic; parallelism belongs to the ensemble layer.

CG-RAAR wraps each RAAR step with complexity-reduction sub-iterations:
outside the support the complexity is nudged toward the mean-minus-std of
its recent history, inside the support it is reduced until the total lands
within the configured band around the target complexity measured from the
raw intensity.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .complexity import (
    ComplexityBudget,
    ComplexityTrace,
    TraceRecord,
    _gradient_energy_map,
    _reduce_region,
    _spectral_from_counts,
)
from .constraints import IntensityData, SupportMask, _project_magnitude_arr
from .errors import InvalidFieldError, ShapeMismatchError, SolverDivergenceError
from .field import ComplexField, require_same_shape
from .metrics import error_fourier

__all__ = [
    "ALGORITHMS",
    "SolverConfig",
    "TrialSolution",
    "init_random",
    "er_iterate",
    "hio_iterate",
    "dm_iterate",
    "raar_iterate",
    "run_raar_er",
    "run_cg_raar",
    "run_reconstruction",
]

ALGORITHMS = ("er", "hio", "dm", "raar", "raar-er", "cg-raar")


@dataclass(frozen=True)
class SolverConfig:
    """Schedule and parameters for one reconstruction run.

    ``n_main``/``n_er`` drive the plain algorithms and RAAR-ER;
    ``n_warmup``/``n_guided`` drive CG-RAAR. ``gamma_m``/``gamma_s`` default
    to 1/beta and -1/beta when left None. ``refresh_zeta0`` re-estimates the
    target complexity each guided iteration from the intensity with
    unmeasured pixels filled by the current iterate (needed when a beam stop
    blocks real signal).
    """

    algorithm: str
    beta: float = 0.9
    gamma_m: float | None = None
    gamma_s: float | None = None
    n_main: int = 1000
    n_er: int = 100
    n_warmup: int = 500
    n_guided: int = 500
    budget: ComplexityBudget = ComplexityBudget()
    seed: int = 0
    refresh_zeta0: bool = False

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ValueError(f"unknown algorithm {self.algorithm!r}, expected one of {ALGORITHMS}")
        if not (0 < self.beta <= 1):
            raise ValueError(f"beta must lie in (0, 1], got {self.beta}")
        for name in ("n_main", "n_er", "n_warmup", "n_guided"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be nonnegative")

    @property
    def effective_gamma_m(self) -> float:
        return 1.0 / self.beta if self.gamma_m is None else self.gamma_m

    @property
    def effective_gamma_s(self) -> float:
        return -1.0 / self.beta if self.gamma_s is None else self.gamma_s


@dataclass(frozen=True)
class TrialSolution:
    """One converged reconstruction with its trace and final Fourier error."""

    field: ComplexField
    seed: int
    e_fourier: float
    trace: ComplexityTrace
    iterations_run: int


def init_random(shape: tuple[int, int], support: SupportMask, seed: int) -> ComplexField:
    """Support-confined random start: uniform amplitude [0,1) and phase [0,2pi).

    Uses the counter-based Philox generator keyed by ``seed`` so parallel
    trials with distinct seeds reproduce independently of scheduling.
    """
    if tuple(shape) != support.shape:
        raise ShapeMismatchError(f"shape {shape} does not match support {support.shape}")
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    amplitude = rng.random(shape)
    phase = rng.random(shape) * (2.0 * np.pi)
    values = np.where(support.mask, amplitude * np.exp(1j * phase), 0.0)
    return ComplexField(values)


def _support_arr(values: np.ndarray, mask: np.ndarray) -> np.ndarray:
    return np.where(mask, values, 0.0)


def _er_step(values, data, mask):
    return _support_arr(_project_magnitude_arr(values, data), mask)


def _hio_step(values, data, mask, beta):
    pm = _project_magnitude_arr(values, data)
    return np.where(mask, pm, values - beta * pm)


def _raar_step(values, data, mask, beta):
    pm = _project_magnitude_arr(values, data)
    rm = 2.0 * pm - values
    rs_rm = 2.0 * _support_arr(rm, mask) - rm
    return 0.5 * beta * (rs_rm + values) + (1.0 - beta) * pm


def _dm_step(values, data, mask, beta, gamma_m, gamma_s):
    pm = _project_magnitude_arr(values, data)
    relaxed_m = (1.0 + gamma_m) * pm - gamma_m * values
    term_s = _support_arr(relaxed_m, mask)
    relaxed_s = (1.0 + gamma_s) * _support_arr(values, mask) - gamma_s * values
    term_m = _project_magnitude_arr(relaxed_s, data)
    return values + beta * (term_s - term_m)


def er_iterate(rho: ComplexField, data: IntensityData, support: SupportMask) -> ComplexField:
    """One error-reduction step: support projection of the magnitude projection."""
    require_same_shape(rho, data, "field and data")
    require_same_shape(rho, support, "field and support")
    return rho.with_values(_er_step(rho.values, data, support.mask))


def hio_iterate(
    rho: ComplexField, data: IntensityData, support: SupportMask, beta: float = 0.9
) -> ComplexField:
    """One hybrid input-output step with negative feedback outside the support."""
    require_same_shape(rho, data, "field and data")
    require_same_shape(rho, support, "field and support")
    return rho.with_values(_hio_step(rho.values, data, support.mask, beta))


def dm_iterate(
    rho: ComplexField,
    data: IntensityData,
    support: SupportMask,
    beta: float = 0.9,
    gamma_m: float | None = None,
    gamma_s: float | None = None,
) -> ComplexField:
    """One difference-map step with relaxed generalized projections."""
    require_same_shape(rho, data, "field and data")
    require_same_shape(rho, support, "field and support")
    gm = 1.0 / beta if gamma_m is None else gamma_m
    gs = -1.0 / beta if gamma_s is None else gamma_s
    return rho.with_values(_dm_step(rho.values, data, support.mask, beta, gm, gs))


def raar_iterate(
    rho: ComplexField, data: IntensityData, support: SupportMask, beta: float = 0.9
) -> ComplexField:
    """One relaxed averaged alternating reflections step."""
    require_same_shape(rho, data, "field and data")
    require_same_shape(rho, support, "field and support")
    return rho.with_values(_raar_step(rho.values, data, support.mask, beta))


def _check_finite(values: np.ndarray, iteration: int, algorithm: str) -> None:
    if not np.isfinite(values).all():
        raise SolverDivergenceError(f"{algorithm}: non-finite iterate at iteration {iteration}")


def _record(trace, iteration, values, mask, zeta0, out_sub=0, in_sub=0):
    energy = _gradient_energy_map(values, 1.0, 1.0)
    zeta_in = float(energy[mask].sum())
    zeta_out = float(energy[~mask].sum())
    trace.append(
        TraceRecord(
            iteration=iteration,
            zeta=zeta_in + zeta_out,
            zeta_in=zeta_in,
            zeta_out=zeta_out,
            zeta0=zeta0,
            out_subiters=out_sub,
            in_subiters=in_sub,
        )
    )


def _finish(values, config, data, trace, iterations) -> TrialSolution:
    field = ComplexField(values)
    return TrialSolution(
        field=field,
        seed=config.seed,
        e_fourier=error_fourier(field, data),
        trace=trace,
        iterations_run=iterations,
    )


def _main_step(algorithm: str, config: SolverConfig):
    if algorithm == "er":
        return lambda v, data, mask: _er_step(v, data, mask)
    if algorithm == "hio":
        return lambda v, data, mask: _hio_step(v, data, mask, config.beta)
    if algorithm == "dm":
        gm, gs = config.effective_gamma_m, config.effective_gamma_s
        return lambda v, data, mask: _dm_step(v, data, mask, config.beta, gm, gs)
    return lambda v, data, mask: _raar_step(v, data, mask, config.beta)


def _run_schedule(data: IntensityData, support: SupportMask, config: SolverConfig) -> TrialSolution:
    """n_main iterations of the configured update, then an ER tail."""
    mask = support.mask
    zeta0 = _spectral_from_counts(data.counts, 1.0, 1.0)
    step = _main_step(config.algorithm.removesuffix("-er"), config)
    values = init_random(data.shape, support, config.seed).values
    trace = ComplexityTrace()
    iteration = 0
    for _ in range(config.n_main):
        iteration += 1
        values = step(values, data, mask)
        _check_finite(values, iteration, config.algorithm)
        _record(trace, iteration, values, mask, zeta0)
    for _ in range(config.n_er):
        iteration += 1
        values = _er_step(values, data, mask)
        _check_finite(values, iteration, config.algorithm)
        _record(trace, iteration, values, mask, zeta0)
    return _finish(values, config, data, trace, iteration)


def run_raar_er(data: IntensityData, support: SupportMask, config: SolverConfig) -> TrialSolution:
    """RAAR for ``n_main`` iterations concluded by ``n_er`` ER iterations."""
    if config.algorithm != "raar-er":
        raise ValueError(f"run_raar_er requires algorithm 'raar-er', got {config.algorithm!r}")
    require_same_shape(data, support, "data and support")
    return _run_schedule(data, support, config)


def run_cg_raar(data: IntensityData, support: SupportMask, config: SolverConfig) -> TrialSolution:
    """RAAR warmup followed by RAAR iterations with complexity guidance.

    Per guided iteration: one RAAR step; optionally refresh the target
    complexity from the intensity with unmeasured pixels filled by the
    current iterate; reduce outside-support complexity toward the
    mean-minus-std of its recent history (once the history window is full);
    reduce inside-support complexity until the total sits within the
    tolerance band of the target; the two region updates recombine into the
    next iterate by construction.
    """
    if config.algorithm != "cg-raar":
        raise ValueError(f"run_cg_raar requires algorithm 'cg-raar', got {config.algorithm!r}")
    require_same_shape(data, support, "data and support")
    mask = support.mask
    budget = config.budget
    tol = budget.tolerance
    zeta0 = budget.zeta0 if budget.zeta0 is not None else _spectral_from_counts(data.counts, 1.0, 1.0)

    values = init_random(data.shape, support, config.seed).values
    trace = ComplexityTrace()
    iteration = 0
    for _ in range(config.n_warmup):
        iteration += 1
        values = _raar_step(values, data, mask, config.beta)
        _check_finite(values, iteration, config.algorithm)
        _record(trace, iteration, values, mask, zeta0)

    out_history: deque = deque(maxlen=budget.window)
    for _ in range(config.n_guided):
        iteration += 1
        values = _raar_step(values, data, mask, config.beta)
        _check_finite(values, iteration, config.algorithm)

        if config.refresh_zeta0:
            spectrum = np.fft.fft2(values)
            filled = np.where(data.measured, data.counts, np.abs(spectrum) ** 2)
            zeta0 = _spectral_from_counts(filled, 1.0, 1.0)

        out_used = 0
        if len(out_history) == budget.window:
            target_out = max(float(np.mean(out_history) - np.std(out_history)), 0.0)
            values, out_used = _reduce_region(
                values, ~mask, 1.0, 1.0, budget.tau, target_out, budget.max_out_subiters
            )

        energy = _gradient_energy_map(values, 1.0, 1.0)
        zeta_out_now = float(energy[~mask].sum())
        target_in = max((1.0 + tol) * zeta0 - zeta_out_now, 0.0)
        floor_in = max((1.0 - tol) * zeta0 - zeta_out_now, 0.0)
        values, in_used = _reduce_region(
            values, mask, 1.0, 1.0, budget.tau, target_in, budget.max_in_subiters, floor_in
        )

        _record(trace, iteration, values, mask, zeta0, out_used, in_used)
        out_history.append(trace.final.zeta_out)
    return _finish(values, config, data, trace, iteration)


def run_reconstruction(data: IntensityData, support: SupportMask, config: SolverConfig) -> TrialSolution:
    """Dispatch a run to the engine matching ``config.algorithm``."""
    require_same_shape(data, support, "data and support")
    if config.algorithm == "cg-raar":
        return run_cg_raar(data, support, config)
    return _run_schedule(data, support, config)
