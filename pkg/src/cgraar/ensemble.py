"""Seeded multi-trial runs: alignment, correlation selection, coherent averaging.

Trials are independent reconstructions from seeds ``base_seed + t``. Each
trial is aligned to the least-Fourier-error trial before selection: the twin
image and every integer cyclic shift are considered, then a global phase is
removed. Results are ordered by trial index whatever the worker scheduling,
so a batch is reproducible bit for bit at any parallelism.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .constraints import IntensityData, SupportMask
from .errors import AlignmentError, CgraarError, ZeroNormError
from .field import ComplexField, require_same_shape
from .metrics import PRTFCurve, Resolution, prtf_map, prtf_radial, resolution_from_prtf, twin_field
from .solvers import SolverConfig, TrialSolution, run_reconstruction

__all__ = [
    "EnsembleConfig",
    "TrialRun",
    "TrialSummary",
    "EnsembleReport",
    "run_trials",
    "align_trial",
    "correlation",
    "select_and_average",
]


@dataclass(frozen=True)
class EnsembleConfig:
    """How many trials to run, how to select them, and how wide to fan out."""

    n_trials: int
    correlation_threshold: float = 0.96
    parallelism: int = 1
    base_seed: int = 0

    def __post_init__(self):
        if self.n_trials < 1:
            raise ValueError(f"n_trials must be at least 1, got {self.n_trials}")
        if not (0 < self.correlation_threshold <= 1):
            raise ValueError(
                f"correlation threshold must lie in (0, 1], got {self.correlation_threshold}"
            )
        if self.parallelism < 1:
            raise ValueError(f"parallelism must be at least 1, got {self.parallelism}")


@dataclass(frozen=True)
class TrialRun:
    """Outcome of one trial; ``solution`` is None when the trial aborted."""

    index: int
    seed: int
    solution: TrialSolution | None
    error: str | None = None


@dataclass(frozen=True)
class TrialSummary:
    index: int
    seed: int
    e_fourier: float
    correlation: float
    selected: bool
    error: str | None = None


@dataclass(frozen=True)
class EnsembleReport:
    """Averaged solution with selection bookkeeping and transfer-curve results."""

    averaged_field: ComplexField | None
    selected_count: int
    total_count: int
    trials: tuple[TrialSummary, ...]
    prtf_curve: PRTFCurve | None = None
    resolution: Resolution | None = None
    e_fourier_average: float | None = None


def _run_one(args) -> TrialRun:
    index, seed, data, support, config = args
    try:
        solution = run_reconstruction(data, support, replace(config, seed=seed))
        return TrialRun(index=index, seed=seed, solution=solution)
    except CgraarError as exc:
        return TrialRun(index=index, seed=seed, solution=None, error=str(exc))


def run_trials(
    data: IntensityData,
    support: SupportMask,
    solver_config: SolverConfig,
    ensemble_config: EnsembleConfig,
) -> list[TrialRun]:
    """Run ``n_trials`` seeded reconstructions, optionally across processes.

    A trial abort is recorded on its TrialRun instead of failing the batch.
    Output order is by trial index regardless of completion order.
    """
    require_same_shape(data, support, "data and support")
    jobs = [
        (t, ensemble_config.base_seed + t, data, support, solver_config)
        for t in range(ensemble_config.n_trials)
    ]
    if ensemble_config.parallelism == 1 or ensemble_config.n_trials == 1:
        return [_run_one(job) for job in jobs]
    workers = min(ensemble_config.parallelism, ensemble_config.n_trials)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_run_one, jobs))


def correlation(a: ComplexField, b: ComplexField, support: SupportMask) -> float:
    """Normalized modulus of the support-restricted inner product, in [0, 1]."""
    require_same_shape(a, b, "fields")
    require_same_shape(a, support, "field and support")
    mask = support.mask
    av, bv = a.values[mask], b.values[mask]
    norm_a = float(np.linalg.norm(av))
    norm_b = float(np.linalg.norm(bv))
    if norm_a == 0.0 or norm_b == 0.0:
        raise ZeroNormError("correlation undefined for a field with zero norm over the support")
    return min(float(np.abs(np.vdot(av, bv))) / (norm_a * norm_b), 1.0)


def _best_shift(cand: np.ndarray, ref_masked_conj: np.ndarray) -> tuple[tuple[int, int], complex]:
    """Cyclic shift of ``cand`` maximizing |sum_S conj(ref) * shifted(cand)|."""
    corr = np.fft.ifft2(np.conj(np.fft.fft2(np.conj(cand))) * np.fft.fft2(ref_masked_conj))
    flat = int(np.argmax(np.abs(corr)))
    shift = np.unravel_index(flat, corr.shape)
    return (int(shift[0]), int(shift[1])), complex(corr[shift])


def align_trial(
    trial_field: ComplexField, reference_field: ComplexField, support: SupportMask
) -> ComplexField:
    """Map a trial onto the reference: twin choice, cyclic shift, global phase.

    Both the trial and its twin are scored by the support-restricted
    cross-correlation over all integer cyclic shifts; the winner is shifted,
    rotated by the phase that maximizes coherence with the reference, and
    returned.
    """
    require_same_shape(trial_field, reference_field, "trial and reference")
    require_same_shape(trial_field, support, "trial and support")
    mask = support.mask
    ref = reference_field.values
    ref_norm = float(np.linalg.norm(ref[mask]))
    if ref_norm == 0.0:
        raise AlignmentError("reference field is identically zero over the support")
    ref_masked_conj = np.where(mask, np.conj(ref), 0.0)

    best = None
    for cand in (trial_field.values, twin_field(trial_field).values):
        shift, inner = _best_shift(cand, ref_masked_conj)
        shifted = np.roll(cand, shift, axis=(0, 1))
        cand_norm = float(np.linalg.norm(shifted[mask]))
        score = abs(inner) / (ref_norm * cand_norm) if cand_norm > 0 else 0.0
        if best is None or score > best[0]:
            best = (score, shifted, inner)
    _, shifted, inner = best
    phase = np.angle(inner) if inner != 0 else 0.0
    return trial_field.with_values(shifted * np.exp(-1j * phase))


def select_and_average(
    trials: list[TrialRun] | list[TrialSolution],
    support: SupportMask,
    ensemble_config: EnsembleConfig,
    data: IntensityData | None = None,
) -> EnsembleReport:
    """Align all trials to the least-error one, select by correlation, average.

    The averaged field is the plain mean of the aligned selected fields
    (coherent sum; identical to averaging the complex spectra by linearity).
    With ``data`` given, the report also carries the transfer curve, its
    resolution, and the average's Fourier error.
    """
    runs: list[TrialRun] = [
        t if isinstance(t, TrialRun) else TrialRun(index=i, seed=t.seed, solution=t)
        for i, t in enumerate(trials)
    ]
    if not runs:
        raise ValueError("select_and_average needs at least one trial")
    succeeded = [r for r in runs if r.solution is not None]
    if not succeeded:
        return EnsembleReport(
            averaged_field=None,
            selected_count=0,
            total_count=len(runs),
            trials=tuple(
                TrialSummary(r.index, r.seed, float("nan"), float("nan"), False, r.error)
                for r in runs
            ),
        )
    reference = min(succeeded, key=lambda r: (r.solution.e_fourier, r.index)).solution.field

    summaries = []
    total = None
    selected_count = 0
    for run in runs:
        if run.solution is None:
            summaries.append(
                TrialSummary(run.index, run.seed, float("nan"), float("nan"), False, run.error)
            )
            continue
        aligned = align_trial(run.solution.field, reference, support)
        corr = correlation(aligned, reference, support)
        selected = corr >= ensemble_config.correlation_threshold
        if selected:
            selected_count += 1
            total = aligned.values if total is None else total + aligned.values
        summaries.append(
            TrialSummary(run.index, run.seed, run.solution.e_fourier, corr, selected, None)
        )

    if selected_count == 0:
        return EnsembleReport(
            averaged_field=None,
            selected_count=0,
            total_count=len(runs),
            trials=tuple(summaries),
        )
    averaged = reference.with_values(total / selected_count)
    curve = resolution = e_f = None
    if data is not None:
        from .metrics import error_fourier

        ratio, valid = prtf_map(averaged, data)
        curve = prtf_radial(ratio, valid)
        resolution = resolution_from_prtf(curve)
        e_f = error_fourier(averaged, data)
    return EnsembleReport(
        averaged_field=averaged,
        selected_count=selected_count,
        total_count=len(runs),
        trials=tuple(summaries),
        prtf_curve=curve,
        resolution=resolution,
        e_fourier_average=e_f,
    )
