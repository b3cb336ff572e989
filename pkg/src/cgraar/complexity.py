"""Complexity of a field: spatial and spectral forms, gradient, and reduction.

Complexity is the sum of squared central-difference gradient magnitudes with
periodic wrap. That discretization is chosen deliberately: its transfer
factor is exactly the modified wavenumber ``sin(2*pi*f*d)/d``, so the same
number can be read off the raw Fourier intensity without knowing the object.
The functional gradient is the adjoint of the same scheme (a stride-2
Laplacian), which makes finite-difference checks exact to rounding.
"""

from __future__ import annotations

from dataclasses import dataclass, field as dc_field

import numpy as np

from .constraints import IntensityData, SupportMask
from .errors import InvalidFieldError, ShapeMismatchError
from .field import ComplexField, require_same_shape

__all__ = [
    "ComplexityBudget",
    "TraceRecord",
    "ComplexityTrace",
    "complexity_spatial",
    "complexity_spectral",
    "complexity_gradient",
    "reduce_complexity_region",
]

EPS = 1e-300  # guards division in relative-tolerance checks


@dataclass(frozen=True)
class ComplexityBudget:
    """Targets and limits for complexity guidance.

    ``zeta0`` is the target complexity; leave it None to have the solver
    compute it from the intensity data at run start. ``tolerance`` is the
    relative matching band, ``tau`` the sub-iteration step size, ``window``
    the history length for the outside-support control, and the two caps
    bound sub-iterations per outer iteration.
    """

    zeta0: float | None = None
    tolerance: float = 0.005
    tau: float = 5e-3
    window: int = 20
    max_out_subiters: int = 50
    max_in_subiters: int = 200

    def __post_init__(self):
        if self.zeta0 is not None and not (np.isfinite(self.zeta0) and self.zeta0 >= 0):
            raise ValueError(f"zeta0 must be nonnegative, got {self.zeta0}")
        if not (0 < self.tolerance < 1):
            raise ValueError(f"tolerance must lie in (0, 1), got {self.tolerance}")
        if not (np.isfinite(self.tau) and self.tau > 0):
            raise ValueError(f"tau must be positive, got {self.tau}")
        if self.window < 2:
            raise ValueError(f"window must be at least 2, got {self.window}")
        if self.max_out_subiters < 1 or self.max_in_subiters < 1:
            raise ValueError("sub-iteration caps must be at least 1")


@dataclass(frozen=True)
class TraceRecord:
    iteration: int
    zeta: float
    zeta_in: float
    zeta_out: float
    zeta0: float
    out_subiters: int
    in_subiters: int


@dataclass
class ComplexityTrace:
    """Append-only per-iteration record of complexity and sub-iteration counts."""

    records: list = dc_field(default_factory=list)

    def append(self, record: TraceRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def final(self) -> TraceRecord:
        return self.records[-1]

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("iter,zeta,zeta_in,zeta_out,zeta0,out_sub,in_sub\n")
            for r in self.records:
                fh.write(
                    f"{r.iteration},{r.zeta!r},{r.zeta_in!r},{r.zeta_out!r},"
                    f"{r.zeta0!r},{r.out_subiters},{r.in_subiters}\n"
                )


def _gradient_energy_map(values: np.ndarray, dx: float, dy: float) -> np.ndarray:
    """Per-pixel |grad_x|^2 + |grad_y|^2 with periodic central differences."""
    gx = (np.roll(values, -1, axis=1) - np.roll(values, 1, axis=1)) / (2.0 * dx)
    gy = (np.roll(values, -1, axis=0) - np.roll(values, 1, axis=0)) / (2.0 * dy)
    return gx.real**2 + gx.imag**2 + gy.real**2 + gy.imag**2


def _spatial(values: np.ndarray, dx: float, dy: float, region: np.ndarray | None) -> float:
    energy = _gradient_energy_map(values, dx, dy)
    if region is None:
        return float(energy.sum())
    return float(energy[region].sum())


def complexity_spatial(
    field: ComplexField, region: SupportMask | None = None, inside: bool = True
) -> float:
    """Sum of squared gradient magnitudes over the whole field or one side of a mask.

    Gradients are always computed on the full field; ``region`` only selects
    which pixels enter the sum (inside the mask or its complement).
    """
    sel = None
    if region is not None:
        require_same_shape(field, region, "field and region")
        sel = region.mask if inside else ~region.mask
    return _spatial(field.values, field.dx, field.dy, sel)


def _spectral_weights(shape: tuple[int, int], dx: float, dy: float) -> np.ndarray:
    h, w = shape
    wx = (np.sin(2.0 * np.pi * np.fft.fftfreq(w, d=dx) * dx) / dx) ** 2
    wy = (np.sin(2.0 * np.pi * np.fft.fftfreq(h, d=dy) * dy) / dy) ** 2
    return wy[:, None] + wx[None, :]


def _spectral_from_counts(counts: np.ndarray, dx: float, dy: float) -> float:
    h, w = counts.shape
    return float((_spectral_weights(counts.shape, dx, dy) * counts).sum() / (w * h))


def complexity_spectral(
    data: IntensityData,
    field_shape: tuple[int, int] | None = None,
    dx: float = 1.0,
    dy: float = 1.0,
) -> float:
    """Complexity read directly off the intensity via modified wavenumbers.

    Sums over all pixels; blocked pixels contribute whatever counts value the
    data currently stores (the solver's refresh rule substitutes iterate
    intensities there when needed).
    """
    if field_shape is not None and tuple(field_shape) != data.shape:
        raise ShapeMismatchError(f"data shape {data.shape} does not match field shape {field_shape}")
    return _spectral_from_counts(data.counts, dx, dy)


def _gradient_arr(values: np.ndarray, dx: float, dy: float) -> np.ndarray:
    lap_x = np.roll(values, -2, axis=1) - 2.0 * values + np.roll(values, 2, axis=1)
    lap_y = np.roll(values, -2, axis=0) - 2.0 * values + np.roll(values, 2, axis=0)
    return -lap_x / (4.0 * dx * dx) - lap_y / (4.0 * dy * dy)


def complexity_gradient(field: ComplexField) -> ComplexField:
    """Exact functional gradient of the discrete complexity (stride-2 Laplacian)."""
    return field.with_values(_gradient_arr(field.values, field.dx, field.dy))


def _reduce_region(
    values: np.ndarray,
    region: np.ndarray,
    dx: float,
    dy: float,
    tau: float,
    target_zeta: float,
    cap: int,
    floor_zeta: float = 0.0,
) -> tuple[np.ndarray, int]:
    """Gradient-descent sub-iterations confined to ``region`` pixels.

    Stops at the first sub-iteration whose regional complexity reaches
    ``target_zeta``, at the cap, or as soon as a step fails to descend.
    ``floor_zeta`` optionally bounds overshoot: a step that would land below
    it is shrunk by halving so the final complexity stays in
    [floor_zeta, previous value).
    """
    current = _spatial(values, dx, dy, region)
    used = 0
    while current > target_zeta and used < cap:
        grad = _gradient_arr(values, dx, dy)
        grad = np.where(region, grad, 0.0)
        grad_norm = np.linalg.norm(grad)
        if grad_norm == 0.0:
            break
        region_norm = np.linalg.norm(values[region])
        step = (tau * region_norm / grad_norm) * grad
        candidate = values - step
        new = _spatial(candidate, dx, dy, region)
        if new >= current:
            break
        if new < floor_zeta:
            scale = 0.5
            while scale > 1e-6:
                candidate = values - scale * step
                new = _spatial(candidate, dx, dy, region)
                if new >= floor_zeta:
                    break
                scale *= 0.5
            if new >= current or new < floor_zeta:
                break
        values = candidate
        current = new
        used += 1
    return values, used


def reduce_complexity_region(
    field: ComplexField,
    support: SupportMask,
    inside: bool,
    budget: ComplexityBudget,
    target_zeta: float,
    floor_zeta: float = 0.0,
) -> tuple[ComplexField, int]:
    """Drive the complexity of one side of the support down to ``target_zeta``.

    The gradient is computed on the full field and masked to the region, so
    only region pixels ever change; its step is scaled by the region's L2
    norm. Returns the updated field and the number of sub-iterations used
    (0 when the region already meets the target or its gradient vanishes).
    """
    require_same_shape(field, support, "field and support")
    if not (np.isfinite(target_zeta) and target_zeta >= 0):
        raise ValueError(f"target_zeta must be nonnegative, got {target_zeta}")
    region = support.mask if inside else ~support.mask
    cap = budget.max_in_subiters if inside else budget.max_out_subiters
    values, used = _reduce_region(
        field.values, region, field.dx, field.dy, budget.tau, target_zeta, cap, floor_zeta
    )
    if used == 0:
        return field, 0
    return field.with_values(values), used
