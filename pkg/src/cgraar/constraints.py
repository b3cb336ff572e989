"""Projection and reflection operators in object and Fourier domains.

The magnitude projector enforces ``|rho_hat| = sqrt(I)`` on measured pixels
only; unmeasured pixels (zero photon counts or detector beam stop) pass
through untouched. Where the iterate's spectrum vanishes on a measured pixel
the projected value is ``sqrt(I)`` with phase 0 so runs stay reproducible.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import InvalidFieldError
from .field import ComplexField, require_same_shape

__all__ = [
    "IntensityData",
    "SupportMask",
    "project_magnitude",
    "project_support",
    "reflect",
    "relaxed_reflect",
]


@dataclass(frozen=True)
class IntensityData:
    """Photon counts with the measured-pixel mask, DC-at-corner layout.

    ``measured`` is forced false wherever counts are zero, merging noise
    zeros and beam-stop pixels into one pass-through set. ``sqrt_counts`` is
    cached at construction and never recomputed during iteration.
    """

    counts: np.ndarray
    measured: np.ndarray
    sqrt_counts: np.ndarray = None  # type: ignore[assignment]

    def __post_init__(self):
        counts = np.array(self.counts, dtype=np.float64, order="C", copy=True)
        if counts.ndim != 2 or min(counts.shape) < 2:
            raise InvalidFieldError(f"counts must be a 2-D raster, got shape {counts.shape}")
        if not np.isfinite(counts).all() or (counts < 0).any():
            raise InvalidFieldError("counts must be finite and nonnegative")
        measured = np.array(self.measured, dtype=bool, order="C", copy=True)
        require_same_shape(counts, measured, "counts and measured mask")
        measured &= counts > 0
        sqrt_counts = np.sqrt(counts)
        for arr in (counts, measured, sqrt_counts):
            arr.flags.writeable = False
        object.__setattr__(self, "counts", counts)
        object.__setattr__(self, "measured", measured)
        object.__setattr__(self, "sqrt_counts", sqrt_counts)

    @classmethod
    def from_counts(cls, counts, mask=None) -> "IntensityData":
        """Build from raw counts; ``mask`` marks detector pixels that are valid at all."""
        counts = np.asarray(counts, dtype=np.float64)
        if mask is None:
            mask = np.ones(counts.shape, dtype=bool)
        return cls(counts=counts, measured=np.asarray(mask, dtype=bool))

    @property
    def shape(self) -> tuple[int, int]:
        return self.counts.shape

    @property
    def unmeasured_fraction(self) -> float:
        return 1.0 - self.measured.mean()


@dataclass(frozen=True)
class SupportMask:
    """Boolean raster marking where the object may be nonzero."""

    mask: np.ndarray

    def __post_init__(self):
        mask = np.array(self.mask, dtype=bool, order="C", copy=True)
        if mask.ndim != 2 or min(mask.shape) < 2:
            raise InvalidFieldError(f"support must be a 2-D raster, got shape {mask.shape}")
        if not mask.any():
            raise InvalidFieldError("support has no interior pixel")
        if mask.all():
            raise InvalidFieldError("support covers the whole window (no oversampling)")
        mask.flags.writeable = False
        object.__setattr__(self, "mask", mask)

    @property
    def shape(self) -> tuple[int, int]:
        return self.mask.shape

    @property
    def inside_count(self) -> int:
        return int(self.mask.sum())


def _project_magnitude_arr(values: np.ndarray, data: IntensityData) -> np.ndarray:
    spectrum = np.fft.fft2(values)
    modulus = np.abs(spectrum)
    unit = np.divide(spectrum, modulus, out=np.ones_like(spectrum), where=modulus > 0)
    projected = np.where(data.measured, data.sqrt_counts * unit, spectrum)
    return np.fft.ifft2(projected)


def project_magnitude(field: ComplexField, data: IntensityData) -> ComplexField:
    """Fourier modulus projection; unmeasured spectrum pixels pass through unchanged."""
    require_same_shape(field, data, "field and intensity data")
    return field.with_values(_project_magnitude_arr(field.values, data))


def project_support(field: ComplexField, support: SupportMask) -> ComplexField:
    """Keep values inside the support, zero outside."""
    require_same_shape(field, support, "field and support")
    return field.with_values(np.where(support.mask, field.values, 0.0))


def reflect(projector_output: ComplexField, input: ComplexField) -> ComplexField:
    """Reflection across a constraint set: 2*P(rho) - rho."""
    require_same_shape(projector_output, input, "projection and input")
    return input.with_values(2.0 * projector_output.values - input.values)


def relaxed_reflect(projector_output: ComplexField, input: ComplexField, gamma: float) -> ComplexField:
    """Relaxed generalized projection: (1 + gamma)*P(rho) - gamma*rho."""
    require_same_shape(projector_output, input, "projection and input")
    if not np.isfinite(gamma):
        raise InvalidFieldError(f"gamma must be finite, got {gamma}")
    return input.with_values((1.0 + gamma) * projector_output.values - gamma * input.values)
