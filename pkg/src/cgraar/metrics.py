"""PRTF, radial averaging, resolution estimation, and error metrics.

The transfer map compares the averaged reconstruction's Fourier modulus to
the measured modulus pixel by pixel; unmeasured or zero-count pixels are
excluded rather than counted as zeros, so a beam stop shows up as gaps in
the central bins instead of fake transfer loss. The real-space error accepts
the twin image and is invariant to global phase and amplitude scale.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .constraints import IntensityData
from .errors import ZeroNormError
from .field import ComplexField, require_same_shape

__all__ = [
    "PRTFCurve",
    "Resolution",
    "DetectorGeometry",
    "prtf_map",
    "prtf_radial",
    "resolution_from_prtf",
    "error_real",
    "error_fourier",
    "twin_field",
]

CUTOFF = 1.0 / np.e
BAND_LIMIT_PIXELS = 2.0  # reciprocal of the Nyquist frequency 0.5 cycles/pixel


@dataclass(frozen=True)
class PRTFCurve:
    """Radially averaged transfer ratio.

    ``bins`` are bin-center spatial frequencies in cycles/pixel (radial index
    over the geometric-mean grid size, identical to k/N on square frames);
    ``values`` hold NaN for bins with no valid pixel; ``counts`` the number
    of contributing pixels per bin. The DC pixel is excluded.
    """

    bins: np.ndarray
    values: np.ndarray
    counts: np.ndarray

    def to_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("bin_freq,prtf,count\n")
            for f, v, c in zip(self.bins, self.values, self.counts):
                fh.write(f"{f!r},{'' if np.isnan(v) else repr(float(v))},{int(c)}\n")


@dataclass(frozen=True)
class DetectorGeometry:
    """Experimental geometry for converting pixel resolution to length units."""

    wavelength: float
    distance: float
    detector_pixel: float
    half_pixels: int

    def pixel_pitch(self) -> float:
        return self.wavelength * self.distance / (self.detector_pixel * self.half_pixels)


@dataclass(frozen=True)
class Resolution:
    """1/e crossing of the transfer curve, as a length in pixels."""

    pixels: float
    crossed: bool
    frequency: float
    physical: float | None = None


def prtf_map(avg_field: ComplexField, data: IntensityData) -> tuple[np.ndarray, np.ndarray]:
    """Per-pixel |spectrum| / sqrt(counts) plus the validity mask.

    Valid only where the pixel is measured with positive counts; the map is
    zero elsewhere and those pixels must be ignored downstream.
    """
    require_same_shape(avg_field, data, "field and data")
    modulus = np.abs(np.fft.fft2(avg_field.values))
    valid = data.measured & (data.counts > 0)
    ratio = np.zeros(data.shape, dtype=np.float64)
    np.divide(modulus, data.sqrt_counts, out=ratio, where=valid)
    return ratio, valid


def _radial_index(shape: tuple[int, int]) -> np.ndarray:
    h, w = shape
    iy = np.fft.fftfreq(h) * h
    ix = np.fft.fftfreq(w) * w
    return np.hypot(iy[:, None], ix[None, :])


def prtf_radial(map: np.ndarray, validity: np.ndarray) -> PRTFCurve:
    """Average the transfer map into integer radial bins; empty bins are NaN."""
    map = np.asarray(map, dtype=np.float64)
    validity = np.asarray(validity, dtype=bool)
    require_same_shape(map, validity, "map and validity")
    h, w = map.shape
    radius = np.rint(_radial_index(map.shape)).astype(np.int64)
    k_max = int(radius.max())
    sums = np.bincount(radius[validity], weights=map[validity], minlength=k_max + 1)
    counts = np.bincount(radius[validity], minlength=k_max + 1)
    with np.errstate(invalid="ignore"):
        values = np.where(counts > 0, sums / np.maximum(counts, 1), np.nan)
    norm = float(np.sqrt(w * h))
    ks = np.arange(1, k_max + 1)
    return PRTFCurve(bins=ks / norm, values=values[1:], counts=counts[1:])


def resolution_from_prtf(curve: PRTFCurve, geometry: DetectorGeometry | None = None) -> Resolution:
    """Resolution from the lowest-frequency 1/e crossing (linear interpolation).

    A curve that never falls below 1/e is flagged and reported at the
    two-pixel band limit. Gap bins are skipped.
    """
    finite = np.isfinite(curve.values)
    if not finite.any():
        raise ZeroNormError("transfer curve has no valid bins")
    freqs = np.asarray(curve.bins, dtype=np.float64)[finite]
    vals = np.asarray(curve.values, dtype=np.float64)[finite]
    f_cross = None
    if vals[0] < CUTOFF:
        f_cross = float(freqs[0])
    else:
        for i in range(len(vals) - 1):
            if vals[i] >= CUTOFF and vals[i + 1] < CUTOFF:
                span = vals[i] - vals[i + 1]
                frac = (vals[i] - CUTOFF) / span
                f_cross = float(freqs[i] + frac * (freqs[i + 1] - freqs[i]))
                break
    if f_cross is None or f_cross <= 0:
        pixels, crossed, freq = BAND_LIMIT_PIXELS, False, 0.5
    else:
        pixels, crossed, freq = 1.0 / f_cross, True, f_cross
    physical = pixels * geometry.pixel_pitch() if geometry is not None else None
    return Resolution(pixels=pixels, crossed=crossed, frequency=freq, physical=physical)


def twin_field(field: ComplexField) -> ComplexField:
    """Conjugate coordinate-inverted copy, the intrinsic modulus-data twin."""
    flipped = np.flip(field.values, axis=(0, 1))
    return field.with_values(np.conj(np.roll(flipped, (1, 1), axis=(0, 1))))


def _scaled_error_sq(est: np.ndarray, truth: np.ndarray, truth_energy: float) -> float:
    est_energy = float(np.vdot(est, est).real)
    if est_energy == 0.0:
        return 1.0
    corr = float(np.abs(np.vdot(est, truth)))
    return max(1.0 - corr * corr / (est_energy * truth_energy), 0.0)


def error_real(est: ComplexField, truth: ComplexField) -> float:
    """Real-space error against ground truth; twin-accepting, scale/phase-free.

    The estimate is amplitude-matched by the optimal nonnegative scale and
    correlated through the modulus of the complex inner product, so global
    phase never contributes; the smaller of the estimate's and its twin's
    errors is reported.
    """
    require_same_shape(est, truth, "estimate and truth")
    truth_energy = float(np.vdot(truth.values, truth.values).real)
    if truth_energy == 0.0:
        raise ZeroNormError("ground truth has zero norm")
    direct = _scaled_error_sq(est.values, truth.values, truth_energy)
    twin = _scaled_error_sq(twin_field(est).values, truth.values, truth_energy)
    return float(np.sqrt(min(direct, twin)))


def error_fourier(est: ComplexField, data: IntensityData) -> float:
    """Relative Fourier-domain error over measured pixels only."""
    require_same_shape(est, data, "estimate and data")
    measured = data.measured
    if not measured.any():
        raise ZeroNormError("no measured pixels in intensity data")
    target = data.sqrt_counts[measured]
    denom = float(np.linalg.norm(target))
    if denom == 0.0:
        raise ZeroNormError("measured moduli are identically zero")
    modulus = np.abs(np.fft.fft2(est.values))[measured]
    return float(np.linalg.norm(target - modulus) / denom)
