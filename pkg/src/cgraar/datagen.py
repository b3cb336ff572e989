"""Synthetic phantoms, oversampled diffraction simulation, and data import.

Phantoms are complex-valued (smooth amplitude in [0,1], smooth phase) and
sit on a low plate that fills the whole support window, so the support is
tight and reconstructions carry no translation slack. All generators are
deterministic: phantoms are pure functions of kind and size, noise draws use
the counter-based Philox generator keyed by the seed.
"""

from __future__ import annotations

import numpy as np

from .constraints import IntensityData, SupportMask
from .container import read_container
from .errors import InvalidFieldError, OversamplingError, PayloadShapeError
from .field import ComplexField

__all__ = [
    "PHANTOM_KINDS",
    "make_phantom",
    "exact_intensity",
    "simulate_intensity",
    "apply_beamstop",
    "import_raw",
]

PHANTOM_KINDS = ("disc-blobs", "annulus", "text-like")
MAX_SUPPORT_FRACTION = 0.25  # oversampling ratio > 2 along each axis


def _blob(u, v, cu, cv, sigma):
    return np.exp(-((u - cu) ** 2 + (v - cv) ** 2) / (2.0 * sigma**2))


def _smooth(img: np.ndarray, sigma_px: float) -> np.ndarray:
    h, w = img.shape
    fy = np.fft.fftfreq(h)[:, None]
    fx = np.fft.fftfreq(w)[None, :]
    kernel = np.exp(-2.0 * (np.pi * sigma_px) ** 2 * (fy**2 + fx**2))
    return np.fft.ifft2(np.fft.fft2(img) * kernel).real


def _corner_cuts(u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # two unequal corner cut-outs: keeps the footprint pinned to the support
    # edges while breaking centrosymmetry, which single runs need to avoid
    # twin-superposition stagnation
    return ~((u > 0.3) & (v > 0.3)) & ~((u > 0.65) & (v < -0.65))


def _amplitude(kind: str, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    if kind == "disc-blobs":
        amp = 0.25
        amp = amp + 0.55 * _blob(u, v, -0.35, -0.30, 0.28)
        amp = amp + 0.50 * _blob(u, v, 0.30, -0.15, 0.22)
        amp = amp + 0.45 * _blob(u, v, 0.05, 0.42, 0.18)
        return np.clip(amp, 0.0, 1.0) * _corner_cuts(u, v)
    if kind == "annulus":
        r = np.hypot(u, v)
        ring = np.exp(-((r - 0.55) ** 2) / (2.0 * 0.12**2))
        return np.clip(0.2 + 0.75 * ring, 0.0, 1.0) * _corner_cuts(u, v)
    # text-like: blocky strokes, lightly smoothed
    strokes = np.zeros_like(u)
    strokes[(np.abs(v + 0.45) < 0.10) & (np.abs(u) < 0.55)] = 1.0  # top bar
    strokes[(np.abs(u + 0.05) < 0.09) & (v > -0.45) & (v < 0.50)] = 1.0  # stem
    strokes[(np.abs(v - 0.35) < 0.08) & (u > 0.15) & (u < 0.60)] = 1.0  # dash
    strokes = _smooth(strokes, max(u.shape[0] / 80.0, 1.0))
    peak = strokes.max()
    if peak > 0:
        strokes = strokes / peak
    return np.clip(0.2 + 0.7 * strokes, 0.0, 1.0) * _corner_cuts(u, v)


def _phase(kind: str, u: np.ndarray, v: np.ndarray) -> np.ndarray:
    # moderate phase swing: strong enough to break the twin symmetry of a
    # real object, weak enough to avoid vortex stagnation in single runs
    if kind == "annulus":
        return 0.40 * np.cos(np.pi * np.hypot(u, v)) + 0.10 * u
    return 0.45 * np.sin(np.pi * u) * np.cos(np.pi * v) + 0.15 * v


def make_phantom(
    kind: str, window: int, support_fraction: float
) -> tuple[ComplexField, SupportMask]:
    """Deterministic complex phantom confined to a centered square support.

    ``support_fraction`` is the support area over the window area; the
    square's side is ``round(window * sqrt(fraction))``. Fractions above
    0.25 violate the oversampling requirement and are rejected.
    """
    if kind not in PHANTOM_KINDS:
        raise ValueError(f"unknown phantom kind {kind!r}, expected one of {PHANTOM_KINDS}")
    if window < 8:
        raise ValueError(f"window must be at least 8 pixels, got {window}")
    if not (0 < support_fraction <= MAX_SUPPORT_FRACTION):
        raise OversamplingError(
            f"support_fraction {support_fraction} outside (0, {MAX_SUPPORT_FRACTION}]: "
            "the support must cover at most a quarter of the window"
        )
    side = int(round(window * np.sqrt(support_fraction)))
    side = max(side, 2)
    lo = (window - side) // 2
    hi = lo + side

    mask = np.zeros((window, window), dtype=bool)
    mask[lo:hi, lo:hi] = True

    axis = (np.arange(side) - (side - 1) / 2.0) / (side / 2.0)
    v, u = np.meshgrid(axis, axis, indexing="ij")
    patch = _amplitude(kind, u, v) * np.exp(1j * _phase(kind, u, v))
    values = np.zeros((window, window), dtype=np.complex128)
    values[lo:hi, lo:hi] = patch
    return ComplexField(values), SupportMask(mask)


def exact_intensity(field: ComplexField) -> IntensityData:
    """Noiseless |spectrum|^2 of a field, all nonzero pixels measured."""
    counts = np.abs(np.fft.fft2(field.values)) ** 2
    return IntensityData.from_counts(counts)


def simulate_intensity(field: ComplexField, photons_per_pixel_mean: float, seed: int) -> IntensityData:
    """Poisson-noisy intensity scaled to a target mean photon count per pixel.

    The exact intensity is rescaled so its mean over the whole frame equals
    ``photons_per_pixel_mean``, then every pixel is replaced by a Poisson
    draw with that expectation. Pixels drawing zero counts become unmeasured.
    """
    if not (np.isfinite(photons_per_pixel_mean) and photons_per_pixel_mean > 0):
        raise ValueError(f"photon mean must be positive, got {photons_per_pixel_mean}")
    intensity = np.abs(np.fft.fft2(field.values)) ** 2
    total = intensity.sum()
    if total == 0:
        raise InvalidFieldError("field has zero energy; nothing to measure")
    expectation = intensity * (photons_per_pixel_mean * intensity.size / total)
    rng = np.random.Generator(np.random.Philox(key=int(seed)))
    counts = rng.poisson(expectation).astype(np.float64)
    return IntensityData.from_counts(counts)


def apply_beamstop(data: IntensityData, radius: float) -> IntensityData:
    """Mark pixels within a centered radius as unmeasured; counts are retained.

    The radius is measured from DC in the centered layout. Blocked pixels are
    excluded from the magnitude constraint and the transfer curve but keep
    their stored counts for reference.
    """
    if radius < 0:
        raise ValueError(f"beamstop radius must be nonnegative, got {radius}")
    if radius == 0:
        return data
    h, w = data.shape
    iy = np.fft.fftfreq(h) * h
    ix = np.fft.fftfreq(w) * w
    blocked = np.hypot(iy[:, None], ix[None, :]) < radius
    if blocked.all():
        raise ValueError(f"beamstop radius {radius} blocks the entire {w}x{h} frame")
    return IntensityData(counts=data.counts, measured=data.measured & ~blocked)


def _find_record(records, role: str, path):
    for rec in records:
        if rec.role == role:
            return rec
    raise PayloadShapeError(f"{path}: no raster with role {role!r}")


def import_raw(intensity_path, mask_path, shape: tuple[int, int]) -> IntensityData:
    """Load intensity counts and a detector mask from two container files.

    The intensity file must hold a ``role=intensity`` raster, the mask file a
    ``role=mask`` raster of the same declared shape. Measured pixels are the
    mask's true pixels that also carry positive counts.
    """
    shape = (int(shape[0]), int(shape[1]))
    records, _ = read_container(intensity_path)
    counts = _find_record(records, "intensity", intensity_path).data
    if counts.shape != shape:
        raise PayloadShapeError(
            f"{intensity_path}: intensity shape {counts.shape} does not match expected {shape}"
        )
    negatives = np.argwhere(counts < 0)
    if negatives.size:
        y, x = (int(i) for i in negatives[0])
        raise InvalidFieldError(f"{intensity_path}: negative count at pixel (row={y}, col={x})")
    records, _ = read_container(mask_path)
    mask = _find_record(records, "mask", mask_path).data
    if mask.dtype != np.bool_:
        mask = mask != 0.0
    if mask.shape != shape:
        raise PayloadShapeError(
            f"{mask_path}: mask shape {mask.shape} does not match expected {shape}"
        )
    return IntensityData.from_counts(counts, mask)
