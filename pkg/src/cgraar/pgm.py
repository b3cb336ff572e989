"""Minimal 16-bit PGM export for display-only previews."""

from __future__ import annotations

import numpy as np

__all__ = ["write_pgm"]


def write_pgm(path, image: np.ndarray) -> None:
    """Write a 2-D array of values in [0, 1] as a binary 16-bit PGM."""
    img = np.asarray(image, dtype=np.float64)
    if img.ndim != 2:
        raise ValueError(f"PGM image must be 2-D, got ndim={img.ndim}")
    scaled = np.rint(np.clip(img, 0.0, 1.0) * 65535.0).astype(">u2")
    h, w = img.shape
    with open(path, "wb") as fh:
        fh.write(f"P5\n{w} {h}\n65535\n".encode("ascii"))
        fh.write(scaled.tobytes())
