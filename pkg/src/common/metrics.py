"""Image quality metrics."""

import math

import numpy as np

from src.common.errors import ValidationError
from src.common.models import Field

PSNR_THRESHOLD = 0.1
PSNR_CAP_DB = 300.0


def _normalized_thresholded(values: np.ndarray, threshold: float) -> np.ndarray:
    peak = float(np.max(np.abs(values)))
    if peak == 0:
        return np.zeros_like(values)
    scaled = values / peak
    return np.where(scaled < threshold, 0.0, scaled)


def psnr(p: Field, p0: Field, threshold: float = PSNR_THRESHOLD) -> float:
    """-10 log10(MSE) after scaling both to max-abs 1 and zeroing values below threshold.

    Identical inputs give PSNR_CAP_DB instead of infinity.
    """
    a = p.values if isinstance(p, Field) else np.asarray(p)
    b = p0.values if isinstance(p0, Field) else np.asarray(p0)
    if a.shape != b.shape:
        raise ValidationError(f"psnr shapes differ: {a.shape} vs {b.shape}")
    if not np.any(b):
        raise ValidationError("psnr needs a ground truth that is not identically zero")
    mse = float(np.mean((_normalized_thresholded(a, threshold) - _normalized_thresholded(b, threshold)) ** 2))
    if mse == 0:
        return PSNR_CAP_DB
    return min(PSNR_CAP_DB, -10.0 * math.log10(mse))


def foreground_mean(image: Field, truth: Field, level: float = 0.5) -> float:
    """Mean image intensity over voxels where the normalized truth exceeds level."""
    t = truth.values / np.max(truth.values)
    mask = t > level
    if not mask.any():
        return 0.0
    return float(np.mean(image.values[mask]))
