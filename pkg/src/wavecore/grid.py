"""Grid validation and sampling-rate utilities."""

from typing import List, Tuple

import numpy as np

from src.common.errors import ValidationError
from src.common.models import Grid

MIN_DIM = 8


def validate_grid(grid: Grid) -> List[str]:
    """Validate a grid. Returns list of errors (empty = valid)."""
    if len(grid.dims) != 3 or len(grid.spacing) != 3:
        return ["grid must have three dims and three spacings"]
    for axis, n in zip("xyz", grid.dims):
        if n < MIN_DIM:
            return [f"dims[{axis}]={n} is below the minimum of {MIN_DIM}"]
    for axis, h in zip("xyz", grid.spacing):
        if not h > 0:
            return [f"spacing[{axis}] must be > 0, got {h}"]
    if not grid.dt > 0:
        return [f"dt must be > 0, got {grid.dt}"]
    if grid.nt < 1:
        return [f"nt must be >= 1, got {grid.nt}"]
    if grid.pml_thickness < 1:
        return [f"pml_thickness must be >= 1, got {grid.pml_thickness}"]
    if grid.pml_alpha < 0:
        return [f"pml_alpha must be >= 0, got {grid.pml_alpha}"]

    c = grid.sound_speed
    if not grid.is_homogeneous and c.shape != grid.dims:
        return [f"sound speed field has shape {c.shape}, grid dims are {grid.dims}"]
    if not np.all(np.isfinite(c)):
        return ["sound speed contains non-finite values"]
    if not np.all(c > 0):
        return ["sound speed must be strictly positive everywhere"]

    limit = grid.cfl_limit * min(grid.spacing) / grid.c_max
    # tolerate rounding when dt was derived from the same expression
    if grid.dt > limit * (1 + 1e-12):
        return [
            f"dt={grid.dt:.6g}s violates the stability bound "
            f"{grid.cfl_limit} * min(spacing) / max(c) = {limit:.6g}s"
        ]
    return []


def check_conforms(values: np.ndarray, shape: Tuple[int, ...], what: str) -> None:
    if values.shape != tuple(shape):
        raise ValidationError(f"{what} has shape {values.shape}, expected {tuple(shape)}")
    if not np.all(np.isfinite(values)):
        raise ValidationError(f"{what} contains non-finite values")


def nyquist_limits(c: float, f_max: float) -> Tuple[float, float]:
    """Spatial and temporal sampling needed to resolve frequencies up to f_max.

    Returns (delta_r in metres, delta_t in seconds).
    """
    if not c > 0:
        raise ValidationError(f"sound speed must be > 0, got {c}")
    if not f_max > 0:
        raise ValidationError(f"f_max must be > 0, got {f_max}")
    return c / (2.0 * f_max), 1.0 / (2.0 * f_max)
