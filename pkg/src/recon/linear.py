"""Two-step linear reconstructions: back-projection and time reversal."""

import logging
from typing import Optional

import numpy as np

from src.common.errors import ValidationError
from src.common.models import Field, Grid, SensingPattern, SensorData
from src.recon.models import BP, TR, ReconConfig, ReconResult
from src.recon.operator import MeasurementOperator
from src.recon.results import make_result
from src.sensing.operators import adjoint_plane

logger = logging.getLogger(__name__)


def linear_image(method: str, data: SensorData, pattern: SensingPattern, grid: Grid) -> np.ndarray:
    """A^T C^T f for BP, time reversal of C^T f for TR; no post-processing."""
    op = MeasurementOperator(grid, pattern)
    if data.values.shape != op.data_shape:
        raise ValidationError(f"sensor data has shape {data.values.shape}, expected {op.data_shape}")
    plane = adjoint_plane(pattern, data.values)
    if method == BP:
        return op.solver.adjoint_array(plane)
    if method == TR:
        return op.solver.time_reverse_array(plane)
    raise ValidationError(f"not a linear method: {method!r}")


def _reconstruct_linear(method, data, pattern, grid, cfg, sigma, ground_truth) -> ReconResult:
    cfg = cfg or ReconConfig(method=method)
    values = linear_image(method, data, pattern, grid)
    logger.info("%s reconstruction done, peak %.4g", method.upper(), float(np.max(values)))
    return make_result(
        values, method, grid, pattern, cfg, sigma=sigma, ground_truth=ground_truth,
    )


def reconstruct_bp(
    data: SensorData,
    pattern: SensingPattern,
    grid: Grid,
    cfg: Optional[ReconConfig] = None,
    sigma: Optional[float] = None,
    ground_truth: Optional[Field] = None,
) -> ReconResult:
    return _reconstruct_linear(BP, data, pattern, grid, cfg, sigma, ground_truth)


def reconstruct_tr(
    data: SensorData,
    pattern: SensingPattern,
    grid: Grid,
    cfg: Optional[ReconConfig] = None,
    sigma: Optional[float] = None,
    ground_truth: Optional[Field] = None,
) -> ReconResult:
    return _reconstruct_linear(TR, data, pattern, grid, cfg, sigma, ground_truth)
