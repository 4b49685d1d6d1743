"""Positivity-constrained L2 and TV regularized reconstruction."""

import logging
from typing import Optional

from src.common.errors import ValidationError, raise_on_errors
from src.common.lookup import LipschitzTable
from src.common.models import Field, Grid, SensingPattern, SensorData
from src.recon.discrepancy import discrepancy_select
from src.recon.models import VARIATIONAL_METHODS, ReconConfig, ReconResult
from src.recon.operator import MeasurementOperator
from src.recon.results import make_result
from src.recon.solve import residual_norm, solve_fixed_lambda
from src.recon.validate import validate_recon_config

logger = logging.getLogger(__name__)


def reconstruct_variational(
    data: SensorData,
    pattern: SensingPattern,
    grid: Grid,
    cfg: ReconConfig,
    sigma: Optional[float] = None,
    ground_truth: Optional[Field] = None,
    table: Optional[LipschitzTable] = None,
) -> ReconResult:
    """L2+ or TV+ at a fixed lambda, or at the discrepancy-principle lambda for 'auto'."""
    raise_on_errors(validate_recon_config(cfg))
    if cfg.method not in VARIATIONAL_METHODS:
        raise ValidationError(f"not a variational method: {cfg.method!r}")
    if not grid.is_homogeneous:
        raise ValidationError("reconstruction assumes a constant sound speed")
    if cfg.auto_lambda:
        _, result = discrepancy_select(data, pattern, grid, sigma, cfg, ground_truth, table)
        return result

    op = MeasurementOperator(grid, pattern)
    if data.values.shape != op.data_shape:
        raise ValidationError(f"sensor data has shape {data.values.shape}, expected {op.data_shape}")
    lipschitz = op.lipschitz(table, cfg.lipschitz_iters, cfg.lipschitz_tol)
    res = solve_fixed_lambda(op, data.values, cfg.method, float(cfg.lam), cfg.fista, cfg.tv, lipschitz, sigma)
    logger.info(
        "%s at lambda=%.6g: objective %.6g after %d iterations (%s)",
        cfg.method, cfg.lam, res.objective, len(res.log) - 1, res.log.stop_reason,
    )
    return make_result(
        res.x, cfg.method, grid, pattern, cfg,
        lam=float(cfg.lam),
        log=res.log.to_dicts(),
        residual=residual_norm(res),
        sigma=sigma,
        ground_truth=ground_truth,
        lipschitz=lipschitz,
        stop_reason=res.log.stop_reason,
    )
