"""Bregman iterations: adding residuals back to the data to restore contrast."""

import logging
from typing import Callable, List, Optional, Tuple

import numpy as np

from src.common.errors import ValidationError, raise_on_errors
from src.common.lookup import LipschitzTable
from src.common.models import Field, Grid, SensingPattern, SensorData
from src.optim.fista import FistaResult
from src.recon.discrepancy import discrepancy_select
from src.recon.models import TVPLUS, TVPLUS_BREGMAN, ReconConfig, ReconResult
from src.recon.operator import MeasurementOperator
from src.recon.results import make_result
from src.recon.solve import solve_fixed_lambda
from src.recon.validate import validate_recon_config

logger = logging.getLogger(__name__)


def bregman_iterate(
    solve: Callable[[np.ndarray, Optional[np.ndarray]], FistaResult],
    data: np.ndarray,
    max_outer: int,
    kappa: Optional[float] = None,
    to_discrepancy: Optional[Callable[[float], float]] = None,
) -> Tuple[FistaResult, List[dict]]:
    """Run b <- b + (f - C A p) around solve(f + b, warm_start).

    Stops after max_outer solves, or once the discrepancy of the latest
    iterate drops below kappa when to_discrepancy is given.
    """
    b = np.zeros_like(data)
    outer_log: List[dict] = []
    result = None
    for k in range(1, max_outer + 1):
        result = solve(data + b, None if result is None else result.x)
        residual = data - result.ax
        b = b + residual
        norm = float(np.linalg.norm(residual))
        disc = to_discrepancy(norm) if to_discrepancy else None
        outer_log.append({
            "outer": k,
            "residual_norm": norm,
            "discrepancy": disc,
            "inner_iterations": len(result.log) - 1,
            "objective": result.objective,
        })
        logger.info("Bregman %d: residual %.6g discrepancy %s", k, norm, disc)
        if len(outer_log) > 1 and norm > outer_log[-2]["residual_norm"] * (1 + 1e-9):
            logger.warning("Bregman residual increased at outer iteration %d", k)
        if kappa is not None and disc is not None and disc < kappa:
            break
    return result, outer_log


def bregman_tv(
    data: SensorData,
    pattern: SensingPattern,
    grid: Grid,
    cfg: ReconConfig,
    sigma: Optional[float] = None,
    ground_truth: Optional[Field] = None,
    table: Optional[LipschitzTable] = None,
) -> ReconResult:
    """TV+ Bregman iterations at bregman_lambda_factor times the TV+ lambda.

    The TV+ lambda is cfg.lam, or the discrepancy-principle choice for 'auto'.
    """
    raise_on_errors(validate_recon_config(cfg))
    if not grid.is_homogeneous:
        raise ValidationError("reconstruction assumes a constant sound speed")
    if cfg.auto_lambda:
        tv_cfg = ReconConfig.from_dict({**cfg.to_dict(), "method": TVPLUS})
        lam_tv, _ = discrepancy_select(data, pattern, grid, sigma, tv_cfg, table=table)
    else:
        lam_tv = float(cfg.lam)
    lam = cfg.bregman_lambda_factor * lam_tv

    op = MeasurementOperator(grid, pattern)
    if data.values.shape != op.data_shape:
        raise ValidationError(f"sensor data has shape {data.values.shape}, expected {op.data_shape}")
    lipschitz = op.lipschitz(table, cfg.lipschitz_iters, cfg.lipschitz_tol)

    def solve(target, warm):
        return solve_fixed_lambda(op, target, TVPLUS, lam, cfg.fista, cfg.tv, lipschitz, sigma, x0=warm)

    to_disc = (lambda rn: op.discrepancy(rn, sigma)) if sigma else None
    final, outer_log = bregman_iterate(solve, data.values, cfg.bregman_max, cfg.kappa, to_disc)
    residual = outer_log[-1]["residual_norm"]
    return make_result(
        final.x, TVPLUS_BREGMAN, grid, pattern, cfg,
        lam=lam,
        log=final.log.to_dicts(),
        outer_log=outer_log,
        residual=residual,
        sigma=sigma,
        ground_truth=ground_truth,
        lipschitz=lipschitz,
        lambda_tv=lam_tv,
    )
