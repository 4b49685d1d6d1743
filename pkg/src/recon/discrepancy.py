"""Regularization parameter choice by the discrepancy principle.

Looks for lambda whose solution has normalized residual
|C A p - f| / (sqrt(M_c M_t) sigma) equal to kappa. The search brackets
the target on a log scale around lambda_0 = |A^T C^T f|_inf and then
narrows the bracket by regula falsi (Illinois variant) in log lambda.
"""

import logging
import math
from dataclasses import dataclass, field, replace
from typing import Any, Callable, List, Optional, Tuple

import numpy as np

from src.common.errors import DiscrepancyBracketError, NumericalError, ValidationError, raise_on_errors
from src.common.lookup import LipschitzTable
from src.common.models import Field, Grid, SensingPattern, SensorData
from src.recon.models import TVPLUS, VARIATIONAL_METHODS, ReconConfig, ReconResult
from src.recon.operator import MeasurementOperator
from src.recon.results import make_result
from src.recon.solve import residual_norm, solve_fixed_lambda
from src.recon.validate import validate_recon_config

logger = logging.getLogger(__name__)

INITIAL_BRACKET = (1e-3, 1e1)
SEARCH_LIMITS = (1e-12, 1e6)
MONOTONE_RTOL = 1e-3


@dataclass
class LambdaTrial:
    lam: float
    discrepancy: float


@dataclass
class LambdaSelection:
    lam: float
    discrepancy: float
    payload: Any
    trials: List[LambdaTrial] = field(default_factory=list)
    monotone: bool = True


def _is_monotone(trials: List[LambdaTrial]) -> bool:
    ordered = sorted(trials, key=lambda p: p.lam)
    return all(
        b.discrepancy >= a.discrepancy * (1 - MONOTONE_RTOL)
        for a, b in zip(ordered, ordered[1:])
    )


def select_lambda(
    evaluate: Callable[[float], Tuple[float, Any]],
    lam0: float,
    kappa: float,
    tol: float,
    max_trials: int = 40,
    bracket: Tuple[float, float] = INITIAL_BRACKET,
    limits: Tuple[float, float] = SEARCH_LIMITS,
) -> LambdaSelection:
    """Find lam with |evaluate(lam)[0] - kappa| <= tol.

    evaluate returns (discrepancy, payload); the discrepancy is assumed
    non-decreasing in lam, which is checked on every trial. The search runs
    on the ratio lam / lam0, so scaling lam0 by a power of two scales every
    tried lambda by exactly that factor.
    """
    if not (math.isfinite(lam0) and lam0 > 0):
        raise DiscrepancyBracketError(f"cannot scale the lambda search from lambda_0={lam0!r}")
    trials: List[LambdaTrial] = []
    state = {"monotone": True}

    def trial(ratio: float) -> Tuple[float, float, Any]:
        lam = ratio * lam0
        disc, payload = evaluate(lam)
        if not math.isfinite(disc):
            raise NumericalError(f"non-finite discrepancy at lambda={lam:.6g}")
        trials.append(LambdaTrial(lam, disc))
        logger.info("DP trial %d: lambda=%.6g discrepancy=%.6g", len(trials), lam, disc)
        if state["monotone"] and not _is_monotone(trials):
            state["monotone"] = False
            logger.warning("Discrepancy is not monotone in lambda over the trials so far")
        return lam, disc, payload

    def done(lam, disc, payload) -> LambdaSelection:
        return LambdaSelection(lam, disc, payload, trials, state["monotone"])

    lo, hi = bracket
    lam, d_lo, p_lo = trial(lo)
    if abs(d_lo - kappa) <= tol:
        return done(lam, d_lo, p_lo)
    while d_lo > kappa:
        lo /= 10.0
        if lo < limits[0]:
            raise DiscrepancyBracketError(
                f"discrepancy stays above kappa={kappa} down to lambda={lo * 10 * lam0:.3g}"
            )
        logger.warning("Expanding DP bracket downwards to lambda=%.3g", lo * lam0)
        lam, d_lo, p_lo = trial(lo)
        if abs(d_lo - kappa) <= tol:
            return done(lam, d_lo, p_lo)

    lam, d_hi, p_hi = trial(hi)
    if abs(d_hi - kappa) <= tol:
        return done(lam, d_hi, p_hi)
    while d_hi < kappa:
        hi *= 10.0
        if hi > limits[1]:
            raise DiscrepancyBracketError(
                f"discrepancy stays below kappa={kappa} up to lambda={hi / 10 * lam0:.3g}"
            )
        logger.warning("Expanding DP bracket upwards to lambda=%.3g", hi * lam0)
        lam, d_hi, p_hi = trial(hi)
        if abs(d_hi - kappa) <= tol:
            return done(lam, d_hi, p_hi)

    g_lo, g_hi = d_lo - kappa, d_hi - kappa
    last_side = 0
    for _ in range(max_trials):
        x_lo, x_hi = math.log(lo), math.log(hi)
        x = x_lo - g_lo * (x_hi - x_lo) / (g_hi - g_lo)
        ratio = math.exp(min(max(x, x_lo), x_hi))
        lam, disc, payload = trial(ratio)
        g = disc - kappa
        if abs(g) <= tol:
            return done(lam, disc, payload)
        if g < 0:
            lo, g_lo = ratio, g
            if last_side == -1:
                g_hi /= 2.0
            last_side = -1
        else:
            hi, g_hi = ratio, g
            if last_side == 1:
                g_lo /= 2.0
            last_side = 1
    raise DiscrepancyBracketError(
        f"no lambda within {tol} of kappa={kappa} after {len(trials)} trials "
        f"(bracket [{lo * lam0:.6g}, {hi * lam0:.6g}])"
    )


def discrepancy_select(
    data: SensorData,
    pattern: SensingPattern,
    grid: Grid,
    sigma: float,
    cfg: ReconConfig,
    ground_truth: Optional[Field] = None,
    table: Optional[LipschitzTable] = None,
) -> Tuple[float, ReconResult]:
    """Pick lambda for cfg.method (L2+ or TV+) and return it with the final reconstruction."""
    raise_on_errors(validate_recon_config(cfg))
    if sigma is None or not sigma > 0:
        raise ValidationError(f"the discrepancy principle needs sigma > 0, got {sigma!r}")
    method = cfg.method if cfg.method in VARIATIONAL_METHODS else TVPLUS
    op = MeasurementOperator(grid, pattern)
    f = data.values
    lipschitz = op.lipschitz(table, cfg.lipschitz_iters, cfg.lipschitz_tol)
    lam0 = float(np.max(np.abs(op.adjoint(f))))
    search_fista = replace(cfg.fista, max_iters=cfg.dp_search_iters)

    def evaluate(lam: float):
        res = solve_fixed_lambda(op, f, method, lam, search_fista, cfg.tv, lipschitz, sigma)
        return op.discrepancy(residual_norm(res), sigma), res

    selection = select_lambda(evaluate, lam0, cfg.kappa, cfg.dp_tol, cfg.dp_max_trials)
    final = selection.payload
    if cfg.fista.max_iters != cfg.dp_search_iters:
        final = solve_fixed_lambda(op, f, method, selection.lam, cfg.fista, cfg.tv, lipschitz, sigma)
    logger.info(
        "DP selected lambda=%.6g (discrepancy %.4f, %d trials)",
        selection.lam, selection.discrepancy, len(selection.trials),
    )
    result = make_result(
        final.x, method, grid, pattern, cfg,
        lam=selection.lam,
        log=final.log.to_dicts(),
        residual=residual_norm(final),
        sigma=sigma,
        ground_truth=ground_truth,
        lipschitz=lipschitz,
        lambda_0=lam0,
        dp_trials=[{"lambda": p.lam, "discrepancy": p.discrepancy} for p in selection.trials],
        dp_monotone=selection.monotone,
        stop_reason=final.log.stop_reason,
    )
    return selection.lam, result
