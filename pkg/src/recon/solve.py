"""Fixed-lambda variational solves shared by every regularized method."""

import logging
import math
from typing import Optional

import numpy as np

from src.common.errors import ValidationError
from src.optim.fista import FistaResult, LeastSquaresTerm, ProxTerm, fista
from src.optim.models import FistaConfig, TvConfig
from src.optim.prox import l2_energy, prox_l2_nonneg
from src.optim.tv import tv_denoise, tv_energy
from src.recon.models import L2PLUS, TVPLUS
from src.recon.operator import MeasurementOperator

logger = logging.getLogger(__name__)


def regularizer_for(method: str, lam: float, tv_cfg: TvConfig) -> ProxTerm:
    """lam * J and its proximal map for L2+ (J = 1/2 |x|^2, x >= 0) or TV+."""
    if method == L2PLUS:
        return ProxTerm(
            prox=lambda v, step: prox_l2_nonneg(v, step * lam),
            energy=lambda x: lam * l2_energy(x),
        )
    if method == TVPLUS:
        return ProxTerm(
            prox=lambda v, step: tv_denoise(v, step * lam, tv_cfg),
            energy=lambda x: lam * tv_energy(x, tv_cfg),
        )
    raise ValidationError(f"no regularizer for method {method!r}")


def solve_fixed_lambda(
    op: MeasurementOperator,
    data: np.ndarray,
    method: str,
    lam: float,
    fista_cfg: FistaConfig,
    tv_cfg: TvConfig,
    lipschitz: float,
    sigma: Optional[float] = None,
    x0: Optional[np.ndarray] = None,
) -> FistaResult:
    """min_x 1/2 |C A x - data|^2 + lam * J(x) by FISTA from x0 (zero by default)."""
    smooth = LeastSquaresTerm(op=op.forward, adjoint=op.adjoint, data=data)
    discrepancy = None
    if sigma:
        discrepancy = lambda rn: op.discrepancy(rn, sigma)  # noqa: E731
    logger.debug("Solving %s at lambda=%.6g", method, lam)
    return fista(
        smooth, regularizer_for(method, lam, tv_cfg), lipschitz, fista_cfg,
        x0=x0, shape=op.image_shape, discrepancy=discrepancy,
    )


def residual_norm(result: FistaResult) -> float:
    return math.sqrt(2.0 * result.data_term)
