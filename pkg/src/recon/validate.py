"""Reconstruction config validation."""

from numbers import Real
from typing import List

from src.optim.models import validate_fista_config, validate_tv_config
from src.recon.models import AUTO_LAMBDA, RECON_METHODS, ReconConfig


def validate_recon_config(cfg: ReconConfig) -> List[str]:
    """Validate a reconstruction config. Returns list of errors (empty = valid)."""
    if cfg.method not in RECON_METHODS:
        return [f"method must be one of {sorted(RECON_METHODS)}, got {cfg.method!r}"]
    if cfg.lam != AUTO_LAMBDA:
        if isinstance(cfg.lam, bool) or not isinstance(cfg.lam, Real) or cfg.lam < 0:
            return [f"lambda must be a non-negative number or {AUTO_LAMBDA!r}, got {cfg.lam!r}"]
    if cfg.kappa < 1:
        return [f"kappa must be >= 1, got {cfg.kappa}"]
    if not cfg.dp_tol > 0:
        return [f"dp_tol must be > 0, got {cfg.dp_tol}"]
    if cfg.dp_search_iters < 1 or cfg.dp_max_trials < 1:
        return ["dp_search_iters and dp_max_trials must be >= 1"]
    if cfg.bregman_max < 1:
        return [f"bregman_max must be >= 1, got {cfg.bregman_max}"]
    if not cfg.bregman_lambda_factor > 0:
        return [f"bregman_lambda_factor must be > 0, got {cfg.bregman_lambda_factor}"]
    if cfg.postprocess_lambda < 0:
        return [f"postprocess_lambda must be >= 0, got {cfg.postprocess_lambda}"]
    if cfg.zero_layers < 0:
        return [f"zero_layers must be >= 0, got {cfg.zero_layers}"]
    if cfg.lipschitz_iters < 1 or not cfg.lipschitz_tol > 0:
        return ["lipschitz_iters must be >= 1 and lipschitz_tol > 0"]
    errors = validate_fista_config(cfg.fista)
    if errors:
        return errors
    errors = validate_tv_config(cfg.tv)
    if errors:
        return errors
    return validate_tv_config(cfg.postprocess_tv)
