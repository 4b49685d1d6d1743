"""Assembling ReconResult records."""

import math
from typing import List, Optional

import numpy as np

from src.common.metrics import psnr
from src.common.models import Field, Grid, SensingPattern
from src.recon.models import ReconConfig, ReconResult
from src.recon.postprocess import postprocess_standard


def make_result(
    values: np.ndarray,
    method: str,
    grid: Grid,
    pattern: SensingPattern,
    cfg: ReconConfig,
    lam: Optional[float] = None,
    log: Optional[List[dict]] = None,
    outer_log: Optional[List[dict]] = None,
    residual: Optional[float] = None,
    sigma: Optional[float] = None,
    ground_truth: Optional[Field] = None,
    **provenance,
) -> ReconResult:
    """Post-process values and record everything needed to re-run the reconstruction."""
    image = postprocess_standard(
        Field(values=values, spacing=grid.spacing), zero_layers=cfg.zero_layers,
    )
    discrepancy = None
    if residual is not None and sigma:
        discrepancy = residual / (math.sqrt(pattern.m_c * grid.nt) * sigma)
    prov = {
        "method": method,
        "grid": grid.to_dict(),
        "pattern": pattern.to_dict(),
        "config": cfg.to_dict(),
        "sigma": sigma,
        "kappa": cfg.kappa,
        "sigma_model": "scalar",
    }
    prov.update(provenance)
    image.provenance = {**prov, "lambda": lam}
    return ReconResult(
        image=image,
        method=method,
        lambda_used=lam,
        log=list(log or []),
        outer_log=list(outer_log or []),
        discrepancy_final=discrepancy,
        residual_norm=residual,
        psnr=None if ground_truth is None else psnr(image, ground_truth),
        provenance=prov,
    )
