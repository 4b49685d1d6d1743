"""Reconstruction entry points: single data sets and frame sequences."""

import logging
from concurrent.futures import ThreadPoolExecutor
from typing import List, Optional, Sequence

from src.common import runtime
from src.common.errors import ValidationError, raise_on_errors
from src.common.lookup import LipschitzTable
from src.common.models import Field, Grid, SensingPattern, SensorData
from src.recon.bregman import bregman_tv
from src.recon.linear import linear_image, reconstruct_bp, reconstruct_tr
from src.recon.models import (
    BP,
    BP_PP_TV,
    L2PLUS,
    TR,
    TR_PP_TV,
    TVPLUS,
    TVPLUS_BREGMAN,
    ReconConfig,
    ReconResult,
)
from src.recon.postprocess import postprocess_tv
from src.recon.results import make_result
from src.recon.validate import validate_recon_config
from src.recon.variational import reconstruct_variational

logger = logging.getLogger(__name__)


def _reconstruct_pp_tv(method, data, pattern, grid, cfg, sigma, ground_truth) -> ReconResult:
    linear = BP if method == BP_PP_TV else TR
    raw = Field(values=linear_image(linear, data, pattern, grid), spacing=grid.spacing)
    denoised = postprocess_tv(raw, cfg.postprocess_lambda, cfg.postprocess_tv)
    return make_result(
        denoised.values, method, grid, pattern, cfg,
        lam=cfg.postprocess_lambda, sigma=sigma, ground_truth=ground_truth,
    )


def reconstruct(
    data: SensorData,
    pattern: SensingPattern,
    grid: Grid,
    cfg: ReconConfig,
    sigma: Optional[float] = None,
    ground_truth: Optional[Field] = None,
    table: Optional[LipschitzTable] = None,
) -> ReconResult:
    """Run any reconstruction method named in cfg.method."""
    raise_on_errors(validate_recon_config(cfg))
    if not grid.is_homogeneous:
        raise ValidationError("reconstruction assumes a constant sound speed")
    method = cfg.method
    logger.info("Reconstructing with %s (pattern %s, m_c=%d)", method, pattern.kind, pattern.m_c)
    if method == BP:
        return reconstruct_bp(data, pattern, grid, cfg, sigma, ground_truth)
    if method == TR:
        return reconstruct_tr(data, pattern, grid, cfg, sigma, ground_truth)
    if method in (L2PLUS, TVPLUS):
        return reconstruct_variational(data, pattern, grid, cfg, sigma, ground_truth, table)
    if method == TVPLUS_BREGMAN:
        return bregman_tv(data, pattern, grid, cfg, sigma, ground_truth, table)
    if method in (BP_PP_TV, TR_PP_TV):
        return _reconstruct_pp_tv(method, data, pattern, grid, cfg, sigma, ground_truth)
    raise ValidationError(f"unknown method {method!r}")


def reconstruct_frames(
    frames: Sequence[SensorData],
    grid: Grid,
    cfg: ReconConfig,
    sigma: Optional[float] = None,
    ground_truths: Optional[Sequence[Field]] = None,
    table: Optional[LipschitzTable] = None,
    patterns: Optional[Sequence[SensingPattern]] = None,
) -> List[ReconResult]:
    """Reconstruct each frame independently, in frame order.

    Frame i uses patterns[i % len(patterns)] when patterns are given (the
    partition cycle of a dynamic acquisition), otherwise the pattern stored
    with the frame.
    """
    if ground_truths is not None and len(ground_truths) != len(frames):
        raise ValidationError("ground_truths must match frames one to one")
    if patterns is not None and not patterns:
        raise ValidationError("patterns must not be empty")
    truths = list(ground_truths) if ground_truths is not None else [None] * len(frames)
    workers = min(runtime.pool_size(), max(1, len(frames)))
    logger.info("Reconstructing %d frames on %d workers", len(frames), workers)

    def run(index: int) -> ReconResult:
        frame = frames[index]
        pattern = frame.pattern if patterns is None else patterns[index % len(patterns)]
        result = reconstruct(frame, pattern, grid, cfg, sigma, truths[index], table)
        result.provenance["frame"] = index
        return result

    if workers == 1:
        return [run(i) for i in range(len(frames))]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(run, range(len(frames))))
