"""Subcommand handlers. Each takes parsed arguments and returns a status dict."""

import logging
import os
from typing import List, Optional

from src.cli_io.config import RunConfig, apply_seed, load_run_config
from src.cli_io.fileio import (
    grid_from_provenance,
    read_field,
    read_sensor_data,
    read_series,
    write_field,
    write_json,
    write_sensor_data,
)
from src.cli_io.mip import clip_value, export_mip
from src.cli_io.pipeline import ArtifactWriter, prefilter, run_pipeline, simulate_run
from src.common.errors import ValidationError
from src.common.metrics import foreground_mean, psnr
from src.common.models import Grid
from src.datagen.perturb import add_noise, snr_db
from src.recon.handler import reconstruct
from src.recon.models import AUTO_LAMBDA, ReconConfig
from src.sensing.operators import apply_sensing
from src.sensing.patterns import build_pattern

logger = logging.getLogger(__name__)


def resolve_config(args) -> RunConfig:
    """RunConfig from --config (defaults otherwise) with --seed applied."""
    cfg = load_run_config(args.config) if args.config else RunConfig()
    if args.seed is not None:
        cfg = apply_seed(cfg, args.seed)
    return cfg


def _dtype(args, cfg: Optional[RunConfig] = None) -> str:
    if args.dtype:
        return args.dtype
    return cfg.outputs.dtype if cfg is not None else "f64"


def _grid_for(provenance: dict, args) -> Grid:
    grid = grid_from_provenance(provenance)
    if grid is not None:
        return grid
    if args.config:
        return resolve_config(args).build_grid()
    raise ValidationError("input carries no grid; pass --config to describe it")


def _parse_lambda(value: Optional[str]):
    if value is None or value == AUTO_LAMBDA:
        return value
    try:
        return float(value)
    except ValueError:
        raise ValidationError(f"--lambda must be a number or 'auto', got {value!r}")


def handle_simulate(args) -> dict:
    cfg = resolve_config(args)
    writer = ArtifactWriter(args.out or cfg.outputs.dir, _dtype(args, cfg))
    _, _, pattern, sim = simulate_run(cfg, writer)
    logger.info("simulate wrote %d artifacts to %s", len(writer.artifacts), writer.out_dir)
    return {
        "status": "success",
        "out": writer.out_dir,
        "pattern": pattern.kind,
        "m_c": pattern.m_c,
        "snr_db": sim.snr_db,
        "artifacts": [a["name"] for a in writer.artifacts],
    }


def handle_subsample(args) -> dict:
    series = read_series(args.series)
    m_c = args.m_c
    if m_c is None and args.m_sub is not None:
        ny, nz = series.plane_dims
        m_c = ny * nz // args.m_sub
    pattern = build_pattern(
        args.pattern, series.plane_dims, m_c=m_c, stride=args.stride,
        seed=args.seed if args.seed is not None else 0, mode=args.mode,
    )
    data = apply_sensing(pattern, series)
    snr = None
    if args.noise_sigma:
        noise_seed = (args.seed if args.seed is not None else 0) + 2
        data, snr = add_noise(data, args.noise_sigma, noise_seed)
    out = args.out or "sensor_data"
    raw, meta, pattern_file = write_sensor_data(out, data, _dtype(args))
    logger.info("Subsampled %s with %s to %d measurements", args.series, pattern.kind, pattern.m_c)
    return {"status": "success", "files": [raw, meta, pattern_file], "m_c": pattern.m_c, "snr_db": snr}


def handle_reconstruct(args) -> dict:
    data = read_sensor_data(args.data)
    grid = _grid_for(data.provenance, args)
    settings = {}
    bandpass = None
    if args.config:
        run_cfg = resolve_config(args)
        settings = dict(run_cfg.reconstruction.settings)
        bandpass = run_cfg.reconstruction.bandpass
    if args.bandpass:
        low, high = args.bandpass
        bandpass = {"low_hz": low, "high_hz": high}
    data = prefilter(data, bandpass)
    settings["method"] = args.method
    lam = _parse_lambda(args.lam)
    if lam is not None:
        settings["lambda"] = lam
    cfg = ReconConfig.from_dict(settings)
    sigma = args.sigma if args.sigma is not None else (data.noise_sigma or None)
    truth = read_field(args.ground_truth) if args.ground_truth else None

    result = reconstruct(data, data.pattern, grid, cfg, sigma=sigma, ground_truth=truth)
    out = args.out or f"recon_{args.method}"
    files = list(write_field(out, result.image, _dtype(args)))
    files.append(write_json(out + ".report.json", result.report()))
    return {
        "status": "success",
        "method": result.method,
        "lambda_used": result.lambda_used,
        "discrepancy": result.discrepancy_final,
        "psnr_db": result.psnr,
        "files": files,
    }


def handle_evaluate(args) -> dict:
    image = read_field(args.image)
    truth = read_field(args.truth)
    report = {
        "image": args.image,
        "truth": args.truth,
        "psnr_db": psnr(image, truth),
        "foreground_mean": foreground_mean(image, truth),
    }
    if args.data:
        data = read_sensor_data(args.data)
        recorded = data.provenance.get("simulation", {}).get("snr_db")
        if recorded is not None:
            report["snr_db"] = recorded
        else:
            sigma = args.sigma if args.sigma is not None else data.noise_sigma
            report["snr_db"] = snr_db(data.values, sigma)
    if args.out:
        write_json(args.out, report)
    return {"status": "success", **report}


def handle_mip(args) -> dict:
    image = read_field(args.image)
    vmax = args.vmax
    if vmax is None and args.scale_from:
        vmax = clip_value(read_field(args.scale_from).values)
    prefix = args.out or os.path.splitext(args.image)[0] + "_mip"
    exports: List[dict] = []
    for axis in args.axis or ["y"]:
        exports.append(export_mip(image, axis, f"{prefix}_{axis}.pgm", vmax=vmax, png=args.png))
    return {"status": "success", "projections": exports}


def handle_pipeline(args) -> dict:
    if not args.config:
        raise ValidationError("pipeline needs --config")
    cfg = resolve_config(args)
    manifest = run_pipeline(cfg, out_dir=args.out, dtype=args.dtype)
    return {
        "status": "success",
        "run_id": manifest["run_id"],
        "artifacts": len(manifest["artifacts"]),
        "out": args.out or cfg.outputs.dir,
    }


HANDLERS = {
    "simulate": handle_simulate,
    "subsample": handle_subsample,
    "reconstruct": handle_reconstruct,
    "evaluate": handle_evaluate,
    "mip": handle_mip,
    "pipeline": handle_pipeline,
}
