"""End-to-end run: phantom, simulation, reconstructions, evaluation, manifest."""

import logging
import os
from typing import Dict, List, Optional

from src.cli_io.config import RunConfig
from src.cli_io.fileio import jsonable, write_field, write_json, write_pattern, write_sensor_data, write_series
from src.cli_io.mip import clip_value, export_mip
from src.common.metrics import foreground_mean, psnr
from src.common.models import Field, Grid, SensingPattern, SensorData
from src.common.provenance import file_digest, generate_run_id
from src.common.s3 import S3_URI_ENV_VAR, publish_artifacts
from src.datagen.filters import bandpass_filter, presmooth
from src.datagen.phantoms import construct_phantom
from src.datagen.simulate import SimulationResult, simulate_frames, simulate_measurements
from src.recon.handler import reconstruct, reconstruct_frames
from src.recon.models import ReconResult
from src.sensing.patterns import build_pattern, partition_patterns

logger = logging.getLogger(__name__)

MANIFEST_NAME = "manifest.json"


class ArtifactWriter:
    """Writes files under one directory and records them for the manifest."""

    def __init__(self, out_dir: str, dtype: str):
        self.out_dir = out_dir
        self.dtype = dtype
        self.artifacts: List[dict] = []
        os.makedirs(out_dir, exist_ok=True)

    def path(self, name: str) -> str:
        return os.path.join(self.out_dir, name)

    def record(self, name: str, kind: str, paths) -> None:
        files = [os.path.relpath(p, self.out_dir) for p in paths]
        self.artifacts.append({
            "name": name,
            "kind": kind,
            "files": files,
            "sha256": {f: file_digest(os.path.join(self.out_dir, f)) for f in files},
        })

    def field(self, name: str, field: Field) -> None:
        self.record(name, "field", write_field(self.path(name), field, self.dtype))

    def json(self, name: str, kind: str, data: dict) -> None:
        self.record(name, kind, [write_json(self.path(name + ".json"), data)])


def frame_patterns(cfg: RunConfig, grid: Grid) -> List[SensingPattern]:
    """Disjoint rSP patterns that a dynamic run cycles through, one per sub-sampling step."""
    return partition_patterns(grid.plane_dims, cfg.pattern.m_sub, cfg.pattern.seed)


def build_run_pattern(cfg: RunConfig, grid: Grid) -> SensingPattern:
    p = cfg.pattern
    if p.frames > 1:
        return frame_patterns(cfg, grid)[0]
    m_c = p.m_c
    if m_c is None and p.m_sub is not None:
        m_c = grid.plane_dims[0] * grid.plane_dims[1] // p.m_sub
    return build_pattern(p.kind, grid.plane_dims, m_c=m_c, stride=p.stride, seed=p.seed, mode=p.mode)


def prefilter(data: SensorData, bandpass: Optional[Dict[str, float]]) -> SensorData:
    """Band-pass the measurements before reconstruction; no band leaves them untouched."""
    if not bandpass:
        return data
    values = bandpass_filter(
        data.values, bandpass["low_hz"], bandpass["high_hz"], data.dt, bandpass.get("taper_hz", 0.0),
    )
    filtered = data.with_values(values)
    filtered.provenance["bandpass"] = dict(bandpass)
    return filtered


def make_ground_truth(cfg: RunConfig, grid: Grid) -> Field:
    ph = cfg.phantom
    p0 = construct_phantom(
        ph.kind, grid.dims, seed=ph.seed, params=ph.params,
        supersample=ph.supersample, spacing=grid.spacing,
    )
    if ph.presmooth:
        p0 = presmooth(p0, grid)
    return p0


def simulate_run(cfg: RunConfig, writer: Optional[ArtifactWriter] = None):
    """Grid, ground truth, pattern and measurements for a config."""
    grid = cfg.build_grid()
    p0 = make_ground_truth(cfg, grid)
    pattern = build_run_pattern(cfg, grid)
    sim = simulate_measurements(p0, grid, pattern, cfg.perturbation_spec())
    if writer is not None:
        _write_simulation(writer, cfg, p0, pattern, sim)
    return grid, p0, pattern, sim


def _write_simulation(writer, cfg, p0, pattern, sim: SimulationResult) -> None:
    writer.field("phantom", p0)
    writer.record("pattern", "pattern", [write_pattern(writer.path("pattern.json"), pattern)])
    if cfg.outputs.write_series:
        writer.record("plane_series", "plane_series", write_series(writer.path("plane_series"), sim.series, writer.dtype))
    raw, meta, _ = write_sensor_data(
        writer.path("sensor_data"), sim.data, writer.dtype, pattern_file=writer.path("pattern.json"),
    )
    writer.record("sensor_data", "sensor_data", [raw, meta])
    if sim.sound_speed is not None:
        writer.field("sound_speed", sim.sound_speed)


def _reconstruct_single(cfg, writer, grid, p0, pattern, sim, sigma) -> Dict[str, ReconResult]:
    data = prefilter(sim.data, cfg.reconstruction.bandpass)
    results = {}
    for method in cfg.reconstruction.methods:
        result = reconstruct(data, pattern, grid, cfg.recon_config(method), sigma=sigma, ground_truth=p0)
        results[method] = result
        writer.field(f"recon_{method}", result.image)
        writer.json(f"report_{method}", "report", result.report())
    return results


def _reconstruct_dynamic(cfg, writer, grid, p0, sim, sigma) -> Dict[str, ReconResult]:
    """Frame-wise acquisition of the same object, cycling through the partition patterns."""
    patterns = frame_patterns(cfg, grid)
    spec = cfg.perturbation_spec()
    frames = simulate_frames(
        sim.series, patterns, cfg.pattern.frames, spec.noise_sigma, spec.seed_noise, sim.noise_scale,
    )
    pattern_files = []
    for k, pattern in enumerate(patterns):
        pattern_files.append(write_pattern(writer.path(f"pattern_{k}.json"), pattern))
        writer.record(f"pattern_{k}", "pattern", pattern_files[-1:])
    for i, frame in enumerate(frames):
        frame.provenance = {**sim.data.provenance, **frame.provenance}
        raw, meta, _ = write_sensor_data(
            writer.path(f"sensor_data_frame{i}"), frame, writer.dtype,
            pattern_file=pattern_files[i % len(patterns)],
        )
        writer.record(f"sensor_data_frame{i}", "sensor_data", [raw, meta])

    frames = [prefilter(frame, cfg.reconstruction.bandpass) for frame in frames]
    results = {}
    for method in cfg.reconstruction.methods:
        per_frame = reconstruct_frames(
            frames, grid, cfg.recon_config(method), sigma=sigma,
            ground_truths=[p0] * len(frames), patterns=patterns,
        )
        for i, result in enumerate(per_frame):
            name = f"{method}_frame{i}"
            results[name] = result
            writer.field(f"recon_{name}", result.image)
            writer.json(f"report_{name}", "report", result.report())
    return results


def run_pipeline(
    cfg: RunConfig,
    out_dir: Optional[str] = None,
    dtype: Optional[str] = None,
    s3_client=None,
) -> dict:
    """Run a RunConfig end to end and return its manifest (also written to disk)."""
    run_id = generate_run_id(cfg.to_dict())
    writer = ArtifactWriter(out_dir or cfg.outputs.dir, dtype or cfg.outputs.dtype)
    logger.info("Pipeline run %s writing to %s", run_id, writer.out_dir)

    grid, p0, pattern, sim = simulate_run(cfg, writer)
    sigma = cfg.noise.sigma or None

    if cfg.pattern.frames > 1:
        results = _reconstruct_dynamic(cfg, writer, grid, p0, sim, sigma)
    else:
        results = _reconstruct_single(cfg, writer, grid, p0, pattern, sim, sigma)

    vmax = clip_value(p0.values) if cfg.outputs.shared_scale else None
    images = {"phantom": p0, **{f"recon_{m}": r.image for m, r in results.items()}}
    for name, image in images.items():
        for axis in cfg.outputs.mip_axes:
            info = export_mip(image, axis, writer.path(f"mip_{name}_{axis}.pgm"), vmax=vmax, png=cfg.outputs.png)
            writer.record(f"mip_{name}_{axis}", "mip", info["files"])

    summary = {
        "snr_db": sim.snr_db,
        "inverse_crime": sim.report["inverse_crime"],
        "methods": {
            m: {
                "psnr_db": psnr(r.image, p0),
                "lambda": r.lambda_used,
                "discrepancy": r.discrepancy_final,
                "foreground_mean": foreground_mean(r.image, p0),
            }
            for m, r in results.items()
        },
    }
    writer.json("summary", "report", summary)

    manifest = {"run_id": run_id, "config": cfg.to_dict(), "artifacts": writer.artifacts}
    write_json(writer.path(MANIFEST_NAME), manifest)
    logger.info("Pipeline run %s finished with %d artifacts", run_id, len(writer.artifacts))

    s3_uri = cfg.outputs.s3_uri or os.environ.get(S3_URI_ENV_VAR)
    if s3_uri:
        publish_artifacts(jsonable(manifest), writer.out_dir, s3_uri, s3_client=s3_client)
    return manifest
