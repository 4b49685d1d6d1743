"""Procedural phantoms and the contrast protocol applied to them.

Ball and tube geometry is given in voxel units. Vessel trees and tumors are
parameterised relative to the volume (positions as fractions of dims, radii
and lengths as fractions of the smallest dim) so they survive supersampling.
"""

import logging
import math
from typing import Optional, Sequence, Tuple, Union

import numpy as np
from scipy import ndimage

from src.common.errors import ValidationError
from src.common.models import Field, Grid
from src.datagen.models import BALLS, PHANTOM_KINDS, TUBES, TUMOR, VESSEL_TREE

logger = logging.getLogger(__name__)

VESSEL_DEFAULTS = {
    "root": [0.5, 0.02, 0.5],
    "direction": [0.0, 1.0, 0.0],
    "generations": 4,
    "root_radius": 0.035,
    "radius_decay": 0.75,
    "length": 0.4,
    "length_decay": 0.75,
    "branch_angle": 35.0,
    "segments_per_branch": 4,
    "tortuosity": 0.15,
    "min_radius_voxels": 0.6,
    "value": 1.0,
}

TUMOR_DEFAULTS = {
    "center": [0.5, 0.5, 0.5],
    "center_jitter": 0.1,
    "target_fraction": 0.01,
    "growth_probability": 0.3,
    "max_steps": 1000,
    "value": 0.7,
    "vessels": {},
}

DimsLike = Union[Grid, Sequence[int]]


def _dims_of(grid: DimsLike) -> Tuple[int, int, int]:
    dims = grid.dims if isinstance(grid, Grid) else tuple(int(n) for n in grid)
    if len(dims) != 3 or min(dims) < 1:
        raise ValidationError(f"phantom dims must be three positive ints, got {dims}")
    return dims


def _spacing_of(grid: DimsLike) -> Tuple[float, float, float]:
    return grid.spacing if isinstance(grid, Grid) else (1.0, 1.0, 1.0)


def make_phantom(
    kind: str, grid: DimsLike, seed: int = 0, params: Optional[dict] = None,
) -> Field:
    """Non-negative synthetic initial pressure, deterministic per seed."""
    if kind not in PHANTOM_KINDS:
        raise ValidationError(f"unknown phantom kind {kind!r}, expected one of {sorted(PHANTOM_KINDS)}")
    dims = _dims_of(grid)
    params = dict(params or {})
    rng = np.random.default_rng(seed)
    builders = {
        BALLS: _balls,
        TUBES: _tubes,
        VESSEL_TREE: _vessel_tree,
        TUMOR: _tumor,
    }
    values = builders[kind](dims, rng, params)
    logger.debug("Phantom %s seed=%d: %d nonzero voxels", kind, seed, int(np.count_nonzero(values)))
    return Field(
        values=values,
        spacing=_spacing_of(grid),
        provenance={"phantom": kind, "seed": seed, "params": params},
    )


def _coords(dims, lo, hi):
    return np.meshgrid(
        *[np.arange(a, b, dtype=np.float64) for a, b in zip(lo, hi)], indexing="ij",
    )


def _paint_ball(vol: np.ndarray, center, radius: float, value: float) -> None:
    if radius <= 0:
        return
    lo = [max(0, int(math.floor(c - radius))) for c in center]
    hi = [min(n, int(math.ceil(c + radius)) + 1) for c, n in zip(center, vol.shape)]
    if any(b <= a for a, b in zip(lo, hi)):
        return
    x, y, z = _coords(vol.shape, lo, hi)
    inside = (x - center[0]) ** 2 + (y - center[1]) ** 2 + (z - center[2]) ** 2 < radius ** 2
    box = vol[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]]
    box[inside] = np.maximum(box[inside], value)


def _paint_capsule(vol: np.ndarray, start, end, radius: float, value: float) -> None:
    """Voxels within radius of the segment start-end."""
    if radius <= 0:
        return
    a = np.asarray(start, dtype=np.float64)
    b = np.asarray(end, dtype=np.float64)
    lo = [max(0, int(math.floor(min(p, q) - radius))) for p, q in zip(a, b)]
    hi = [min(n, int(math.ceil(max(p, q) + radius)) + 1) for p, q, n in zip(a, b, vol.shape)]
    if any(q <= p for p, q in zip(lo, hi)):
        return
    x, y, z = _coords(vol.shape, lo, hi)
    ab = b - a
    denom = float(ab @ ab)
    if denom == 0:
        t = np.zeros_like(x)
    else:
        t = ((x - a[0]) * ab[0] + (y - a[1]) * ab[1] + (z - a[2]) * ab[2]) / denom
        t = np.clip(t, 0.0, 1.0)
    dist2 = (x - a[0] - t * ab[0]) ** 2 + (y - a[1] - t * ab[1]) ** 2 + (z - a[2] - t * ab[2]) ** 2
    inside = dist2 < radius ** 2
    box = vol[lo[0]:hi[0], lo[1]:hi[1], lo[2]:hi[2]]
    box[inside] = np.maximum(box[inside], value)


def _balls(dims, rng: np.random.Generator, params: dict) -> np.ndarray:
    vol = np.zeros(dims)
    if "radii" in params:
        radii = list(params["radii"])
        centers = params.get("centers", [])
        if len(centers) != len(radii):
            raise ValidationError("balls: centers and radii must have the same length")
    else:
        count = int(params.get("count", 5))
        r_lo, r_hi = params.get("radius_range", [2.0, max(2.5, 0.12 * min(dims))])
        radii = rng.uniform(r_lo, r_hi, size=count).tolist()
        centers = [
            [rng.uniform(r, n - 1 - r) if n - 1 > 2 * r else (n - 1) / 2 for n in dims]
            for r in radii
        ]
    values = params.get("values", [1.0] * len(radii))
    if len(values) != len(radii):
        raise ValidationError("balls: values and radii must have the same length")
    for center, radius, value in zip(centers, radii, values):
        if radius < 0 or value < 0:
            raise ValidationError("balls: radii and values must be non-negative")
        _paint_ball(vol, center, radius, value)
    return vol


def _tubes(dims, rng: np.random.Generator, params: dict) -> np.ndarray:
    vol = np.zeros(dims)
    segments = params.get("segments")
    if segments is None:
        count = int(params.get("count", 4))
        radius = float(params.get("radius", max(1.0, 0.04 * min(dims))))
        segments = []
        for _ in range(count):
            depth = rng.uniform(0.2, 0.8) * (dims[0] - 1)
            start = [depth, rng.uniform(0, dims[1] - 1), 0.0]
            end = [depth + rng.uniform(-0.1, 0.1) * dims[0], rng.uniform(0, dims[1] - 1), dims[2] - 1.0]
            segments.append({"start": start, "end": end, "radius": radius})
    for seg in segments:
        radius = float(seg.get("radius", 1.0))
        value = float(seg.get("value", 1.0))
        if radius < 0 or value < 0:
            raise ValidationError("tubes: radius and value must be non-negative")
        _paint_capsule(vol, seg["start"], seg["end"], radius, value)
    return vol


def _unit(v: np.ndarray) -> np.ndarray:
    n = np.linalg.norm(v)
    if n == 0:
        raise ValidationError("vessel direction must be non-zero")
    return v / n


def _vessel_tree(dims, rng: np.random.Generator, params: dict) -> np.ndarray:
    cfg = dict(VESSEL_DEFAULTS)
    unknown = sorted(set(params) - set(cfg))
    if unknown:
        raise ValidationError(f"vessel_tree: unknown params {unknown}")
    cfg.update(params)
    scale = min(dims)
    vol = np.zeros(dims)
    root = np.asarray(cfg["root"], dtype=np.float64) * (np.asarray(dims) - 1)
    _grow_branch(
        vol, rng, cfg,
        start=root,
        direction=_unit(np.asarray(cfg["direction"], dtype=np.float64)),
        length=cfg["length"] * scale,
        radius=cfg["root_radius"] * scale,
        generation=0,
    )
    return vol


def _grow_branch(vol, rng, cfg, start, direction, length, radius, generation) -> None:
    n_seg = int(cfg["segments_per_branch"])
    pos = start
    for _ in range(n_seg):
        direction = _unit(direction + cfg["tortuosity"] * rng.standard_normal(3))
        end = pos + direction * length / n_seg
        _paint_capsule(vol, pos, end, radius, cfg["value"])
        pos = end

    child_radius = radius * cfg["radius_decay"]
    if generation + 1 >= cfg["generations"] or child_radius < cfg["min_radius_voxels"]:
        return
    side = rng.standard_normal(3)
    side = _unit(side - (side @ direction) * direction)
    angle = math.radians(cfg["branch_angle"])
    for sign in (1.0, -1.0):
        child = math.cos(angle) * direction + sign * math.sin(angle) * side
        _grow_branch(
            vol, rng, cfg, pos, _unit(child), length * cfg["length_decay"], child_radius, generation + 1,
        )


def _tumor(dims, rng: np.random.Generator, params: dict) -> np.ndarray:
    """Connected blob grown voxel-shell by voxel-shell around a random seed.

    Each step adds a random subset of the 26-neighbourhood shell of the
    current blob, excluding vessel voxels, so the blob stays one 26-connected
    component that never intersects the vasculature.
    """
    cfg = dict(TUMOR_DEFAULTS)
    unknown = sorted(set(params) - set(cfg))
    if unknown:
        raise ValidationError(f"tumor: unknown params {unknown}")
    cfg.update(params)
    if not 0 < cfg["growth_probability"] <= 1:
        raise ValidationError("tumor: growth_probability must be in (0, 1]")

    vol = np.zeros(dims)
    if cfg["vessels"] is not None:
        vessel_cfg = dict(cfg["vessels"])
        vessel_cfg.setdefault("value", 1.0)
        vol = _vessel_tree(dims, rng, vessel_cfg)
    vessels = vol > 0

    center = np.asarray(cfg["center"]) * (np.asarray(dims) - 1)
    jitter = cfg["center_jitter"] * np.asarray(dims)
    seed_voxel = None
    for _ in range(1000):
        candidate = tuple(
            int(np.clip(round(c + rng.uniform(-j, j)), 0, n - 1))
            for c, j, n in zip(center, jitter, dims)
        )
        if not vessels[candidate]:
            seed_voxel = candidate
            break
    if seed_voxel is None:
        raise ValidationError("tumor: no vessel-free seed voxel near the requested center")

    target = max(1, int(cfg["target_fraction"] * np.prod(dims)))
    blob = np.zeros(dims, dtype=bool)
    blob[seed_voxel] = True
    structure = ndimage.generate_binary_structure(3, 3)
    for step in range(int(cfg["max_steps"])):
        if blob.sum() >= target:
            break
        shell = ndimage.binary_dilation(blob, structure=structure) & ~blob & ~vessels
        if not shell.any():
            logger.warning("Tumor growth stalled after %d steps at %d voxels", step, int(blob.sum()))
            break
        blob |= shell & (rng.random(dims) < cfg["growth_probability"])

    vol[blob] = cfg["value"]
    return vol


def downsample_average(field: Field, factor: int = 2) -> Field:
    """Mean over factor^3 blocks."""
    if factor < 1 or any(n % factor for n in field.dims):
        raise ValidationError(f"dims {field.dims} are not divisible by {factor}")
    nx, ny, nz = (n // factor for n in field.dims)
    blocks = field.values.reshape(nx, factor, ny, factor, nz, factor)
    return Field(
        values=blocks.mean(axis=(1, 3, 5)),
        spacing=tuple(h * factor for h in field.spacing),
        provenance=dict(field.provenance),
    )


def normalize_max(field: Field) -> Field:
    peak = float(np.max(field.values))
    if not peak > 0:
        raise ValidationError("cannot normalize a phantom without positive values")
    return Field(values=field.values / peak, spacing=field.spacing, provenance=dict(field.provenance))


def remap_contrast(p0: Field) -> Field:
    """Map nonzero voxels v to (2v + 1) / 3 so foreground contrast is at least 1/3."""
    peak = float(np.max(p0.values))
    if abs(peak - 1.0) > 1e-9:
        raise ValidationError(f"remap_contrast expects max 1, got {peak!r}")
    values = np.where(p0.values != 0, (2.0 * p0.values + 1.0) / 3.0, 0.0)
    return Field(values=values, spacing=p0.spacing, provenance=dict(p0.provenance))


def construct_phantom(
    kind: str,
    dims: Sequence[int],
    seed: int = 0,
    params: Optional[dict] = None,
    supersample: int = 2,
    spacing: Tuple[float, float, float] = (1.0, 1.0, 1.0),
) -> Field:
    """Full phantom protocol: fine-grid generation, block averaging, normalization, contrast remap."""
    dims = _dims_of(dims)
    if supersample < 1:
        raise ValidationError(f"supersample must be >= 1, got {supersample}")
    fine = make_phantom(kind, tuple(n * supersample for n in dims), seed=seed, params=params)
    coarse = downsample_average(fine, supersample) if supersample > 1 else fine
    result = remap_contrast(normalize_max(coarse))
    result.spacing = tuple(spacing)
    result.provenance.update({"supersample": supersample, "protocol": "normalize+remap"})
    return result
