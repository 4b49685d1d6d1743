"""Maximum intensity projections and 8-bit image export."""

import logging
import os
from typing import List, Optional

import numpy as np
from PIL import Image

from src.cli_io.fileio import write_json
from src.common.errors import ValidationError
from src.common.models import Field

logger = logging.getLogger(__name__)

AXES = {"x": 0, "y": 1, "z": 2}
# colour scale tops out where the brightest 100/256 percent of values begin
TOP_FRACTION = 100.0 / 256.0 / 100.0


def mip(field: Field, axis: str) -> np.ndarray:
    if axis not in AXES:
        raise ValidationError(f"axis must be one of {sorted(AXES)}, got {axis!r}")
    return np.max(field.values, axis=AXES[axis])


def clip_value(values: np.ndarray, top_fraction: float = TOP_FRACTION) -> float:
    """Quantile at 1 - top_fraction of the positive values; 0 when none are positive."""
    positive = values[values > 0]
    if positive.size == 0:
        return 0.0
    return float(np.quantile(positive, 1.0 - top_fraction))


def to_uint8(image: np.ndarray, vmax: float) -> np.ndarray:
    if vmax <= 0:
        return np.zeros(image.shape, dtype=np.uint8)
    scaled = np.clip(image / vmax, 0.0, 1.0)
    return np.round(scaled * 255.0).astype(np.uint8)


def write_pgm(path: str, pixels: np.ndarray) -> None:
    """Binary (P5) 8-bit greyscale PGM."""
    if pixels.dtype != np.uint8 or pixels.ndim != 2:
        raise ValidationError("PGM export needs a 2D uint8 image")
    height, width = pixels.shape
    with open(path, "wb") as f:
        f.write(f"P5\n{width} {height}\n255\n".encode("ascii"))
        f.write(np.ascontiguousarray(pixels).tobytes())


def read_pgm(path: str) -> np.ndarray:
    with open(path, "rb") as f:
        raw = f.read()
    parts = raw.split(b"\n", 3)
    if parts[0] != b"P5":
        raise ValidationError(f"{path} is not a binary PGM")
    width, height = (int(v) for v in parts[1].split())
    return np.frombuffer(parts[3], dtype=np.uint8).reshape(height, width)


def write_png(path: str, pixels: np.ndarray) -> None:
    Image.fromarray(pixels).save(path)


def mip_sidecar(field: Field, axis: str, scale: float, shared: bool, files: List[str]) -> dict:
    return {
        "kind": "mip",
        "axis": axis,
        "clip_value": scale,
        "shared_scale": shared,
        "field_dims": list(field.values.shape),
        "images": [os.path.basename(f) for f in files],
        "provenance": field.provenance,
    }


def export_mip(
    field: Field,
    axis: str,
    path: str,
    vmax: Optional[float] = None,
    png: bool = False,
) -> dict:
    """Project, scale (own clip value unless vmax is shared) and write PGM (+ PNG).

    A `<stem>.json` sidecar next to the images records the axis, clip value
    and the provenance of the projected field; it is the last entry of files.
    """
    image = mip(field, axis)
    scale = clip_value(field.values) if vmax is None else vmax
    pixels = to_uint8(image, scale)
    write_pgm(path, pixels)
    stem = path.rsplit(".", 1)[0]
    files = [path]
    if png:
        png_path = stem + ".png"
        write_png(png_path, pixels)
        files.append(png_path)
    sidecar_path = write_json(stem + ".json", mip_sidecar(field, axis, scale, vmax is not None, files))
    files.append(sidecar_path)
    logger.debug("Wrote MIP along %s to %s (clip %.4g)", axis, path, scale)
    return {"axis": axis, "clip_value": scale, "files": files}
