"""Content digests used for run ids, cache keys and artifact manifests."""

import hashlib
import json
from typing import Any

import numpy as np

from src.common.models import Grid, SensingPattern


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"), default=_default)


def _default(obj):
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    if isinstance(obj, np.generic):
        return obj.item()
    raise TypeError(f"not JSON serializable: {type(obj).__name__}")


def digest(data: Any) -> str:
    """SHA-256 of the canonical JSON encoding of data."""
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


def array_digest(values: np.ndarray) -> str:
    arr = np.ascontiguousarray(values)
    h = hashlib.sha256()
    h.update(str(arr.dtype).encode())
    h.update(str(arr.shape).encode())
    h.update(arr.tobytes())
    return h.hexdigest()


def file_digest(path: str, chunk_size: int = 1 << 20) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as f:
        for chunk in iter(lambda: f.read(chunk_size), b""):
            h.update(chunk)
    return h.hexdigest()


def grid_key(grid: Grid) -> str:
    """Digest identifying a grid including any heterogeneous sound speed."""
    d = grid.to_dict()
    if not grid.is_homogeneous:
        d["sound_speed"] = array_digest(grid.sound_speed)
    return digest(d)


def operator_key(grid: Grid, pattern: SensingPattern) -> str:
    return digest({"grid": grid_key(grid), "pattern": pattern.to_dict()})


def generate_run_id(config: dict) -> str:
    """Run id derived from the configuration: 12 hex chars."""
    return digest(config)[:12]
