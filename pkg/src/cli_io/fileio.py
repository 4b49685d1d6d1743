"""Raw binary files with JSON sidecars.

Every array is stored as little-endian float32 or float64 in <stem>.raw,
described by <stem>.json. All kinds share one linearization: the first
index of the declared dims varies fastest (Fortran order). A field
[Nx, Ny, Nz] is x-fastest, a plane series [Ny, Nz, Nt] stores one whole
plane per time step with y fastest (so s = y + Ny*z matches pattern
selections), and sensor data [M_c, Nt] stores one measurement vector per
time step.
"""

import json
import logging
import math
import os
from typing import Any, Optional, Tuple

import numpy as np

from src.common.errors import ValidationError
from src.common.models import Field, Grid, PlaneSeries, SensingPattern, SensorData

logger = logging.getLogger(__name__)

DTYPES = {"f32": "<f4", "f64": "<f8"}
DTYPE_NAMES = {"f32": "float32", "f64": "float64"}
NAME_TO_KEY = {v: k for k, v in DTYPE_NAMES.items()}

ARRAY_ORDER = "first-index-fastest"


def jsonable(obj: Any) -> Any:
    """Recursively convert numpy values and non-finite floats for JSON."""
    if isinstance(obj, dict):
        return {str(k): jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [jsonable(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return jsonable(obj.tolist())
    if isinstance(obj, np.generic):
        return jsonable(obj.item())
    if isinstance(obj, float) and not math.isfinite(obj):
        return "nan" if math.isnan(obj) else ("inf" if obj > 0 else "-inf")
    return obj


def write_json(path: str, data: dict) -> str:
    with open(path, "w") as f:
        json.dump(jsonable(data), f, sort_keys=True, indent=2)
        f.write("\n")
    return path


def read_json(path: str) -> dict:
    with open(path) as f:
        return json.load(f)


def _stem(path: str) -> str:
    for ext in (".json", ".raw"):
        if path.endswith(ext):
            return path[: -len(ext)]
    return path


def _write_raw(stem: str, flat: np.ndarray, dtype: str) -> str:
    if dtype not in DTYPES:
        raise ValidationError(f"dtype must be one of {sorted(DTYPES)}, got {dtype!r}")
    path = stem + ".raw"
    with open(path, "wb") as f:
        f.write(np.ascontiguousarray(flat, dtype=DTYPES[dtype]).tobytes())
    return path


def _read_raw(stem: str, sidecar: dict, count: int) -> np.ndarray:
    if sidecar.get("order", ARRAY_ORDER) != ARRAY_ORDER:
        raise ValidationError(
            f"unsupported order {sidecar.get('order')!r} in {stem}.json, expected {ARRAY_ORDER!r}"
        )
    key = NAME_TO_KEY.get(sidecar.get("dtype"))
    if key is None:
        raise ValidationError(f"unsupported dtype {sidecar.get('dtype')!r} in {stem}.json")
    flat = np.fromfile(stem + ".raw", dtype=DTYPES[key])
    if flat.size != count:
        raise ValidationError(f"{stem}.raw holds {flat.size} values, sidecar declares {count}")
    return flat


def _sidecar(kind: str, dims, dtype: str, order: str, **extra) -> dict:
    d = {
        "kind": kind,
        "dims": list(dims),
        "dtype": DTYPE_NAMES[dtype],
        "byteorder": "little",
        "order": order,
    }
    d.update(extra)
    return d


def _check_kind(sidecar: dict, kind: str, path: str) -> None:
    if sidecar.get("kind") != kind:
        raise ValidationError(f"{path} holds a {sidecar.get('kind')!r}, expected {kind!r}")


def write_field(path: str, field: Field, dtype: str = "f64") -> Tuple[str, str]:
    stem = _stem(path)
    raw = _write_raw(stem, field.values.ravel(order="F"), dtype)
    meta = write_json(stem + ".json", _sidecar(
        "field", field.dims, dtype, ARRAY_ORDER,
        spacing_m=list(field.spacing), provenance=field.provenance,
    ))
    return raw, meta


def read_field(path: str) -> Field:
    stem = _stem(path)
    sidecar = read_json(stem + ".json")
    _check_kind(sidecar, "field", path)
    dims = tuple(sidecar["dims"])
    flat = _read_raw(stem, sidecar, int(np.prod(dims)))
    return Field(
        values=flat.astype(np.float64).reshape(dims, order="F"),
        spacing=tuple(sidecar.get("spacing_m", (1.0, 1.0, 1.0))),
        provenance=sidecar.get("provenance", {}),
    )


def write_series(path: str, series: PlaneSeries, dtype: str = "f64") -> Tuple[str, str]:
    stem = _stem(path)
    raw = _write_raw(stem, series.values.ravel(order="F"), dtype)
    meta = write_json(stem + ".json", _sidecar(
        "plane_series", series.values.shape, dtype, ARRAY_ORDER,
        dt_s=series.dt, provenance=series.provenance,
    ))
    return raw, meta


def read_series(path: str) -> PlaneSeries:
    stem = _stem(path)
    sidecar = read_json(stem + ".json")
    _check_kind(sidecar, "plane_series", path)
    dims = tuple(sidecar["dims"])
    flat = _read_raw(stem, sidecar, int(np.prod(dims)))
    return PlaneSeries(
        values=flat.astype(np.float64).reshape(dims, order="F"),
        dt=sidecar["dt_s"],
        provenance=sidecar.get("provenance", {}),
    )


def write_pattern(path: str, pattern: SensingPattern) -> str:
    data = pattern.to_dict()
    data["scrambling"] = "column-permutation" if pattern.kind == "sHd" else None
    return write_json(path, {k: v for k, v in data.items() if v is not None})


def read_pattern(path: str) -> SensingPattern:
    return SensingPattern.from_dict(read_json(path))


def write_sensor_data(
    path: str, data: SensorData, dtype: str = "f64", pattern_file: Optional[str] = None,
) -> Tuple[str, str, str]:
    """Write values, sidecar and (unless given) a pattern file next to them."""
    stem = _stem(path)
    if pattern_file is None:
        pattern_file = write_pattern(stem + ".pattern.json", data.pattern)
    raw = _write_raw(stem, data.values.ravel(order="F"), dtype)
    meta = write_json(stem + ".json", _sidecar(
        "sensor_data", data.values.shape, dtype, ARRAY_ORDER,
        dt_s=data.dt,
        noise_sigma=data.noise_sigma,
        pattern=os.path.relpath(pattern_file, os.path.dirname(os.path.abspath(stem + ".json"))),
        provenance=data.provenance,
    ))
    return raw, meta, pattern_file


def read_sensor_data(path: str) -> SensorData:
    stem = _stem(path)
    sidecar = read_json(stem + ".json")
    _check_kind(sidecar, "sensor_data", path)
    dims = tuple(sidecar["dims"])
    flat = _read_raw(stem, sidecar, int(np.prod(dims)))
    pattern_path = os.path.join(os.path.dirname(os.path.abspath(stem + ".json")), sidecar["pattern"])
    return SensorData(
        values=flat.astype(np.float64).reshape(dims, order="F"),
        pattern=read_pattern(pattern_path),
        dt=sidecar["dt_s"],
        noise_sigma=sidecar.get("noise_sigma", 0.0),
        provenance=sidecar.get("provenance", {}),
    )


def grid_from_provenance(provenance: dict) -> Optional[Grid]:
    """Grid recorded by the simulation step, if any."""
    d = provenance.get("grid")
    if not d or d.get("sound_speed") == "field":
        return None
    return Grid.from_dict(d)
