"""Data models shared across the wave, sensing and reconstruction packages."""

import math
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Tuple, Union

import numpy as np

# Sensing pattern kinds
CONVENTIONAL = "conventional"
RANDOM_SINGLE_POINT = "rSP"
REGULAR_SINGLE_POINT = "gSP"
SCRAMBLED_HADAMARD = "sHd"

PATTERN_KINDS = frozenset({
    CONVENTIONAL, RANDOM_SINGLE_POINT, REGULAR_SINGLE_POINT, SCRAMBLED_HADAMARD,
})
POINT_KINDS = frozenset({CONVENTIONAL, RANDOM_SINGLE_POINT, REGULAR_SINGLE_POINT})

# Scrambled Hadamard entry conventions
BIPOLAR = "bipolar"
BINARY = "binary"
HADAMARD_MODES = frozenset({BIPOLAR, BINARY})

DEFAULT_PML_THICKNESS = 10
DEFAULT_PML_ALPHA = 2.0
DEFAULT_CFL_LIMIT = 0.3

SoundSpeed = Union[float, np.ndarray]


@dataclass(eq=False)
class Grid:
    """Cartesian grid, time axis and medium for one wave simulation.

    dims and spacing are (Nx, Ny, Nz) and metres; x is depth and the detection
    plane sits at x = 0. sound_speed is a scalar or a (Nx, Ny, Nz) array.
    """

    dims: Tuple[int, int, int]
    spacing: Tuple[float, float, float]
    dt: float
    nt: int
    sound_speed: SoundSpeed = 1500.0
    pml_thickness: int = DEFAULT_PML_THICKNESS
    pml_alpha: float = DEFAULT_PML_ALPHA
    cfl_limit: float = DEFAULT_CFL_LIMIT

    def __post_init__(self):
        self.dims = tuple(int(n) for n in self.dims)
        self.spacing = tuple(float(h) for h in self.spacing)
        if not np.isscalar(self.sound_speed):
            self.sound_speed = np.asarray(self.sound_speed, dtype=np.float64)

    @property
    def plane_dims(self) -> Tuple[int, int]:
        return self.dims[1], self.dims[2]

    @property
    def n_voxels(self) -> int:
        return int(np.prod(self.dims))

    @property
    def is_homogeneous(self) -> bool:
        return np.isscalar(self.sound_speed)

    @property
    def c_max(self) -> float:
        return float(np.max(self.sound_speed))

    @property
    def c_min(self) -> float:
        return float(np.min(self.sound_speed))

    def with_sound_speed(self, sound_speed: SoundSpeed) -> "Grid":
        return replace(self, sound_speed=sound_speed)

    @classmethod
    def from_cfl(
        cls,
        dims: Tuple[int, int, int],
        spacing: Tuple[float, float, float],
        nt: int,
        sound_speed: SoundSpeed = 1500.0,
        cfl: float = DEFAULT_CFL_LIMIT,
        **kwargs,
    ) -> "Grid":
        """Build a grid whose dt sits exactly at the given CFL number."""
        c_max = float(np.max(sound_speed))
        dt = cfl * min(spacing) / c_max
        return cls(dims=dims, spacing=spacing, dt=dt, nt=nt, sound_speed=sound_speed, **kwargs)

    def to_dict(self) -> dict:
        d = {
            "dims": list(self.dims),
            "spacing_m": list(self.spacing),
            "dt_s": self.dt,
            "nt": self.nt,
            "pml_thickness": self.pml_thickness,
            "pml_alpha": self.pml_alpha,
            "cfl_limit": self.cfl_limit,
        }
        if self.is_homogeneous:
            d["sound_speed"] = float(self.sound_speed)
        else:
            d["sound_speed"] = "field"
        return d

    @classmethod
    def from_dict(cls, data: dict, sound_speed: Optional[np.ndarray] = None) -> "Grid":
        c = data.get("sound_speed", 1500.0)
        if c == "field":
            if sound_speed is None:
                raise ValueError("grid has a sound speed field but none was supplied")
            c = sound_speed
        return cls(
            dims=tuple(data["dims"]),
            spacing=tuple(data["spacing_m"]),
            dt=data["dt_s"],
            nt=data["nt"],
            sound_speed=c,
            pml_thickness=data.get("pml_thickness", DEFAULT_PML_THICKNESS),
            pml_alpha=data.get("pml_alpha", DEFAULT_PML_ALPHA),
            cfl_limit=data.get("cfl_limit", DEFAULT_CFL_LIMIT),
        )


@dataclass(eq=False)
class Field:
    """Scalar volume on a grid, stored as an (Nx, Ny, Nz) array."""

    values: np.ndarray
    spacing: Tuple[float, float, float] = (1.0, 1.0, 1.0)
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def dims(self) -> Tuple[int, int, int]:
        return tuple(self.values.shape)

    def linearized(self) -> np.ndarray:
        """Flatten with x running fastest."""
        return self.values.ravel(order="F")

    @classmethod
    def from_linear(
        cls, values: np.ndarray, dims: Tuple[int, int, int], spacing=(1.0, 1.0, 1.0),
    ) -> "Field":
        return cls(values=np.reshape(values, dims, order="F"), spacing=tuple(spacing))


@dataclass(eq=False)
class PlaneSeries:
    """Pressure on the detection plane: values[y, z, t]."""

    values: np.ndarray
    dt: float
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def plane_dims(self) -> Tuple[int, int]:
        return self.values.shape[0], self.values.shape[1]

    @property
    def nt(self) -> int:
        return self.values.shape[2]


@dataclass(eq=False)
class SensingPattern:
    """Which plane combinations are measured.

    Point kinds carry ``selection``, the linear plane indices (s = y + Ny*z)
    read per measurement. sHd carries the column ``permutation`` of the
    Hadamard matrix and the retained ``rows``.
    """

    kind: str
    plane_dims: Tuple[int, int]
    m_c: int
    seed: Optional[int] = None
    mode: Optional[str] = None
    stride: Optional[int] = None
    selection: Optional[np.ndarray] = None
    permutation: Optional[np.ndarray] = None
    rows: Optional[np.ndarray] = None
    frame: Optional[int] = None

    def __post_init__(self):
        self.plane_dims = tuple(int(n) for n in self.plane_dims)
        for name in ("selection", "permutation", "rows"):
            value = getattr(self, name)
            if value is not None:
                setattr(self, name, np.asarray(value, dtype=np.int64))

    @property
    def n_locations(self) -> int:
        return self.plane_dims[0] * self.plane_dims[1]

    @property
    def m_sub(self) -> float:
        return self.n_locations / self.m_c

    def to_dict(self) -> dict:
        d = {
            "kind": self.kind,
            "plane_dims": list(self.plane_dims),
            "m_c": self.m_c,
            "seed": self.seed,
            "mode": self.mode,
            "stride": self.stride,
            "frame": self.frame,
        }
        for name in ("selection", "permutation", "rows"):
            value = getattr(self, name)
            if value is not None:
                d[name] = value.tolist()
        return {k: v for k, v in d.items() if v is not None}

    @classmethod
    def from_dict(cls, data: dict) -> "SensingPattern":
        known_fields = {f.name for f in cls.__dataclass_fields__.values()}
        filtered = {k: v for k, v in data.items() if k in known_fields}
        return cls(**filtered)


@dataclass(eq=False)
class SensorData:
    """Compressed measurements: values[measurement, t]."""

    values: np.ndarray
    pattern: SensingPattern
    dt: float
    noise_sigma: float = 0.0
    provenance: Dict[str, Any] = field(default_factory=dict)

    @property
    def m_c(self) -> int:
        return self.values.shape[0]

    @property
    def nt(self) -> int:
        return self.values.shape[1]

    def with_values(self, values: np.ndarray, noise_sigma: Optional[float] = None) -> "SensorData":
        return replace(
            self,
            values=values,
            noise_sigma=self.noise_sigma if noise_sigma is None else noise_sigma,
            provenance=dict(self.provenance),
        )


def finite_or_marker(value: float) -> Union[float, str]:
    """JSON-safe representation of a float that may be infinite."""
    if math.isinf(value):
        return "inf" if value > 0 else "-inf"
    return value


def filter_known(cls, data: dict) -> dict:
    known_fields = {f.name for f in cls.__dataclass_fields__.values()}
    return {k: v for k, v in data.items() if k in known_fields}


def unknown_keys(cls, data: dict) -> List[str]:
    known_fields = {f.name for f in cls.__dataclass_fields__.values()}
    return sorted(k for k in data if k not in known_fields)
