"""Run configuration: one JSON document, one dataclass per section."""

import copy
import json
import math
from dataclasses import asdict, dataclass, field
from numbers import Real
from typing import Any, Dict, List, Optional

from src.common.errors import raise_on_errors
from src.common.models import (
    CONVENTIONAL,
    DEFAULT_CFL_LIMIT,
    DEFAULT_PML_ALPHA,
    DEFAULT_PML_THICKNESS,
    HADAMARD_MODES,
    PATTERN_KINDS,
    RANDOM_SINGLE_POINT,
    REGULAR_SINGLE_POINT,
    Grid,
    filter_known,
    unknown_keys,
)
from src.datagen.models import PHANTOM_KINDS, PerturbationSpec, validate_perturbations
from src.optim.models import FistaConfig, TvConfig
from src.recon.models import BP, RECON_METHODS, TVPLUS_BREGMAN, VARIATIONAL_METHODS, ReconConfig
from src.recon.validate import validate_recon_config
from src.wavecore.grid import validate_grid

SECTIONS = ("grid", "phantom", "perturbations", "pattern", "noise", "reconstruction", "outputs")


@dataclass
class GridSection:
    dims: List[int] = field(default_factory=lambda: [64, 64, 64])
    spacing_m: List[float] = field(default_factory=lambda: [1.5625e-4] * 3)
    c0: float = 1500.0
    nt: Optional[int] = None
    dt_s: Optional[float] = None
    cfl: float = DEFAULT_CFL_LIMIT
    cfl_limit: float = DEFAULT_CFL_LIMIT
    pml_thickness: int = DEFAULT_PML_THICKNESS
    pml_alpha: float = DEFAULT_PML_ALPHA


@dataclass
class PhantomSection:
    kind: str = "vessel_tree"
    seed: int = 0
    params: Dict[str, Any] = field(default_factory=dict)
    supersample: int = 2
    presmooth: bool = True


@dataclass
class PatternSection:
    kind: str = CONVENTIONAL
    m_c: Optional[int] = None
    m_sub: Optional[int] = None
    stride: Optional[int] = None
    seed: int = 0
    mode: str = "bipolar"
    frames: int = 1


@dataclass
class NoiseSection:
    sigma: float = 0.0
    seed: int = 0


@dataclass
class ReconstructionSection:
    methods: List[str] = field(default_factory=lambda: [BP])
    settings: Dict[str, Any] = field(default_factory=dict)
    bandpass: Optional[Dict[str, float]] = None


@dataclass
class OutputsSection:
    dir: str = "out"
    dtype: str = "f64"
    mip_axes: List[str] = field(default_factory=lambda: ["y"])
    png: bool = False
    shared_scale: bool = False
    write_series: bool = True
    s3_uri: Optional[str] = None


_SECTION_TYPES = {
    "grid": GridSection,
    "phantom": PhantomSection,
    "pattern": PatternSection,
    "noise": NoiseSection,
    "outputs": OutputsSection,
}
_PERTURBATION_KEYS = ("sigma_s", "sigma_n", "sound_speed_amplitude", "seed_s", "seed_n", "seed_c")
BANDPASS_KEYS = ("low_hz", "high_hz", "taper_hz")


@dataclass
class RunConfig:
    grid: GridSection = field(default_factory=GridSection)
    phantom: PhantomSection = field(default_factory=PhantomSection)
    perturbations: PerturbationSpec = field(default_factory=PerturbationSpec)
    pattern: PatternSection = field(default_factory=PatternSection)
    noise: NoiseSection = field(default_factory=NoiseSection)
    reconstruction: ReconstructionSection = field(default_factory=ReconstructionSection)
    outputs: OutputsSection = field(default_factory=OutputsSection)

    def to_dict(self) -> dict:
        perturbations = {k: getattr(self.perturbations, k) for k in _PERTURBATION_KEYS}
        reconstruction = {"methods": list(self.reconstruction.methods), **self.reconstruction.settings}
        if self.reconstruction.bandpass is not None:
            reconstruction["bandpass"] = dict(self.reconstruction.bandpass)
        return {
            "grid": asdict(self.grid),
            "phantom": asdict(self.phantom),
            "perturbations": perturbations,
            "pattern": asdict(self.pattern),
            "noise": asdict(self.noise),
            "reconstruction": reconstruction,
            "outputs": asdict(self.outputs),
        }

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        """Build a validated RunConfig; raises ValidationError on the first problem."""
        raise_on_errors(validate_run_config(data))
        return _build(data)

    def perturbation_spec(self) -> PerturbationSpec:
        spec = copy.copy(self.perturbations)
        spec.noise_sigma = self.noise.sigma
        spec.seed_noise = self.noise.seed
        return spec

    def recon_config(self, method: str) -> ReconConfig:
        return ReconConfig.from_dict({**self.reconstruction.settings, "method": method})

    def build_grid(self) -> Grid:
        """Grid with dt at the CFL number for the largest sound speed the run will see."""
        g = self.grid
        c_max = g.c0 * (1.0 + self.perturbations.sound_speed_amplitude)
        dt = g.dt_s if g.dt_s is not None else g.cfl * min(g.spacing_m) / c_max
        nt = g.nt
        if nt is None:
            extent = math.sqrt(sum((n * h) ** 2 for n, h in zip(g.dims, g.spacing_m)))
            nt = int(math.ceil(extent / (g.c0 * dt))) + 1
        return Grid(
            dims=tuple(g.dims), spacing=tuple(g.spacing_m), dt=dt, nt=nt, sound_speed=g.c0,
            pml_thickness=g.pml_thickness, pml_alpha=g.pml_alpha, cfl_limit=g.cfl_limit,
        )


def _build(data: dict) -> RunConfig:
    kwargs = {}
    for name, section_type in _SECTION_TYPES.items():
        kwargs[name] = section_type(**filter_known(section_type, data.get(name, {})))
    kwargs["perturbations"] = PerturbationSpec.from_dict(data.get("perturbations", {}))
    recon = dict(data.get("reconstruction", {}))
    methods = recon.pop("methods", [BP])
    bandpass = recon.pop("bandpass", None)
    kwargs["reconstruction"] = ReconstructionSection(
        methods=list(methods), settings=recon, bandpass=None if bandpass is None else dict(bandpass),
    )
    return RunConfig(**kwargs)


def _is_number(value) -> bool:
    return isinstance(value, Real) and not isinstance(value, bool)


def _is_int(value) -> bool:
    return isinstance(value, int) and not isinstance(value, bool)


def validate_run_config(data: dict) -> List[str]:
    """Validate a RunConfig document. Returns list of errors (empty = valid)."""
    if not isinstance(data, dict):
        return ["config must be a JSON object"]
    extra = sorted(k for k in data if k not in SECTIONS)
    if extra:
        return [f"unknown config sections: {extra}"]
    for name in SECTIONS:
        if not isinstance(data.get(name, {}), dict):
            return [f"section {name!r} must be an object"]
    for name, section_type in _SECTION_TYPES.items():
        bad = unknown_keys(section_type, data.get(name, {}))
        if bad:
            return [f"unknown keys in {name}: {bad}"]
    bad = [k for k in data.get("perturbations", {}) if k not in _PERTURBATION_KEYS]
    if bad:
        return [f"unknown keys in perturbations: {sorted(bad)}"]
    recon = data.get("reconstruction", {})
    recon_keys = set(ReconConfig().to_dict()) | {"methods", "bandpass"}
    bad = sorted(k for k in recon if k not in recon_keys)
    if bad:
        return [f"unknown keys in reconstruction: {bad}"]
    for nested, nested_type in (("fista", FistaConfig), ("tv", TvConfig), ("postprocess_tv", TvConfig)):
        bad = unknown_keys(nested_type, recon.get(nested, {}))
        if bad:
            return [f"unknown keys in reconstruction.{nested}: {bad}"]
    bandpass = recon.get("bandpass")
    if bandpass is not None:
        if not isinstance(bandpass, dict):
            return ["reconstruction.bandpass must be an object"]
        bad = sorted(k for k in bandpass if k not in BANDPASS_KEYS)
        if bad:
            return [f"unknown keys in reconstruction.bandpass: {bad}"]

    cfg = _build(data)

    g = cfg.grid
    if len(g.dims) != 3 or not all(_is_int(n) for n in g.dims):
        return ["grid.dims must be three integers"]
    if len(g.spacing_m) != 3 or not all(_is_number(h) for h in g.spacing_m):
        return ["grid.spacing_m must be three numbers"]
    if not _is_number(g.c0) or g.c0 <= 0:
        return ["grid.c0 must be a positive number"]
    if g.nt is not None and (not _is_int(g.nt) or g.nt < 1):
        return ["grid.nt must be a positive integer"]
    if not _is_number(g.cfl) or not 0 < g.cfl <= g.cfl_limit:
        return [f"grid.cfl must be in (0, cfl_limit={g.cfl_limit}]"]
    errors = validate_perturbations(cfg.perturbations)
    if errors:
        return errors
    errors = validate_grid(cfg.build_grid())
    if errors:
        return [f"grid: {errors[0]}"]

    ph = cfg.phantom
    if ph.kind not in PHANTOM_KINDS:
        return [f"phantom.kind must be one of {sorted(PHANTOM_KINDS)}, got {ph.kind!r}"]
    if not _is_int(ph.supersample) or ph.supersample < 1:
        return ["phantom.supersample must be a positive integer"]

    pat = cfg.pattern
    if pat.kind not in PATTERN_KINDS:
        return [f"pattern.kind must be one of {sorted(PATTERN_KINDS)}, got {pat.kind!r}"]
    if pat.kind == REGULAR_SINGLE_POINT and pat.stride is None:
        return ["pattern.stride is required for gSP"]
    if pat.kind in ("rSP", "sHd") and pat.m_c is None and pat.m_sub is None:
        return [f"pattern.m_c or pattern.m_sub is required for {pat.kind}"]
    if pat.kind == "sHd" and pat.mode not in HADAMARD_MODES:
        return [f"pattern.mode must be one of {sorted(HADAMARD_MODES)}"]
    if not _is_int(pat.frames) or pat.frames < 1:
        return ["pattern.frames must be a positive integer"]
    if pat.frames > 1:
        if pat.kind != RANDOM_SINGLE_POINT or pat.m_sub is None or pat.m_c is not None:
            return ["pattern.frames > 1 needs kind rSP with m_sub and no m_c"]
        plane = g.dims[1] * g.dims[2]
        if not _is_int(pat.m_sub) or pat.m_sub < 1 or plane % pat.m_sub:
            return [f"pattern.m_sub must divide the {plane} plane locations for frame-wise patterns"]

    if not _is_number(cfg.noise.sigma) or cfg.noise.sigma < 0:
        return ["noise.sigma must be a non-negative number"]

    bp = cfg.reconstruction.bandpass
    if bp is not None:
        if "low_hz" not in bp or "high_hz" not in bp:
            return ["reconstruction.bandpass needs low_hz and high_hz"]
        if not all(_is_number(v) for v in bp.values()):
            return ["reconstruction.bandpass values must be numbers"]
        nyquist = 1.0 / (2.0 * cfg.build_grid().dt)
        if not 0 <= bp["low_hz"] < bp["high_hz"] <= nyquist:
            return [f"reconstruction.bandpass needs 0 <= low_hz < high_hz <= {nyquist:.6g} Hz"]
        if bp.get("taper_hz", 0.0) < 0:
            return ["reconstruction.bandpass.taper_hz must be >= 0"]

    methods = cfg.reconstruction.methods
    if not methods or any(m not in RECON_METHODS for m in methods):
        return [f"reconstruction.methods must be a non-empty subset of {sorted(RECON_METHODS)}"]
    for method in methods:
        errors = validate_recon_config(cfg.recon_config(method))
        if errors:
            return [f"reconstruction ({method}): {errors[0]}"]
        needs_sigma = method in VARIATIONAL_METHODS or method == TVPLUS_BREGMAN
        if needs_sigma and cfg.recon_config(method).auto_lambda and cfg.noise.sigma == 0:
            return [f"reconstruction ({method}): lambda 'auto' needs noise.sigma > 0"]

    out = cfg.outputs
    if out.dtype not in ("f32", "f64"):
        return ["outputs.dtype must be 'f32' or 'f64'"]
    if any(a not in ("x", "y", "z") for a in out.mip_axes):
        return ["outputs.mip_axes entries must be 'x', 'y' or 'z'"]
    if out.s3_uri is not None and not str(out.s3_uri).startswith("s3://"):
        return ["outputs.s3_uri must start with s3://"]
    return []


def load_run_config(path: str) -> RunConfig:
    with open(path) as f:
        return RunConfig.from_dict(json.load(f))


def apply_seed(cfg: RunConfig, seed: int) -> RunConfig:
    """Derive every seed in the run from one base seed."""
    cfg = copy.deepcopy(cfg)
    cfg.phantom.seed = seed
    cfg.pattern.seed = seed + 1
    cfg.noise.seed = seed + 2
    cfg.perturbations.seed_s = seed + 3
    cfg.perturbations.seed_n = seed + 4
    cfg.perturbations.seed_c = seed + 5
    return cfg
