"""Data models for synthetic data generation."""

from dataclasses import asdict, dataclass
from typing import List

MAX_SOUND_SPEED_AMPLITUDE = 0.3

# Phantom kinds
BALLS = "balls"
TUBES = "tubes"
VESSEL_TREE = "vessel_tree"
TUMOR = "tumor"
PHANTOM_KINDS = frozenset({BALLS, TUBES, VESSEL_TREE, TUMOR})


@dataclass
class PerturbationSpec:
    """Switchable departures from the reconstruction model.

    sigma_s and sigma_n are log-scale spreads of sensor sensitivity and noise
    variance; sound_speed_amplitude is the peak sound-speed deviation as a
    fraction of c0; noise_sigma is the white-noise standard deviation.
    """

    sigma_s: float = 0.0
    sigma_n: float = 0.0
    sound_speed_amplitude: float = 0.0
    noise_sigma: float = 0.0
    seed_s: int = 1
    seed_n: int = 2
    seed_c: int = 3
    seed_noise: int = 4

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "PerturbationSpec":
        known_fields = {f.name for f in cls.__dataclass_fields__.values()}
        filtered = {k: v for k, v in data.items() if k in known_fields}
        return cls(**filtered)


def validate_perturbations(spec: PerturbationSpec) -> List[str]:
    """Validate a perturbation spec. Returns list of errors (empty = valid)."""
    for name in ("sigma_s", "sigma_n", "sound_speed_amplitude", "noise_sigma"):
        value = getattr(spec, name)
        if not isinstance(value, (int, float)) or value < 0:
            return [f"{name} must be a non-negative number, got {value!r}"]
    if spec.sound_speed_amplitude >= MAX_SOUND_SPEED_AMPLITUDE:
        return [
            f"sound_speed_amplitude must be < {MAX_SOUND_SPEED_AMPLITUDE}, "
            f"got {spec.sound_speed_amplitude}"
        ]
    return []
