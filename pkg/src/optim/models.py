"""Solver configurations and iteration logs."""

import csv
import io
from dataclasses import asdict, dataclass, field
from typing import List, Optional

# TV boundary handling
NEUMANN_ALL = "neumann_all"
DIRICHLET_ALL = "dirichlet_all"
DIRICHLET_DETECTION_PLANE = "dirichlet_detection_plane"
TV_BOUNDARIES = frozenset({NEUMANN_ALL, DIRICHLET_ALL, DIRICHLET_DETECTION_PLANE})

# Step events recorded by FISTA
RESTART = "restart"
BACKTRACK = "backtrack"
MOMENTUM_RESET = "momentum_reset"

# Extrapolated steps longer than 4/(3L) amplify the top eigenmode once the
# momentum weight approaches 1.
MAX_MOMENTUM_STEP_SCALE = 4.0 / 3.0


@dataclass
class TvConfig:
    boundary: str = NEUMANN_ALL
    nonneg: bool = True
    pdhg_iters: int = 2000
    pdhg_tol: float = 1e-4

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "TvConfig":
        known_fields = {f.name for f in cls.__dataclass_fields__.values()}
        return cls(**{k: v for k, v in data.items() if k in known_fields})


@dataclass
class FistaConfig:
    max_iters: int = 50
    step_scale: float = 1.8
    momentum_step_scale: float = 1.0
    restart: bool = True
    backtrack_max: int = 5
    stall_window: int = 5

    def to_dict(self) -> dict:
        return asdict(self)

    @classmethod
    def from_dict(cls, data: dict) -> "FistaConfig":
        known_fields = {f.name for f in cls.__dataclass_fields__.values()}
        return cls(**{k: v for k, v in data.items() if k in known_fields})


def validate_tv_config(cfg: TvConfig) -> List[str]:
    """Validate a TV config. Returns list of errors (empty = valid)."""
    if cfg.boundary not in TV_BOUNDARIES:
        return [f"boundary must be one of {sorted(TV_BOUNDARIES)}, got {cfg.boundary!r}"]
    if cfg.pdhg_iters < 1:
        return [f"pdhg_iters must be >= 1, got {cfg.pdhg_iters}"]
    if not cfg.pdhg_tol > 0:
        return [f"pdhg_tol must be > 0, got {cfg.pdhg_tol}"]
    return []


def validate_fista_config(cfg: FistaConfig) -> List[str]:
    """Validate a FISTA config. Returns list of errors (empty = valid)."""
    if cfg.max_iters < 1:
        return [f"max_iters must be >= 1, got {cfg.max_iters}"]
    if not 0 < cfg.step_scale < 2:
        return [f"step_scale must be in (0, 2), got {cfg.step_scale}"]
    if not 0 < cfg.momentum_step_scale < MAX_MOMENTUM_STEP_SCALE:
        return [f"momentum_step_scale must be in (0, 4/3), got {cfg.momentum_step_scale}"]
    if cfg.backtrack_max < 0:
        return [f"backtrack_max must be >= 0, got {cfg.backtrack_max}"]
    if cfg.stall_window < 1:
        return [f"stall_window must be >= 1, got {cfg.stall_window}"]
    return []


@dataclass
class IterationRecord:
    iteration: int
    objective: float
    data_term: float
    best_objective: float
    events: List[str] = field(default_factory=list)
    discrepancy: Optional[float] = None


@dataclass
class IterationLog:
    records: List[IterationRecord] = field(default_factory=list)
    stop_reason: str = ""

    def append(self, record: IterationRecord) -> None:
        self.records.append(record)

    def __len__(self) -> int:
        return len(self.records)

    @property
    def best_objectives(self) -> List[float]:
        return [r.best_objective for r in self.records]

    def event_count(self, event: str) -> int:
        return sum(r.events.count(event) for r in self.records)

    def to_dicts(self) -> List[dict]:
        return [asdict(r) for r in self.records]

    def to_csv(self) -> str:
        """CSV with columns iter, objective, data_discrepancy, step_events."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["iter", "objective", "data_discrepancy", "step_events"])
        for r in self.records:
            writer.writerow([
                r.iteration,
                repr(r.objective),
                "" if r.discrepancy is None else repr(r.discrepancy),
                "|".join(r.events),
            ])
        return buf.getvalue()
