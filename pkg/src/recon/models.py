"""Reconstruction configuration and results."""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Union

from src.common.models import Field, finite_or_marker
from src.optim.models import DIRICHLET_ALL, FistaConfig, TvConfig
from src.optim.power import DEFAULT_POWER_ITERS, DEFAULT_POWER_TOL

# Reconstruction methods
BP = "bp"
TR = "tr"
L2PLUS = "l2plus"
TVPLUS = "tvplus"
TVPLUS_BREGMAN = "tvplus_bregman"
TR_PP_TV = "tr_pp_tv"
BP_PP_TV = "bp_pp_tv"

LINEAR_METHODS = frozenset({BP, TR})
VARIATIONAL_METHODS = frozenset({L2PLUS, TVPLUS})
POSTPROCESSED_METHODS = frozenset({TR_PP_TV, BP_PP_TV})
RECON_METHODS = LINEAR_METHODS | VARIATIONAL_METHODS | POSTPROCESSED_METHODS | {TVPLUS_BREGMAN}

AUTO_LAMBDA = "auto"


def _inner_tv() -> TvConfig:
    return TvConfig(boundary=DIRICHLET_ALL, nonneg=True, pdhg_iters=200, pdhg_tol=1e-4)


@dataclass
class ReconConfig:
    method: str = TVPLUS
    lam: Union[float, str] = AUTO_LAMBDA
    kappa: float = 1.25
    dp_tol: float = 0.01
    dp_search_iters: int = 50
    dp_max_trials: int = 40
    bregman_max: int = 10
    bregman_lambda_factor: float = 10.0
    fista: FistaConfig = field(default_factory=FistaConfig)
    tv: TvConfig = field(default_factory=_inner_tv)
    postprocess_lambda: float = 0.0
    postprocess_tv: TvConfig = field(default_factory=TvConfig)
    zero_layers: int = 1
    lipschitz_iters: int = DEFAULT_POWER_ITERS
    lipschitz_tol: float = DEFAULT_POWER_TOL

    @property
    def auto_lambda(self) -> bool:
        return self.lam == AUTO_LAMBDA

    def to_dict(self) -> dict:
        return {
            "method": self.method,
            "lambda": self.lam,
            "kappa": self.kappa,
            "dp_tol": self.dp_tol,
            "dp_search_iters": self.dp_search_iters,
            "dp_max_trials": self.dp_max_trials,
            "bregman_max": self.bregman_max,
            "bregman_lambda_factor": self.bregman_lambda_factor,
            "fista": self.fista.to_dict(),
            "tv": self.tv.to_dict(),
            "postprocess_lambda": self.postprocess_lambda,
            "postprocess_tv": self.postprocess_tv.to_dict(),
            "zero_layers": self.zero_layers,
            "lipschitz_iters": self.lipschitz_iters,
            "lipschitz_tol": self.lipschitz_tol,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "ReconConfig":
        data = dict(data)
        if "lambda" in data:
            data["lam"] = data.pop("lambda")
        nested = {
            "fista": FistaConfig.from_dict(data.pop("fista", {})),
            "tv": TvConfig.from_dict({**_inner_tv().to_dict(), **data.pop("tv", {})}),
            "postprocess_tv": TvConfig.from_dict(data.pop("postprocess_tv", {})),
        }
        known_fields = {f.name for f in cls.__dataclass_fields__.values()}
        filtered = {k: v for k, v in data.items() if k in known_fields}
        return cls(**filtered, **nested)


@dataclass(eq=False)
class ReconResult:
    image: Field
    method: str
    lambda_used: Optional[float] = None
    log: List[Dict[str, Any]] = field(default_factory=list)
    outer_log: List[Dict[str, Any]] = field(default_factory=list)
    discrepancy_final: Optional[float] = None
    residual_norm: Optional[float] = None
    psnr: Optional[float] = None
    provenance: Dict[str, Any] = field(default_factory=dict)

    def report(self) -> dict:
        """JSON report written next to the image."""
        d = {
            "method": self.method,
            "lambda": self.lambda_used,
            "kappa": self.provenance.get("kappa"),
            "iterations": len(self.log),
            "outer_iterations": len(self.outer_log),
            "discrepancy": self.discrepancy_final,
            "residual_norm": self.residual_norm,
            "psnr": None if self.psnr is None else finite_or_marker(self.psnr),
            "provenance": self.provenance,
        }
        return {k: v for k, v in d.items() if v is not None}
