"""Closed-form proximal operators."""

import numpy as np

from src.common.models import Field


def prox_l2_nonneg(q, alpha: float):
    """argmin over x >= 0 of 1/2 |x|^2 + |x - q|^2 / (2 alpha): max(0, q / (1 + alpha))."""
    if alpha < 0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if isinstance(q, Field):
        return Field(
            values=np.maximum(0.0, q.values / (1.0 + alpha)),
            spacing=q.spacing,
            provenance=dict(q.provenance),
        )
    return np.maximum(0.0, np.asarray(q, dtype=np.float64) / (1.0 + alpha))


def l2_energy(x: np.ndarray) -> float:
    return 0.5 * float(np.vdot(x, x))
