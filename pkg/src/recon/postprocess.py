"""Post-processing applied to reconstructed images."""

import numpy as np

from src.common.errors import ValidationError
from src.common.models import Field
from src.optim.models import TvConfig
from src.optim.tv import tv_denoise


def postprocess_standard(image: Field, zero_layers: int = 1) -> Field:
    """Clamp negatives and zero the first zero_layers x-layers (the sensor layer at least)."""
    if zero_layers < 0:
        raise ValidationError(f"zero_layers must be >= 0, got {zero_layers}")
    values = np.maximum(image.values, 0.0)
    values[:zero_layers] = 0.0
    return Field(values=values, spacing=image.spacing, provenance=dict(image.provenance))


def postprocess_tv(image: Field, lambda_pp: float, cfg: TvConfig = None) -> Field:
    """Positivity-constrained TV denoising of a linear reconstruction."""
    return tv_denoise(image, lambda_pp, cfg or TvConfig())
