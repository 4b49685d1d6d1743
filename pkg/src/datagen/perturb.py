"""Model perturbations and measurement noise."""

import logging
import math
from typing import Optional, Tuple

import numpy as np
from scipy import ndimage

from src.common.errors import NumericalError, ValidationError
from src.common.models import Field, SensorData
from src.datagen.models import MAX_SOUND_SPEED_AMPLITUDE

logger = logging.getLogger(__name__)

SOUND_SPEED_SMOOTHING = 8.0


def _log_normal(shape, sigma: float, seed: int) -> np.ndarray:
    if sigma < 0:
        raise ValidationError(f"log-normal spread must be >= 0, got {sigma}")
    if sigma == 0:
        return np.ones(shape)
    rng = np.random.default_rng(seed)
    return np.exp(sigma * rng.standard_normal(shape))


def sensitivity_map(plane_dims: Tuple[int, int], sigma_s: float, seed: int) -> np.ndarray:
    """Per-detector gains exp(sigma_s * X), X standard normal; shape (Ny, Nz)."""
    return _log_normal(tuple(plane_dims), sigma_s, seed)


def noise_scale_map(m_c: int, sigma_n: float, seed: int) -> np.ndarray:
    """Per-channel noise scales exp(sigma_n * X); shape (m_c,)."""
    return _log_normal((m_c,), sigma_n, seed)


def perturb_sound_speed(
    c0: float,
    p0: Field,
    amplitude: float,
    seed: int,
    smoothing: float = SOUND_SPEED_SMOOTHING,
) -> Field:
    """c0 plus a zero-mean deviation peaking at exactly amplitude * c0.

    The deviation is a smoothed Gaussian random field plus the normalized
    initial pressure, centered and then rescaled.
    """
    if not c0 > 0:
        raise ValidationError(f"c0 must be > 0, got {c0}")
    if not 0 <= amplitude < MAX_SOUND_SPEED_AMPLITUDE:
        raise ValidationError(
            f"amplitude must be in [0, {MAX_SOUND_SPEED_AMPLITUDE}), got {amplitude}"
        )
    provenance = {"c0": c0, "amplitude": amplitude, "seed": seed, "smoothing": smoothing}
    if amplitude == 0:
        return Field(values=np.full(p0.dims, float(c0)), spacing=p0.spacing, provenance=provenance)

    rng = np.random.default_rng(seed)
    noise = ndimage.gaussian_filter(rng.standard_normal(p0.dims), sigma=smoothing, mode="wrap")
    noise /= np.max(np.abs(noise))
    peak = float(np.max(np.abs(p0.values)))
    tilde = noise + (p0.values / peak if peak > 0 else 0.0)
    tilde = tilde - tilde.mean()
    spread = float(np.max(np.abs(tilde)))
    if spread == 0:
        raise NumericalError("sound-speed perturbation is identically zero")
    tilde *= amplitude * c0 / spread
    logger.info("Sound speed perturbed by up to %.1f m/s around %.1f m/s", amplitude * c0, c0)
    return Field(values=c0 + tilde, spacing=p0.spacing, provenance=provenance)


def snr_db(clean: np.ndarray, sigma: float) -> float:
    """10 * log10(mean clean power / sigma^2); +inf without noise."""
    if sigma == 0:
        return math.inf
    power = float(np.mean(np.square(clean)))
    if power == 0:
        return -math.inf
    return 10.0 * math.log10(power / sigma ** 2)


def add_noise(
    data: SensorData,
    sigma: float,
    seed: int,
    noise_scale: Optional[np.ndarray] = None,
) -> Tuple[SensorData, float]:
    """Add white Gaussian noise, optionally scaled per measurement channel.

    Returns the noisy data and the SNR of the clean data at this sigma.
    """
    if sigma < 0:
        raise ValidationError(f"sigma must be >= 0, got {sigma}")
    snr = snr_db(data.values, sigma)
    if sigma == 0:
        return data.with_values(data.values.copy(), noise_sigma=0.0), snr
    rng = np.random.default_rng(seed)
    eps = rng.standard_normal(data.values.shape)
    if noise_scale is not None:
        if noise_scale.shape != (data.m_c,):
            raise ValidationError(f"noise scale map has shape {noise_scale.shape}, expected ({data.m_c},)")
        eps *= noise_scale[:, None]
    noisy = data.with_values(data.values + sigma * eps, noise_sigma=sigma)
    noisy.provenance.update({"noise_seed": seed, "snr_db": snr})
    logger.debug("Added noise sigma=%.3g, SNR %.2f dB", sigma, snr)
    return noisy, snr
