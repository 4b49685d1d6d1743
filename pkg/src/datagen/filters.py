"""Spectral filters for band-limiting phantoms and measured traces."""

import logging

import numpy as np
import scipy.fft

from src.common import runtime
from src.common.errors import ValidationError
from src.common.models import Field, Grid
from src.wavecore.grid import check_conforms

logger = logging.getLogger(__name__)

ROLLOFF_START = 0.9


def presmooth_cutoff(grid: Grid) -> float:
    """Highest frequency the grid supports: c / (2 * max spacing), in Hz."""
    return grid.c_max / (2.0 * max(grid.spacing))


def raised_cosine(x: np.ndarray, start: float, stop: float) -> np.ndarray:
    """1 below start, 0 at and above stop, cosine taper in between."""
    w = np.ones_like(x)
    taper = (x > start) & (x < stop)
    w[taper] = 0.5 * (1.0 + np.cos(np.pi * (x[taper] - start) / (stop - start)))
    w[x >= stop] = 0.0
    return w


def presmooth(
    p0: Field, grid: Grid, rolloff_start: float = ROLLOFF_START, clamp: bool = True,
) -> Field:
    """Low-pass p0 so the data it induces stays inside the grid-supported band.

    The window is radial in wavenumber normalized to the per-axis Nyquist
    limit, flat up to rolloff_start and zero from the Nyquist limit on.
    """
    check_conforms(p0.values, grid.dims, "initial pressure")
    if not 0 < rolloff_start < 1:
        raise ValidationError(f"rolloff_start must be in (0, 1), got {rolloff_start}")
    radius2 = 0.0
    for axis, (n, h) in enumerate(zip(grid.dims, grid.spacing)):
        k = 2 * np.pi * scipy.fft.fftfreq(n, d=h)
        shape = [1, 1, 1]
        shape[axis] = n
        radius2 = radius2 + ((k * h / np.pi) ** 2).reshape(shape)
    window = raised_cosine(np.sqrt(radius2), rolloff_start, 1.0)
    workers = runtime.fft_workers()
    values = scipy.fft.ifftn(scipy.fft.fftn(p0.values, workers=workers) * window, workers=workers).real
    if clamp:
        values = np.maximum(values, 0.0)
    provenance = dict(p0.provenance)
    provenance.update({"presmooth_cutoff_hz": presmooth_cutoff(grid), "presmooth_rolloff": rolloff_start})
    return Field(values=values, spacing=grid.spacing, provenance=provenance)


def bandpass_filter(
    data: np.ndarray, f_lo: float, f_hi: float, dt: float, taper_hz: float = 0.0,
) -> np.ndarray:
    """Zero-phase band-pass along the last (time) axis.

    Applies a real, symmetric spectral window, so traces get no group delay.
    An optional cosine taper of width taper_hz softens both band edges.
    """
    nyquist = 1.0 / (2.0 * dt)
    if not (dt > 0 and 0 <= f_lo < f_hi <= nyquist):
        raise ValidationError(
            f"invalid band [{f_lo}, {f_hi}] Hz for dt={dt} (Nyquist {nyquist} Hz)"
        )
    if taper_hz < 0:
        raise ValidationError(f"taper_hz must be >= 0, got {taper_hz}")
    data = np.asarray(data, dtype=np.float64)
    nt = data.shape[-1]
    freqs = scipy.fft.rfftfreq(nt, d=dt)
    if taper_hz == 0:
        window = ((freqs >= f_lo) & (freqs <= f_hi)).astype(np.float64)
    else:
        high = raised_cosine(freqs, f_hi, f_hi + taper_hz)
        low = 1.0 - raised_cosine(freqs, max(f_lo - taper_hz, 0.0), f_lo) if f_lo > 0 else 1.0
        window = high * low
    spectrum = scipy.fft.rfft(data, axis=-1, workers=runtime.fft_workers())
    return scipy.fft.irfft(spectrum * window, n=nt, axis=-1, workers=runtime.fft_workers())
