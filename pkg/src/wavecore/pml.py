"""Perfectly matched layer attenuation profiles."""

import numpy as np


def pml_profile(
    n: int,
    spacing: float,
    dt: float,
    c_ref: float,
    thickness: int,
    alpha: float,
    staggered: bool = False,
) -> np.ndarray:
    """Per-half-step multiplicative damping along one padded axis.

    The absorption grows with the fourth power of the distance into the layer
    and is applied on both ends; interior entries are exactly 1.
    """
    profile = np.ones(n)
    if thickness == 0 or alpha == 0:
        return profile
    x = np.arange(1, thickness + 1, dtype=np.float64)
    if staggered:
        x = x + 0.5
    left = alpha * (c_ref / spacing) * ((x - thickness - 1) / (0 - thickness)) ** 4
    right = alpha * (c_ref / spacing) * (x / thickness) ** 4
    profile[:thickness] = np.exp(-left * dt / 2.0)
    profile[n - thickness:] = np.exp(-right * dt / 2.0)
    return profile


def axis_view(profile: np.ndarray, axis: int) -> np.ndarray:
    """Reshape a 1D profile to broadcast along one axis of a 3D array."""
    shape = [1, 1, 1]
    shape[axis] = profile.size
    return profile.reshape(shape)
