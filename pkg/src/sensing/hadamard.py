"""Fast Walsh-Hadamard transform in Sylvester (natural) order."""

import numpy as np

from src.common.errors import ValidationError


def is_power_of_two(n: int) -> bool:
    return n >= 1 and (n & (n - 1)) == 0


def fwht(v: np.ndarray) -> np.ndarray:
    """Unnormalized Walsh-Hadamard transform along axis 0.

    Equals H @ v with H the Sylvester Hadamard matrix, so fwht(fwht(v)) = n * v.
    Trailing axes (e.g. time) are transformed independently.
    """
    v = np.asarray(v, dtype=np.float64)
    n = v.shape[0]
    if not is_power_of_two(n):
        raise ValidationError(f"fwht length must be a power of two, got {n}")
    out = v.copy()
    rest = out.shape[1:]
    h = 1
    while h < n:
        blocks = out.reshape((n // (2 * h), 2, h) + rest)
        top = blocks[:, 0].copy()
        bottom = blocks[:, 1]
        blocks[:, 0] += bottom
        blocks[:, 1] = top - bottom
        h *= 2
    return out
