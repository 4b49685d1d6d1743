"""Sensing operator C and its transpose.

Point kinds extract traces. sHd applies the selected rows of the column-
scrambled Hadamard matrix H[:, perm] to the plane at every time step through
fwht, never densely. Binary mode models {0, 1} patterns followed by
demeaning: the binary row (h + 1) / 2 minus its weight times the plane mean,
where the weight is the number of ones in the row. Algebraically that is
h / 2 for every row but the all-ones row, which demeans to zero.
"""

import logging

import numpy as np

from src.common.errors import ValidationError
from src.common.models import BINARY, SCRAMBLED_HADAMARD, PlaneSeries, SensingPattern, SensorData
from src.sensing.hadamard import fwht
from src.sensing.patterns import require_valid

logger = logging.getLogger(__name__)

MAX_DENSE_LOCATIONS = 4096


def _to_rows(values: np.ndarray) -> np.ndarray:
    ny, nz, nt = values.shape
    return values.reshape((ny * nz, nt), order="F")


def _to_plane(rows: np.ndarray, plane_dims) -> np.ndarray:
    ny, nz = plane_dims
    return rows.reshape((ny, nz, rows.shape[1]), order="F")


def _binary_row_coefficients(pattern: SensingPattern) -> np.ndarray:
    """Per-row multiplier on the plane sum after demeaning binary rows.

    raw_r = (H_r x + sum x) / 2 and weight_r = (M + rowsum_r) / 2, so
    raw_r - weight_r * mean(x) = H_r x / 2 + (1/2 - weight_r / M) * sum x.
    """
    m = pattern.n_locations
    rowsum = np.where(pattern.rows == 0, m, 0)
    weights = 0.5 * (m + rowsum)
    return 0.5 - weights / m


def apply_array(pattern: SensingPattern, plane_rows: np.ndarray) -> np.ndarray:
    """Apply C to (M, nt) plane traces; returns (m_c, nt)."""
    if pattern.kind != SCRAMBLED_HADAMARD:
        return plane_rows[pattern.selection]
    scrambled = np.empty_like(plane_rows)
    scrambled[pattern.permutation] = plane_rows
    out = fwht(scrambled)[pattern.rows]
    if pattern.mode == BINARY:
        coef = _binary_row_coefficients(pattern)
        out = 0.5 * out + coef[:, None] * plane_rows.sum(axis=0)[None, :]
    return out


def adjoint_array(pattern: SensingPattern, data: np.ndarray) -> np.ndarray:
    """Exact transpose of apply_array; returns (M, nt)."""
    m = pattern.n_locations
    out = np.zeros((m, data.shape[1]))
    if pattern.kind != SCRAMBLED_HADAMARD:
        out[pattern.selection] = data
        return out
    out[pattern.rows] = data
    out = fwht(out)[pattern.permutation]
    if pattern.mode == BINARY:
        coef = _binary_row_coefficients(pattern)
        out = 0.5 * out + (coef[:, None] * data).sum(axis=0)[None, :]
    return out


def apply_plane(pattern: SensingPattern, values: np.ndarray) -> np.ndarray:
    """Apply C to a (Ny, Nz, nt) plane record."""
    return apply_array(pattern, _to_rows(values))


def adjoint_plane(pattern: SensingPattern, data: np.ndarray) -> np.ndarray:
    """Apply C^T to (m_c, nt) measurements; returns (Ny, Nz, nt)."""
    return _to_plane(adjoint_array(pattern, data), pattern.plane_dims)


def apply_sensing(pattern: SensingPattern, series: PlaneSeries) -> SensorData:
    require_valid(pattern)
    if series.plane_dims != pattern.plane_dims:
        raise ValidationError(
            f"plane series dims {series.plane_dims} do not match pattern {pattern.plane_dims}"
        )
    values = apply_plane(pattern, series.values)
    return SensorData(
        values=values, pattern=pattern, dt=series.dt, provenance=dict(series.provenance),
    )


def adjoint_sensing(pattern: SensingPattern, data: SensorData) -> PlaneSeries:
    require_valid(pattern)
    if data.values.ndim != 2 or data.values.shape[0] != pattern.m_c:
        raise ValidationError(
            f"sensor data has shape {data.values.shape}, pattern expects {pattern.m_c} rows"
        )
    return PlaneSeries(values=adjoint_plane(pattern, data.values), dt=data.dt)


def dense_matrix(pattern: SensingPattern) -> np.ndarray:
    """Explicit (m_c, M) matrix of C for verification on small planes."""
    from scipy.linalg import hadamard

    require_valid(pattern)
    m = pattern.n_locations
    if m > MAX_DENSE_LOCATIONS:
        raise ValidationError(f"refusing a dense sensing matrix for {m} > {MAX_DENSE_LOCATIONS} locations")
    if pattern.kind != SCRAMBLED_HADAMARD:
        return np.eye(m)[pattern.selection]
    scrambled = hadamard(m).astype(np.float64)[:, pattern.permutation][pattern.rows]
    if pattern.mode == BINARY:
        weights = (scrambled > 0).sum(axis=1).astype(np.float64)
        return (scrambled + 1.0) / 2.0 - weights[:, None] / m
    return scrambled
