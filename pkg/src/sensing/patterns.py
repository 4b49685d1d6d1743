"""Sub-sampling pattern generation and validation.

Plane locations are addressed by the linear index s = iy + Ny * iz.
"""

import logging
from typing import List, Tuple

import numpy as np

from src.common.errors import ValidationError, raise_on_errors
from src.common.models import (
    BIPOLAR,
    CONVENTIONAL,
    HADAMARD_MODES,
    PATTERN_KINDS,
    POINT_KINDS,
    RANDOM_SINGLE_POINT,
    REGULAR_SINGLE_POINT,
    SCRAMBLED_HADAMARD,
    SensingPattern,
)
from src.sensing.hadamard import is_power_of_two

logger = logging.getLogger(__name__)


def _n_locations(plane_dims: Tuple[int, int]) -> int:
    ny, nz = plane_dims
    if ny < 1 or nz < 1:
        raise ValidationError(f"plane dims must be positive, got {tuple(plane_dims)}")
    return ny * nz


def make_conventional_pattern(plane_dims: Tuple[int, int]) -> SensingPattern:
    m = _n_locations(plane_dims)
    return SensingPattern(
        kind=CONVENTIONAL, plane_dims=plane_dims, m_c=m, selection=np.arange(m),
    )


def make_rsp_pattern(plane_dims: Tuple[int, int], m_c: int, seed: int) -> SensingPattern:
    """m_c distinct locations drawn uniformly without replacement."""
    m = _n_locations(plane_dims)
    if not 1 <= m_c <= m:
        raise ValidationError(f"m_c must be in [1, {m}], got {m_c}")
    rng = np.random.default_rng(seed)
    selection = rng.choice(m, size=m_c, replace=False)
    return SensingPattern(
        kind=RANDOM_SINGLE_POINT, plane_dims=plane_dims, m_c=m_c, seed=seed, selection=selection,
    )


def make_gsp_pattern(plane_dims: Tuple[int, int], stride: int) -> SensingPattern:
    """Every stride-th location in y and z, anchored at index 0."""
    ny, nz = plane_dims
    _n_locations(plane_dims)
    if stride < 1 or ny % stride or nz % stride:
        raise ValidationError(f"stride {stride} does not divide plane dims {tuple(plane_dims)}")
    iy, iz = np.meshgrid(np.arange(0, ny, stride), np.arange(0, nz, stride), indexing="ij")
    selection = np.sort((iy + ny * iz).ravel())
    return SensingPattern(
        kind=REGULAR_SINGLE_POINT, plane_dims=plane_dims, m_c=selection.size,
        stride=stride, selection=selection,
    )


def make_shd_pattern(
    plane_dims: Tuple[int, int], m_c: int, seed: int, mode: str = BIPOLAR,
) -> SensingPattern:
    """Scrambled Hadamard rows: a seeded column permutation plus a row subset.

    The all-ones row 0 only appears when every row is kept; its measurement
    is the plane sum, which demeaning removes.
    """
    m = _n_locations(plane_dims)
    if not is_power_of_two(m):
        raise ValidationError(f"sHd needs a power-of-two number of locations, got {m}")
    if mode not in HADAMARD_MODES:
        raise ValidationError(f"mode must be one of {sorted(HADAMARD_MODES)}, got {mode!r}")
    if not 1 <= m_c <= m:
        raise ValidationError(f"m_c must be in [1, {m}], got {m_c}")
    rng = np.random.default_rng(seed)
    permutation = rng.permutation(m)
    if m_c == m:
        rows = np.arange(m)
    else:
        rows = np.sort(rng.choice(np.arange(1, m), size=m_c, replace=False))
    return SensingPattern(
        kind=SCRAMBLED_HADAMARD, plane_dims=plane_dims, m_c=m_c, seed=seed, mode=mode,
        permutation=permutation, rows=rows,
    )


def partition_patterns(
    plane_dims: Tuple[int, int], m_sub: int, seed: int,
) -> List[SensingPattern]:
    """Split all locations into m_sub disjoint random patterns of equal size."""
    m = _n_locations(plane_dims)
    if m_sub < 1 or m % m_sub:
        raise ValidationError(f"m_sub {m_sub} does not divide {m} locations")
    rng = np.random.default_rng(seed)
    order = rng.permutation(m)
    size = m // m_sub
    patterns = []
    for frame in range(m_sub):
        patterns.append(SensingPattern(
            kind=RANDOM_SINGLE_POINT, plane_dims=plane_dims, m_c=size, seed=seed,
            selection=order[frame * size:(frame + 1) * size], frame=frame,
        ))
    logger.debug("Partitioned %d locations into %d patterns of %d", m, m_sub, size)
    return patterns


def pattern_mask(pattern: SensingPattern) -> np.ndarray:
    """Boolean (Ny, Nz) mask of scanned locations; all True for sHd."""
    ny, nz = pattern.plane_dims
    if pattern.kind == SCRAMBLED_HADAMARD:
        return np.ones((ny, nz), dtype=bool)
    flat = np.zeros(ny * nz, dtype=bool)
    flat[pattern.selection] = True
    return flat.reshape((ny, nz), order="F")


def validate_pattern(pattern: SensingPattern) -> List[str]:
    """Validate a pattern. Returns list of errors (empty = valid)."""
    if pattern.kind not in PATTERN_KINDS:
        return [f"unknown pattern kind {pattern.kind!r}"]
    if len(pattern.plane_dims) != 2 or min(pattern.plane_dims) < 1:
        return [f"invalid plane dims {pattern.plane_dims}"]
    m = pattern.n_locations
    if not 1 <= pattern.m_c <= m:
        return [f"m_c must be in [1, {m}], got {pattern.m_c}"]

    if pattern.kind in POINT_KINDS:
        sel = pattern.selection
        if sel is None or sel.ndim != 1 or sel.size != pattern.m_c:
            return [f"{pattern.kind} pattern needs {pattern.m_c} selected indices"]
        if sel.size and (sel.min() < 0 or sel.max() >= m):
            return ["selection indices out of range"]
        if np.unique(sel).size != sel.size:
            return ["selection indices are not distinct"]
        return []

    if not is_power_of_two(m):
        return [f"sHd needs a power-of-two number of locations, got {m}"]
    if pattern.mode not in HADAMARD_MODES:
        return [f"sHd mode must be one of {sorted(HADAMARD_MODES)}"]
    perm = pattern.permutation
    if perm is None or perm.size != m or not np.array_equal(np.sort(perm), np.arange(m)):
        return ["sHd permutation must be a permutation of all locations"]
    rows = pattern.rows
    if rows is None or rows.size != pattern.m_c:
        return [f"sHd pattern needs {pattern.m_c} rows"]
    if rows.min() < 0 or rows.max() >= m or np.unique(rows).size != rows.size:
        return ["sHd rows must be distinct and in range"]
    return []


def build_pattern(
    kind: str,
    plane_dims: Tuple[int, int],
    m_c: int = None,
    stride: int = None,
    seed: int = 0,
    mode: str = BIPOLAR,
) -> SensingPattern:
    """Construct any pattern kind from flat parameters."""
    if kind == CONVENTIONAL:
        return make_conventional_pattern(plane_dims)
    if kind == REGULAR_SINGLE_POINT:
        if stride is None:
            raise ValidationError("gSP pattern needs a stride")
        return make_gsp_pattern(plane_dims, stride)
    if m_c is None:
        raise ValidationError(f"{kind} pattern needs m_c")
    if kind == RANDOM_SINGLE_POINT:
        return make_rsp_pattern(plane_dims, m_c, seed)
    if kind == SCRAMBLED_HADAMARD:
        return make_shd_pattern(plane_dims, m_c, seed, mode)
    raise ValidationError(f"unknown pattern kind {kind!r}")


def require_valid(pattern: SensingPattern) -> None:
    raise_on_errors(validate_pattern(pattern))

