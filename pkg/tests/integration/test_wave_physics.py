"""Integration test: solver traces against closed-form and larger-domain references."""

import math

import numpy as np
import pytest

from src.common.models import Grid
from src.wavecore.solver import KSpaceSolver

pytestmark = pytest.mark.slow

H = 1e-4
C0 = 1500.0


def _gaussian_blob(dims, center, sigma_vox):
    axes = [np.arange(n, dtype=np.float64) for n in dims]
    xx, yy, zz = np.meshgrid(*axes, indexing="ij")
    r2 = (xx - center[0]) ** 2 + (yy - center[1]) ** 2 + (zz - center[2]) ** 2
    return np.exp(-r2 / (2.0 * sigma_vox ** 2))


def _spherical_trace(r, t, sigma):
    """Pressure at distance r > 0 from a Gaussian initial pressure in free space.

    r * p solves the 1D wave equation, so the d'Alembert solution of the
    even extension gives p in closed form.
    """
    def g(s):
        return np.exp(-s ** 2 / (2.0 * sigma ** 2))

    a = r - C0 * t
    b = r + C0 * t
    return (a * g(a) + b * g(b)) / (2.0 * r)


def test_gaussian_blob_trace_matches_closed_form():
    dims = (48, 48, 48)
    depth = 16
    sigma_vox = 3.0
    dt = 0.3 * H / C0
    nt = int(math.ceil(2 * depth * H / (C0 * dt)))
    grid = Grid(dims=dims, spacing=(H, H, H), dt=dt, nt=nt, sound_speed=C0, pml_thickness=10)
    p0 = _gaussian_blob(dims, (depth, 24, 24), sigma_vox)

    trace = KSpaceSolver(grid).forward_array(p0)[24, 24]
    t = dt * np.arange(nt)
    expected = _spherical_trace(depth * H, t, sigma_vox * H)

    rel_l2 = np.linalg.norm(trace - expected) / np.linalg.norm(expected)
    assert rel_l2 <= 0.02
    arrival = depth * H / C0
    assert abs(t[np.argmax(trace)] - arrival) <= sigma_vox * H / C0


def test_lateral_boundary_reflection_is_small():
    sigma_vox = 2.0
    nt = 120
    dt = 0.3 * H / C0
    small = Grid(dims=(24, 32, 24), spacing=(H, H, H), dt=dt, nt=nt, sound_speed=C0)
    large = Grid(dims=(24, 96, 24), spacing=(H, H, H), dt=dt, nt=nt, sound_speed=C0)
    offset = 32

    near = KSpaceSolver(small).forward_array(_gaussian_blob(small.dims, (8, 8, 12), sigma_vox))
    far = KSpaceSolver(large).forward_array(_gaussian_blob(large.dims, (8, 8 + offset, 12), sigma_vox))
    reference = far[offset:offset + 32]

    incident_peak = np.abs(reference[0]).max()
    reflected = np.abs(near - reference).max()
    assert reflected <= 0.01 * incident_peak


def test_time_reversal_correlates_with_source():
    dims = (48, 48, 48)
    dt = 0.3 * H / C0
    grid = Grid(dims=dims, spacing=(H, H, H), dt=dt, nt=160, sound_speed=C0, pml_thickness=10)
    p0 = _gaussian_blob(dims, (12, 24, 24), 3.0)

    solver = KSpaceSolver(grid)
    image = solver.time_reverse_array(solver.forward_array(p0))

    ncc = np.corrcoef(image.ravel(), p0.ravel())[0, 1]
    assert ncc >= 0.8
