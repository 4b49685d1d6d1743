"""Integration test: forward/adjoint consistency of the wave and measurement operators."""

import numpy as np
import pytest

from src.common.models import Grid
from src.recon.operator import MeasurementOperator
from src.sensing.patterns import make_rsp_pattern, make_shd_pattern
from src.wavecore.solver import KSpaceSolver


# ── Helpers ───────────────────────────────────────────────────────


def _make_grid(dims, heterogeneous, nt=20, pml=10, seed=0):
    h = 1e-4
    c = 1500.0
    if heterogeneous:
        rng = np.random.default_rng(seed)
        c = 1500.0 + 75.0 * rng.random(dims)
    return Grid.from_cfl(dims, (h, h, h), nt, sound_speed=c, cfl=0.3, pml_thickness=pml)


def _relative_dot_error(forward, adjoint, x_shape, y_shape, seed):
    rng = np.random.default_rng(seed)
    x = rng.standard_normal(x_shape)
    y = rng.standard_normal(y_shape)
    ax = forward(x)
    lhs = float(np.vdot(ax, y))
    rhs = float(np.vdot(x, adjoint(y)))
    return abs(lhs - rhs) / (np.linalg.norm(ax) * np.linalg.norm(y))


# ── Wave operator ─────────────────────────────────────────────────


@pytest.mark.parametrize("dims", [(16, 16, 16), (24, 24, 24), (32, 24, 24)])
@pytest.mark.parametrize("heterogeneous", [False, True])
def test_dot_product_identity(dims, heterogeneous):
    solver = KSpaceSolver(_make_grid(dims, heterogeneous))
    err = _relative_dot_error(
        solver.forward_array, solver.adjoint_array,
        dims, solver.grid.plane_dims + (solver.grid.nt,), seed=sum(dims),
    )
    assert err <= 1e-10


def test_adjoint_matches_dense_probing():
    grid = _make_grid((8, 8, 8), heterogeneous=False, nt=6, pml=4)
    solver = KSpaceSolver(grid)
    columns = []
    for v in range(grid.n_voxels):
        e = np.zeros(grid.n_voxels)
        e[v] = 1.0
        columns.append(solver.forward_array(e.reshape(grid.dims)).ravel())
    dense = np.stack(columns, axis=1)

    rng = np.random.default_rng(1)
    for row in rng.choice(dense.shape[0], size=6, replace=False):
        impulse = np.zeros(dense.shape[0])
        impulse[row] = 1.0
        back = solver.adjoint_array(impulse.reshape(grid.plane_dims + (grid.nt,)))
        np.testing.assert_allclose(back.ravel(), dense[row], atol=1e-12 * np.abs(dense).max())


def test_swap_symmetry():
    grid = _make_grid((16, 16, 16), heterogeneous=False, nt=30)
    q = np.random.default_rng(2).random((16, 16, 16))
    p0 = q + q.transpose(0, 2, 1)
    record = KSpaceSolver(grid).forward_array(p0)
    np.testing.assert_allclose(record, record.transpose(1, 0, 2), atol=1e-12 * np.abs(record).max())


def test_time_reversal_is_linear():
    solver = KSpaceSolver(_make_grid((16, 16, 16), heterogeneous=False))
    y = np.random.default_rng(3).standard_normal((16, 16, solver.grid.nt))
    np.testing.assert_allclose(
        solver.time_reverse_array(2.0 * y), 2.0 * solver.time_reverse_array(y), rtol=1e-12, atol=1e-14,
    )


# ── Measurement operator ──────────────────────────────────────────


@pytest.mark.parametrize("make_pattern", [
    lambda plane: make_rsp_pattern(plane, 40, seed=4),
    lambda plane: make_shd_pattern(plane, 32, seed=5),
])
def test_measurement_operator_dot_product(make_pattern):
    grid = _make_grid((16, 16, 16), heterogeneous=False)
    op = MeasurementOperator(grid, make_pattern(grid.plane_dims))
    err = _relative_dot_error(op.forward, op.adjoint, op.image_shape, op.data_shape, seed=6)
    assert err <= 1e-10
