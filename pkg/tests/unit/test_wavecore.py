"""Unit tests for src/wavecore: grid checks, PML profiles and the k-space solver."""

import math

import numpy as np
import pytest

from src.common.errors import ValidationError
from src.common.models import Field, Grid, PlaneSeries
from src.wavecore import operators
from src.wavecore.grid import check_conforms, nyquist_limits, validate_grid
from src.wavecore.pml import pml_profile
from src.wavecore.solver import KSpaceSolver


def _make_grid(dims=(8, 8, 8), nt=12, sound_speed=1500.0, pml=4, h=1e-4):
    return Grid.from_cfl(dims, (h, h, h), nt, sound_speed=sound_speed, cfl=0.3, pml_thickness=pml)


def _dot_test(solver, rng):
    x = rng.standard_normal(solver.grid.dims)
    y = rng.standard_normal(solver.grid.plane_dims + (solver.grid.nt,))
    lhs = float(np.vdot(solver.forward_array(x), y))
    rhs = float(np.vdot(x, solver.adjoint_array(y)))
    return abs(lhs - rhs) / max(abs(lhs), abs(rhs))


class TestValidateGrid:
    def test_valid(self):
        assert validate_grid(_make_grid()) == []

    def test_dim_too_small(self):
        grid = Grid(dims=(4, 8, 8), spacing=(1e-4,) * 3, dt=1e-8, nt=5)
        assert "below the minimum" in validate_grid(grid)[0]

    def test_cfl_violation(self):
        grid = _make_grid()
        grid.dt *= 1.01
        errors = validate_grid(grid)
        assert len(errors) == 1
        assert "stability bound" in errors[0]

    def test_heterogeneous_cfl_uses_max_speed(self):
        c = np.full((8, 8, 8), 1500.0)
        grid = Grid(dims=(8, 8, 8), spacing=(1e-4,) * 3, dt=0.3 * 1e-4 / 1500.0, nt=5)
        c[4, 4, 4] = 1600.0
        grid = grid.with_sound_speed(c)
        assert "stability bound" in validate_grid(grid)[0]

    def test_non_positive_sound_speed(self):
        c = np.full((8, 8, 8), 1500.0)
        c[0, 0, 0] = 0.0
        grid = Grid(dims=(8, 8, 8), spacing=(1e-4,) * 3, dt=1e-9, nt=5, sound_speed=c)
        assert "strictly positive" in validate_grid(grid)[0]

    def test_wrong_sound_speed_shape(self):
        grid = Grid(dims=(8, 8, 8), spacing=(1e-4,) * 3, dt=1e-9, nt=5, sound_speed=np.ones((8, 8, 9)))
        assert "sound speed field has shape" in validate_grid(grid)[0]

    def test_get_solver_rejects_invalid_grid(self):
        grid = _make_grid()
        grid.nt = 0
        with pytest.raises(ValidationError):
            operators.get_solver(grid)


class TestCheckConforms:
    def test_shape_mismatch(self):
        with pytest.raises(ValidationError, match="expected"):
            check_conforms(np.zeros((2, 2)), (2, 3), "thing")

    def test_non_finite(self):
        with pytest.raises(ValidationError, match="non-finite"):
            check_conforms(np.array([1.0, np.nan]), (2,), "thing")


class TestNyquist:
    def test_breast_imaging_settings(self):
        dr, dt = nyquist_limits(1500.0, 4.8e6)
        assert math.isclose(dr, 156.25e-6, rel_tol=1e-12)
        assert math.isclose(dt, 1.0 / 9.6e6, rel_tol=1e-12)

    def test_high_frequency_scanner(self):
        dr, _ = nyquist_limits(1540.0, 20e6)
        assert math.isclose(dr, 38.5e-6, rel_tol=1e-12)

    def test_invalid(self):
        with pytest.raises(ValidationError):
            nyquist_limits(0.0, 1e6)


class TestPmlProfile:
    def test_interior_untouched_and_edges_damped(self):
        profile = pml_profile(30, 1e-4, 2e-8, 1500.0, thickness=5, alpha=2.0)
        np.testing.assert_array_equal(profile[5:25], 1.0)
        assert np.all(profile[:5] < 1.0)
        assert np.all(profile[25:] < 1.0)
        assert profile[0] < profile[4]
        assert profile[-1] < profile[-5]

    def test_zero_alpha_is_identity(self):
        np.testing.assert_array_equal(pml_profile(20, 1e-4, 2e-8, 1500.0, 5, 0.0), 1.0)


class TestKSpaceSolver:
    def test_zero_in_zero_out(self):
        solver = KSpaceSolver(_make_grid())
        record = solver.forward_array(np.zeros((8, 8, 8)))
        assert record.shape == (8, 8, 12)
        assert not record.any()

    def test_first_sample_is_plane_of_p0(self):
        rng = np.random.default_rng(1)
        p0 = rng.random((8, 8, 8))
        record = KSpaceSolver(_make_grid()).forward_array(p0)
        np.testing.assert_allclose(record[..., 0], p0[0], rtol=1e-12)

    def test_linearity(self):
        rng = np.random.default_rng(2)
        solver = KSpaceSolver(_make_grid())
        a, b = rng.standard_normal((2, 8, 8, 8))
        np.testing.assert_allclose(
            solver.forward_array(2.0 * a - b),
            2.0 * solver.forward_array(a) - solver.forward_array(b),
            atol=1e-12,
        )

    def test_adjoint_homogeneous(self):
        solver = KSpaceSolver(_make_grid(dims=(10, 8, 8), nt=15))
        assert _dot_test(solver, np.random.default_rng(3)) <= 1e-10

    def test_adjoint_heterogeneous(self):
        rng = np.random.default_rng(4)
        c = 1500.0 + 60.0 * rng.random((8, 8, 8))
        solver = KSpaceSolver(_make_grid(nt=15, sound_speed=c))
        assert _dot_test(solver, rng) <= 1e-10

    def test_time_reversal_of_zero_record(self):
        solver = KSpaceSolver(_make_grid())
        assert not solver.time_reverse_array(np.zeros((8, 8, 12))).any()

    def test_time_reversal_recovers_plane_values(self):
        rng = np.random.default_rng(5)
        solver = KSpaceSolver(_make_grid())
        y = rng.standard_normal((8, 8, 12))
        image = solver.time_reverse_array(y)
        np.testing.assert_allclose(image[0], y[..., 0], rtol=1e-10, atol=1e-12)


class TestOperators:
    def test_solver_reused_for_equal_grids(self):
        assert operators.get_solver(_make_grid()) is operators.get_solver(_make_grid())

    def test_forward_returns_plane_series(self):
        grid = _make_grid()
        series = operators.forward(Field(values=np.ones((8, 8, 8)), spacing=grid.spacing), grid)
        assert isinstance(series, PlaneSeries)
        assert series.values.shape == (8, 8, 12)
        assert series.dt == grid.dt

    def test_adjoint_and_time_reverse_return_fields(self):
        grid = _make_grid()
        series = PlaneSeries(values=np.ones((8, 8, 12)), dt=grid.dt)
        assert operators.adjoint(series, grid).dims == (8, 8, 8)
        assert operators.time_reverse(series, grid).dims == (8, 8, 8)

    def test_forward_rejects_wrong_shape(self):
        grid = _make_grid()
        with pytest.raises(ValidationError):
            operators.forward(Field(values=np.ones((8, 8, 9))), grid)
