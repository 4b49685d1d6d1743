"""Unit tests for src/sensing: Hadamard transform, patterns and the sensing operator."""

import numpy as np
import pytest
from scipy.linalg import hadamard

from src.common.errors import ValidationError
from src.common.models import BINARY, BIPOLAR, PlaneSeries, SensingPattern, SensorData
from src.sensing.hadamard import fwht, is_power_of_two
from src.sensing.operators import (
    adjoint_array,
    adjoint_sensing,
    apply_array,
    apply_plane,
    apply_sensing,
    dense_matrix,
)
from src.sensing.patterns import (
    build_pattern,
    make_conventional_pattern,
    make_gsp_pattern,
    make_rsp_pattern,
    make_shd_pattern,
    partition_patterns,
    pattern_mask,
    validate_pattern,
)


def _all_kinds(plane_dims=(8, 8)):
    m = plane_dims[0] * plane_dims[1]
    return [
        make_conventional_pattern(plane_dims),
        make_rsp_pattern(plane_dims, m // 4, seed=1),
        make_gsp_pattern(plane_dims, 2),
        make_shd_pattern(plane_dims, m // 4, seed=2, mode=BIPOLAR),
        make_shd_pattern(plane_dims, m // 4, seed=2, mode=BINARY),
        make_shd_pattern(plane_dims, m, seed=3, mode=BINARY),
    ]


class TestFwht:
    def test_power_of_two(self):
        assert [n for n in range(1, 20) if is_power_of_two(n)] == [1, 2, 4, 8, 16]
        assert not is_power_of_two(0)

    def test_matches_sylvester_matrix(self):
        rng = np.random.default_rng(0)
        v = rng.standard_normal((32, 5))
        np.testing.assert_allclose(fwht(v), hadamard(32) @ v, atol=1e-12)

    def test_involution_up_to_scale(self):
        v = np.random.default_rng(1).standard_normal(64)
        np.testing.assert_allclose(fwht(fwht(v)), 64 * v, atol=1e-11)

    def test_does_not_modify_input(self):
        v = np.arange(8, dtype=np.float64)
        fwht(v)
        np.testing.assert_array_equal(v, np.arange(8))

    def test_rejects_other_lengths(self):
        with pytest.raises(ValidationError):
            fwht(np.ones(12))


class TestPatterns:
    def test_conventional(self):
        p = make_conventional_pattern((4, 8))
        assert p.m_c == 32
        np.testing.assert_array_equal(p.selection, np.arange(32))

    def test_rsp_distinct_and_seeded(self):
        a = make_rsp_pattern((8, 8), 16, seed=5)
        b = make_rsp_pattern((8, 8), 16, seed=5)
        assert np.unique(a.selection).size == 16
        np.testing.assert_array_equal(a.selection, b.selection)
        assert not np.array_equal(a.selection, make_rsp_pattern((8, 8), 16, seed=6).selection)

    def test_gsp_grid_indices(self):
        p = make_gsp_pattern((4, 4), 2)
        # (y, z) in {0, 2}^2 with s = y + 4 z
        np.testing.assert_array_equal(p.selection, [0, 2, 8, 10])
        assert p.stride == 2

    def test_gsp_stride_must_divide(self):
        with pytest.raises(ValidationError):
            make_gsp_pattern((6, 6), 4)

    def test_shd_excludes_constant_row_when_subsampled(self):
        p = make_shd_pattern((8, 8), 16, seed=0)
        assert p.rows.size == 16
        assert 0 not in p.rows
        assert np.array_equal(np.sort(p.permutation), np.arange(64))

    def test_shd_full_keeps_every_row(self):
        p = make_shd_pattern((4, 4), 16, seed=0)
        np.testing.assert_array_equal(p.rows, np.arange(16))

    def test_shd_needs_power_of_two(self):
        with pytest.raises(ValidationError, match="power-of-two"):
            make_shd_pattern((6, 6), 4, seed=0)

    def test_m_c_out_of_range(self):
        with pytest.raises(ValidationError):
            make_rsp_pattern((4, 4), 17, seed=0)
        with pytest.raises(ValidationError):
            make_shd_pattern((4, 4), 0, seed=0)

    def test_partition_is_disjoint_cover(self):
        parts = partition_patterns((8, 8), 4, seed=9)
        assert [p.frame for p in parts] == [0, 1, 2, 3]
        joined = np.concatenate([p.selection for p in parts])
        np.testing.assert_array_equal(np.sort(joined), np.arange(64))

    def test_partition_needs_divisor(self):
        with pytest.raises(ValidationError):
            partition_patterns((3, 3), 2, seed=0)

    def test_mask(self):
        p = SensingPattern(kind="rSP", plane_dims=(4, 2), m_c=2, selection=[1, 6])
        mask = pattern_mask(p)
        assert mask.shape == (4, 2)
        assert mask[1, 0] and mask[2, 1]
        assert mask.sum() == 2
        assert pattern_mask(make_shd_pattern((4, 4), 4, seed=0)).all()

    def test_build_pattern_dispatch(self):
        assert build_pattern("gSP", (8, 8), stride=4).m_c == 4
        assert build_pattern("rSP", (8, 8), m_c=8, seed=1).kind == "rSP"
        assert build_pattern("sHd", (8, 8), m_c=8, seed=1, mode=BINARY).mode == BINARY
        with pytest.raises(ValidationError):
            build_pattern("gSP", (8, 8))
        with pytest.raises(ValidationError):
            build_pattern("rSP", (8, 8))


class TestValidatePattern:
    def test_generated_patterns_are_valid(self):
        for p in _all_kinds():
            assert validate_pattern(p) == []

    def test_duplicate_selection(self):
        p = SensingPattern(kind="rSP", plane_dims=(4, 4), m_c=2, selection=[3, 3])
        assert validate_pattern(p) == ["selection indices are not distinct"]

    def test_selection_size_mismatch(self):
        p = SensingPattern(kind="rSP", plane_dims=(4, 4), m_c=3, selection=[1, 2])
        assert "needs 3 selected indices" in validate_pattern(p)[0]

    def test_bad_permutation(self):
        p = make_shd_pattern((4, 4), 4, seed=0)
        p.permutation = np.zeros(16, dtype=np.int64)
        assert "permutation" in validate_pattern(p)[0]

    def test_unknown_kind(self):
        p = SensingPattern(kind="spiral", plane_dims=(4, 4), m_c=1)
        assert "unknown pattern kind" in validate_pattern(p)[0]


class TestSensingOperator:
    def test_transpose_identity_for_every_kind(self):
        rng = np.random.default_rng(0)
        for p in _all_kinds():
            x = rng.standard_normal((64, 7))
            y = rng.standard_normal((p.m_c, 7))
            lhs = np.vdot(apply_array(p, x), y)
            rhs = np.vdot(x, adjoint_array(p, y))
            assert abs(lhs - rhs) <= 1e-12 * max(1.0, abs(lhs)), p.kind

    def test_fast_path_matches_dense(self):
        rng = np.random.default_rng(1)
        for p in _all_kinds():
            c = dense_matrix(p)
            x = rng.standard_normal((64, 3))
            y = rng.standard_normal((p.m_c, 3))
            np.testing.assert_allclose(apply_array(p, x), c @ x, atol=1e-12)
            np.testing.assert_allclose(adjoint_array(p, y), c.T @ y, atol=1e-12)

    def test_full_bipolar_is_orthogonal(self):
        p = make_shd_pattern((16, 16), 256, seed=4, mode=BIPOLAR)
        c = dense_matrix(p)
        np.testing.assert_allclose(c @ c.T, 256 * np.eye(256), atol=1e-9)

    def test_subsampled_rows_orthogonal(self):
        p = make_shd_pattern((8, 8), 16, seed=4)
        c = dense_matrix(p)
        np.testing.assert_allclose(c @ c.T, 64 * np.eye(16), atol=1e-10)

    def test_binary_is_half_bipolar(self):
        bip = make_shd_pattern((8, 8), 16, seed=7, mode=BIPOLAR)
        bin_ = make_shd_pattern((8, 8), 16, seed=7, mode=BINARY)
        x = np.random.default_rng(2).standard_normal((64, 4))
        np.testing.assert_allclose(apply_array(bin_, x), 0.5 * apply_array(bip, x), atol=1e-12)

    def test_binary_constant_row_demeans_to_zero(self):
        p = make_shd_pattern((4, 4), 16, seed=0, mode=BINARY)
        out = apply_array(p, np.ones((16, 2)))
        np.testing.assert_allclose(out, 0.0, atol=1e-12)

    def test_point_extraction_uses_linear_index(self):
        values = np.zeros((4, 2, 1))
        values[1, 1, 0] = 5.0  # s = 1 + 4 * 1
        p = SensingPattern(kind="rSP", plane_dims=(4, 2), m_c=1, selection=[5])
        np.testing.assert_array_equal(apply_plane(p, values), [[5.0]])

    def test_dense_refused_for_large_planes(self):
        with pytest.raises(ValidationError):
            dense_matrix(make_conventional_pattern((128, 64)))

    def test_apply_sensing_checks_plane(self):
        series = PlaneSeries(values=np.zeros((4, 4, 3)), dt=1e-8)
        with pytest.raises(ValidationError):
            apply_sensing(make_conventional_pattern((8, 8)), series)

    def test_sensing_round_trip_types(self):
        p = make_rsp_pattern((4, 4), 4, seed=0)
        series = PlaneSeries(values=np.ones((4, 4, 3)), dt=2e-8, provenance={"grid": {}})
        data = apply_sensing(p, series)
        assert isinstance(data, SensorData)
        assert data.values.shape == (4, 3)
        assert data.dt == 2e-8
        assert data.provenance == {"grid": {}}
        back = adjoint_sensing(p, data)
        assert back.values.shape == (4, 4, 3)
        assert back.values.sum() == 12.0

    def test_adjoint_sensing_checks_rows(self):
        p = make_rsp_pattern((4, 4), 4, seed=0)
        data = SensorData(values=np.zeros((3, 2)), pattern=p, dt=1e-8)
        with pytest.raises(ValidationError):
            adjoint_sensing(p, data)
