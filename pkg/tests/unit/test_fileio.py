"""Unit tests for src/cli_io/fileio.py."""

import json
import math

import numpy as np
import pytest

from src.cli_io.fileio import (
    grid_from_provenance,
    jsonable,
    read_field,
    read_pattern,
    read_sensor_data,
    read_series,
    write_field,
    write_json,
    write_pattern,
    write_sensor_data,
    write_series,
)
from src.common.errors import ValidationError
from src.common.models import Field, Grid, PlaneSeries, SensorData
from src.sensing.patterns import make_rsp_pattern, make_shd_pattern


def _make_field():
    values = np.arange(24, dtype=np.float64).reshape(2, 3, 4)
    return Field(values=values, spacing=(1e-4, 2e-4, 3e-4), provenance={"seed": 3})


class TestJsonable:
    def test_numpy_and_non_finite(self):
        out = jsonable({"a": np.float32(1.5), "b": np.arange(2), "c": math.inf, "d": (np.int64(4),)})
        assert out == {"a": 1.5, "b": [0, 1], "c": "inf", "d": [4]}
        assert jsonable(-math.inf) == "-inf"
        assert jsonable(math.nan) == "nan"


class TestField:
    def test_x_fastest_layout(self, tmp_path):
        field = _make_field()
        raw, meta = write_field(str(tmp_path / "p0"), field, "f64")
        flat = np.fromfile(raw, dtype="<f8")
        # first two values walk along x
        assert flat[:2].tolist() == [field.values[0, 0, 0], field.values[1, 0, 0]]
        sidecar = json.loads(open(meta).read())
        assert sidecar["kind"] == "field"
        assert sidecar["dims"] == [2, 3, 4]
        assert sidecar["dtype"] == "float64"
        assert sidecar["byteorder"] == "little"
        assert sidecar["order"] == "first-index-fastest"

    def test_read_back(self, tmp_path):
        field = _make_field()
        write_field(str(tmp_path / "p0"), field, "f32")
        back = read_field(str(tmp_path / "p0.json"))
        np.testing.assert_array_equal(back.values, field.values)
        assert back.spacing == field.spacing
        assert back.provenance == {"seed": 3}
        assert back.values.dtype == np.float64

    def test_wrong_kind(self, tmp_path):
        write_series(str(tmp_path / "s"), PlaneSeries(values=np.zeros((2, 2, 3)), dt=1e-8))
        with pytest.raises(ValidationError, match="expected 'field'"):
            read_field(str(tmp_path / "s"))

    def test_truncated_raw(self, tmp_path):
        raw, _ = write_field(str(tmp_path / "p0"), _make_field())
        with open(raw, "r+b") as f:
            f.truncate(8)
        with pytest.raises(ValidationError, match="holds 1 values"):
            read_field(str(tmp_path / "p0"))

    def test_bad_dtype(self, tmp_path):
        with pytest.raises(ValidationError):
            write_field(str(tmp_path / "p0"), _make_field(), "f16")

    def test_missing_file(self, tmp_path):
        with pytest.raises(OSError):
            read_field(str(tmp_path / "absent"))


class TestSeries:
    def test_plane_per_time_step(self, tmp_path):
        values = np.random.default_rng(0).standard_normal((3, 2, 5))
        raw, meta = write_series(str(tmp_path / "series"), PlaneSeries(values=values, dt=2e-8))
        flat = np.fromfile(raw, dtype="<f8")
        # first plane walks y, then z, at t = 0
        np.testing.assert_array_equal(flat[:6], values[:, :, 0].ravel(order="F"))
        assert json.loads(open(meta).read())["order"] == "first-index-fastest"
        back = read_series(meta)
        np.testing.assert_array_equal(back.values, values)
        assert back.dt == 2e-8

    def test_foreign_order_rejected(self, tmp_path):
        _, meta = write_series(str(tmp_path / "series"), PlaneSeries(values=np.zeros((2, 2, 3)), dt=1e-8))
        sidecar = json.loads(open(meta).read())
        sidecar["order"] = "time-fastest"
        with open(meta, "w") as f:
            json.dump(sidecar, f)
        with pytest.raises(ValidationError, match="unsupported order"):
            read_series(meta)


class TestSensorData:
    def test_round_trip_with_pattern(self, tmp_path):
        pattern = make_shd_pattern((4, 4), 4, seed=1)
        values = np.random.default_rng(1).standard_normal((4, 6))
        data = SensorData(values=values, pattern=pattern, dt=1e-8, noise_sigma=0.01, provenance={"grid": None})
        raw, meta, pattern_file = write_sensor_data(str(tmp_path / "y"), data, "f64")
        assert pattern_file == str(tmp_path / "y.pattern.json")
        assert json.loads(open(meta).read())["pattern"] == "y.pattern.json"
        np.testing.assert_array_equal(np.fromfile(raw, dtype="<f8")[:4], values[:, 0])
        assert json.loads(open(meta).read())["order"] == "first-index-fastest"
        back = read_sensor_data(str(tmp_path / "y"))
        np.testing.assert_array_equal(back.values, values)
        assert back.noise_sigma == 0.01
        np.testing.assert_array_equal(back.pattern.permutation, pattern.permutation)
        np.testing.assert_array_equal(back.pattern.rows, pattern.rows)

    def test_shared_pattern_file(self, tmp_path):
        pattern = make_rsp_pattern((4, 4), 4, seed=2)
        shared = write_pattern(str(tmp_path / "pattern.json"), pattern)
        (tmp_path / "frames").mkdir()
        data = SensorData(values=np.zeros((4, 2)), pattern=pattern, dt=1e-8)
        _, meta, pattern_file = write_sensor_data(str(tmp_path / "frames" / "f0"), data, pattern_file=shared)
        assert pattern_file == shared
        assert json.loads(open(meta).read())["pattern"] == "../pattern.json"
        back = read_sensor_data(str(tmp_path / "frames" / "f0.json"))
        np.testing.assert_array_equal(back.pattern.selection, pattern.selection)


class TestPatternFile:
    def test_records_scrambling(self, tmp_path):
        path = write_pattern(str(tmp_path / "p.json"), make_shd_pattern((4, 4), 4, seed=1))
        assert json.loads(open(path).read())["scrambling"] == "column-permutation"
        assert read_pattern(path).kind == "sHd"
        path = write_pattern(str(tmp_path / "q.json"), make_rsp_pattern((4, 4), 4, seed=1))
        assert "scrambling" not in json.loads(open(path).read())


class TestGridFromProvenance:
    def test_present(self):
        grid = Grid.from_cfl((8, 8, 8), (1e-4,) * 3, 10, pml_thickness=4)
        back = grid_from_provenance({"grid": grid.to_dict()})
        assert back.dims == grid.dims
        assert back.dt == grid.dt
        assert back.pml_thickness == 4

    def test_absent_or_heterogeneous(self):
        assert grid_from_provenance({}) is None
        assert grid_from_provenance({"grid": {"sound_speed": "field"}}) is None


class TestWriteJson:
    def test_sorted_and_sanitized(self, tmp_path):
        path = write_json(str(tmp_path / "r.json"), {"b": math.inf, "a": np.float64(2.0)})
        text = open(path).read()
        assert text.index('"a"') < text.index('"b"')
        assert json.loads(text) == {"a": 2.0, "b": "inf"}
