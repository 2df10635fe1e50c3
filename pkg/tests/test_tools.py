"""Tests for output formats and argument parsers"""
import json
import math

import numpy as np
import pandas as pd
import pytest

from tools import ConfigFileTools, CsvTools, FormatError, JsonTools, SpecTools, get_tool, list_tools


class TestCsv:
    def test_full_precision_and_blanks(self):
        frame = pd.DataFrame({"s": [0.1, 2.0], "x": [np.nan, 1.5]})
        assert CsvTools.to_csv(frame) == "s,x\n0.10000000000000001,\n2,1.5\n"

    def test_read_back(self, tmp_path):
        frame = pd.DataFrame({"s": [1 / 3], "y": [math.pi]})
        path = tmp_path / "rows.csv"
        path.write_text(CsvTools.to_csv(frame))
        back = CsvTools.read_csv(str(path))
        assert back["s"][0] == 1 / 3
        assert back["y"][0] == math.pi


class TestJson:
    def test_non_finite_become_null(self):
        text = JsonTools.dumps({"a": math.nan, "b": [np.float64(1.5), math.inf], "c": np.int64(3)})
        assert json.loads(text) == {"a": None, "b": [1.5, None], "c": 3}
        assert text.endswith("\n")

    def test_numpy_values(self):
        assert JsonTools.clean({"v": np.array([1.0, 2.0]), "ok": np.bool_(True)}) == {"v": [1.0, 2.0], "ok": True}

    def test_records(self):
        frame = pd.DataFrame({"s": [0.0, 1.0], "x": [np.nan, 2.0]})
        assert JsonTools.records(frame) == [{"s": 0.0, "x": None}, {"s": 1.0, "x": 2.0}]


class TestConfigFiles:
    def test_parse(self):
        text = "# solve settings\nfamily = K\ns-range = 0:5\nmethod=rk4  # fixed step\n"
        assert ConfigFileTools.parse(text) == {"family": "K", "s_range": "0:5", "method": "rk4"}

    def test_missing_value(self):
        with pytest.raises(FormatError):
            ConfigFileTools.parse("family\n")

    def test_missing_file(self, tmp_path):
        with pytest.raises(FormatError):
            ConfigFileTools.read(str(tmp_path / "absent.cfg"))

    def test_read(self, tmp_path):
        path = tmp_path / "run.cfg"
        path.write_text("field = dx\n", encoding="utf-8")
        assert ConfigFileTools.read(str(path)) == {"field": "dx"}


class TestSpecs:
    def test_grid(self):
        assert SpecTools.parse_grid("0:3:20,-3.14:3.14:20") == [(0.0, 3.0, 20), (-3.14, 3.14, 20)]

    @pytest.mark.parametrize("text", ["0:3:20", "0:3,0:1:2", "0:3:x,0:1:2", "3:0:5,0:1:2", "0:1:0,0:1:2"])
    def test_bad_grids(self, text):
        with pytest.raises(FormatError):
            SpecTools.parse_grid(text)

    def test_range_and_floats(self):
        assert SpecTools.parse_range("-1:2.5") == (-1.0, 2.5)
        assert SpecTools.parse_floats("1, 3,0,1", count=4) == [1.0, 3.0, 0.0, 1.0]
        with pytest.raises(FormatError):
            SpecTools.parse_floats("1,2", count=4)
        with pytest.raises(FormatError):
            SpecTools.parse_range("1")

    def test_assignments(self):
        assert SpecTools.parse_assignments("x=0, y=1,phi=-0.5") == {"x": 0.0, "y": 1.0, "phi": -0.5}
        with pytest.raises(FormatError):
            SpecTools.parse_assignments("x=0,y")
        with pytest.raises(FormatError):
            SpecTools.parse_assignments("x=abc")

    def test_axis(self):
        assert SpecTools.axis(0.0, 1.0, 1).tolist() == [0.0]
        assert SpecTools.axis(0.0, 1.0, 3).tolist() == [0.0, 0.5, 1.0]


def test_registry():
    assert get_tool("csv") is CsvTools
    assert get_tool("missing") is None
    assert "parse_grid" in list_tools()["spec"]
