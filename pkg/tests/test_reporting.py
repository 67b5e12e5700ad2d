"""Tests for report encoding, grid helpers and small utilities."""

import json
import math

import numpy as np
import pytest

from lightcone_geometry.core.grid import Grid, cumulative, diff4, integrate, summarize
from lightcone_geometry.reporting import Report, Status, dumps, format_float
from lightcone_geometry.utils import dataframe_markdown_preview, parse_grid_spec, parse_rect, save_csv


class TestFloatFormat:
    @pytest.mark.parametrize(
        "value, text",
        [(0.0, "0.0"), (-0.0, "0.0"), (2.0, "2.0"), (0.1, "0.10000000000000001"),
         (1e-20, "9.9999999999999995e-21"), (math.nan, "null"), (math.inf, "null")],
    )
    def test_format(self, value, text):
        assert format_float(value) == text


class TestDumps:
    def test_numeric_lists_inline(self):
        text = dumps({"a": [1, 2.5], "b": {"c": True}})
        assert '"a": [1, 2.5]' in text
        assert json.loads(text) == {"a": [1, 2.5], "b": {"c": True}}

    def test_numpy_and_enum(self):
        text = dumps({"x": np.float64(0.5), "n": np.int64(3), "s": Status.OK, "arr": np.array([1.0, 2.0])})
        assert json.loads(text) == {"x": 0.5, "n": 3, "s": "ok", "arr": [1.0, 2.0]}

    def test_unencodable(self):
        with pytest.raises(TypeError):
            dumps({"x": object()})


class TestReport:
    def test_exit_codes(self):
        assert Report(command="detect").exit_code == 0
        assert Report(command="thomsen", status=Status.NEGATIVE).exit_code == 2

    def test_json_is_stable(self):
        report = Report(command="detect", results={"w": 0.125})
        assert report.to_json() == report.to_json()
        assert json.loads(report.to_json())["results"]["w"] == 0.125


class TestGridHelpers:
    def test_integrate_odd_interval_count(self):
        grid = Grid.over((0.0, 1.0, 0.0, 2.0), 6, 7)
        U, V = np.meshgrid(grid.us, grid.vs, indexing="ij")
        assert integrate(U ** 2 * V, grid) == pytest.approx(2.0 / 3.0, abs=1e-12)

    def test_diff4_exact_on_quartics(self):
        x = np.linspace(0.0, 1.0, 9)
        d = diff4(x ** 4, x[1] - x[0])
        assert d == pytest.approx(4 * x ** 3, abs=1e-10)

    def test_cumulative(self):
        assert cumulative(np.ones(5), 0.25)[-1] == pytest.approx(1.0)

    def test_summarize_argmax(self):
        grid = Grid.over((0.0, 1.0, 0.0, 1.0), 3, 3)
        values = np.zeros((3, 3))
        values[2, 1] = 4.0
        stats = summarize(values, grid)
        assert stats["max"] == 4.0
        assert stats["argmax_point"] == [1.0, 0.5]

    def test_rect_must_be_ordered(self):
        with pytest.raises(ValueError):
            Grid.over((1.0, 0.0, 0.0, 1.0), 5, 5)


class TestUtils:
    def test_parse_grid_spec(self):
        assert tuple(parse_grid_spec("30X12")) == (30, 12)
        with pytest.raises(ValueError, match="20x20"):
            parse_grid_spec("30")

    def test_parse_rect(self):
        assert parse_rect("-1,1,0,2") == (-1.0, 1.0, 0.0, 2.0)
        with pytest.raises(ValueError):
            parse_rect("0,1")

    def test_save_csv(self, tmp_path):
        path = tmp_path / "nested" / "rows.csv"
        assert save_csv([{"u": 0.0, "k1": -0.25}], path) == 2
        assert path.read_text().splitlines()[0] == "u,k1"
        assert save_csv([], tmp_path / "empty.csv") == 0

    def test_preview(self):
        rows = [{"u": float(i), "v": 0.0, "k1": -0.25} for i in range(10)]
        text = dataframe_markdown_preview(rows, preferred_cols=["k1", "missing"], max_rows=3)
        assert "k1" in text and "v" not in text
        assert dataframe_markdown_preview([]) == "(no rows)"
