import math

import numpy as np
import pytest

from app.services.errors import SchemaError
from app.services.export import (
    SCHEMAS,
    read_field,
    read_rows,
    write_field,
    write_history,
    write_rows,
    write_series,
)
from app.services.grid import DiscreteField, make_grid
from app.services.plots import line_chart


def test_rows_round_trip(tmp_path):
    rows = [
        {"q": 2.1, "converged": True, "iterations": 12, "energy": 0.1 + 0.2, "holder_exponent": 1.5,
         "holder_fit": 1.0, "s_order": math.inf, "C": 0.0, "residual": 0.0},
        {"q": 2.9, "converged": False, "iterations": 0, "energy": math.nan, "holder_exponent": math.nan,
         "holder_fit": math.nan, "s_order": math.nan, "C": math.nan, "residual": math.nan},
    ]
    path = write_rows(tmp_path / "sweep.csv", "sweep", rows)
    assert path.read_text().splitlines()[0] == ",".join(SCHEMAS["sweep"])

    frame = read_rows(path, "sweep")
    assert list(frame["q"]) == [2.1, 2.9]
    assert list(frame["converged"]) == [True, False]
    assert frame["energy"][0] == 0.1 + 0.2
    assert frame["s_order"][0] == math.inf
    assert math.isnan(frame["energy"][1])


def test_read_rows_rejects_other_header(tmp_path):
    path = tmp_path / "moser.csv"
    path.write_text("step,t\n0,2.0\n")
    with pytest.raises(SchemaError):
        read_rows(path, "moser")


def test_field_round_trip_is_exact(tmp_path):
    grid = make_grid(8)
    values = np.random.default_rng(3).normal(size=(9, 9))
    path = write_field(tmp_path / "field.csv", DiscreteField(grid, values))
    again = read_field(path)
    assert again.grid.m == 8
    assert np.array_equal(again.values, values)


def test_read_field_rejects_non_square(tmp_path):
    path = tmp_path / "field.csv"
    path.write_text("node,x1,x2,value\n" + "".join(f"{k},0,0,0\n" for k in range(24)))
    with pytest.raises(SchemaError):
        read_field(path)


def test_write_history(tmp_path):
    path = write_history(tmp_path / "history.csv", [3.0, 2.0, 1.5], [1.0, 0.1, 0.01])
    frame = read_rows(path, "history")
    assert list(frame["iteration"]) == [0, 1, 2]
    assert list(frame["energy"]) == [3.0, 2.0, 1.5]


def test_write_series_lines(tmp_path):
    path = write_series(tmp_path / "holder.dat", [2.1, 2.2], [np.float64(0.5), 1.5])
    assert path.read_text() == "2.1 0.5\n2.2 1.5\n"


def test_write_series_fixed_format_and_non_finite(tmp_path):
    path = write_series(tmp_path / "s_order.dat", [2.3, 2.4, 2.6], [1 / 3, math.inf, math.nan])
    assert path.read_text() == "2.3 0.333333333333333\n2.4 inf\n2.6 nan\n"


def test_line_chart_skips_non_finite_points():
    svg = line_chart("sweep <q>", "q", {"holder": ([2.0, 2.5, 3.0], [1.0, math.nan, 0.5])}, marker_x=2.5)
    assert svg.startswith("<svg")
    assert svg.rstrip().endswith("</svg>")
    assert "sweep &lt;q&gt;" in svg
    assert "stroke-dasharray" in svg
    polyline = next(line for line in svg.splitlines() if line.startswith("<polyline"))
    assert polyline.count(",") == 2
