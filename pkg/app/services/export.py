"""CSV and plot-data files with fixed schemas.

Every writer has a matching reader that rejects files whose header differs
from the schema.
"""
from __future__ import annotations

from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np
import pandas as pd

from app.services.errors import SchemaError
from app.services.grid import DiscreteField, Grid, make_grid

__all__: list[str] = [
    "SCHEMAS",
    "write_rows",
    "read_rows",
    "write_field",
    "read_field",
    "write_history",
    "write_series",
]

SCHEMAS: dict[str, list[str]] = {
    "verdicts": ["p", "q", "alpha", "n", "regime", "margin"],
    "sweep": ["q", "converged", "iterations", "energy", "holder_exponent", "holder_fit", "s_order", "C", "residual"],
    "moser": ["i", "t_i"],
    "metrics": ["p", "q", "alpha", "regime", "s_order", "C", "holder_exponent", "fit_quality"],
    "field": ["node", "x1", "x2", "value"],
    "history": ["iteration", "energy", "grad_norm"],
}

# DBL_DIG significant digits: decimal inputs such as 2.1 print unchanged
SERIES_FLOAT_FORMAT = "%.15g"


def write_rows(path: Path | str, schema: str, rows: Iterable[Mapping[str, object]]) -> Path:
    columns = SCHEMAS[schema]
    frame = pd.DataFrame(list(rows), columns=columns)
    path = Path(path)
    frame.to_csv(path, index=False, lineterminator="\n")
    return path


def read_rows(path: Path | str, schema: str) -> pd.DataFrame:
    frame = pd.read_csv(path, float_precision="round_trip")
    expected = SCHEMAS[schema]
    if list(frame.columns) != expected:
        raise SchemaError(f"{path}: expected columns {expected}, found {list(frame.columns)}")
    return frame


def write_field(path: Path | str, fld: DiscreteField) -> Path:
    nodes = fld.grid.node_coordinates().reshape(-1, 2)
    rows = {
        "node": np.arange(fld.grid.node_count),
        "x1": nodes[:, 0],
        "x2": nodes[:, 1],
        "value": fld.values.ravel(),
    }
    path = Path(path)
    pd.DataFrame(rows, columns=SCHEMAS["field"]).to_csv(path, index=False, lineterminator="\n")
    return path


def read_field(path: Path | str) -> DiscreteField:
    frame = read_rows(path, "field").sort_values("node")
    count = len(frame)
    m = int(round(np.sqrt(count))) - 1
    if (m + 1) ** 2 != count:
        raise SchemaError(f"{path}: {count} nodes is not a square grid")
    grid: Grid = make_grid(m)
    if not np.array_equal(frame["node"].to_numpy(), np.arange(count)):
        raise SchemaError(f"{path}: node indices are not 0..{count - 1}")
    return DiscreteField(grid, frame["value"].to_numpy(dtype=float).reshape(m + 1, m + 1))


def write_history(path: Path | str, energies: Sequence[float], grad_norms: Sequence[float]) -> Path:
    rows = ({"iteration": i, "energy": e, "grad_norm": g} for i, (e, g) in enumerate(zip(energies, grad_norms)))
    return write_rows(path, "history", rows)


def write_series(path: Path | str, xs: Sequence[float], ys: Sequence[float]) -> Path:
    """Two-column whitespace-separated data file for any plotting tool."""
    path = Path(path)
    frame = pd.DataFrame({"x": np.asarray(xs, dtype=float), "y": np.asarray(ys, dtype=float)})
    frame.to_csv(path, sep=" ", header=False, index=False, float_format=SERIES_FLOAT_FORMAT,
                 na_rep="nan", lineterminator="\n")
    return path
