"""Parsers for the sweep CSV schemas.

Three layouts exist: bound maps (``x_m,y_m,sqrt_crlb_p_m,sqrt_crlb_eta,flag``),
ratio maps (``x_m,y_m,ratio,flag``) and ambiguity surfaces
(``delay_s,eta,chi_norm``).  Empty value cells mark singular grid points and
become masked entries.  Parsing is strict: a wrong header or a malformed cell
raises with the offending line number so broken inputs are debuggable.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

MAP_HEADER = "x_m,y_m,sqrt_crlb_p_m,sqrt_crlb_eta,flag"
RATIO_HEADER = "x_m,y_m,ratio,flag"
WBAF_HEADER = "delay_s,eta,chi_norm"


class SchemaError(ValueError):
    """CSV does not match the expected sweep schema."""

    def __init__(self, path, line_no: int, message: str):
        self.path = str(path)
        self.line_no = line_no
        super().__init__(f"{path}:{line_no}: {message}")


@dataclass(frozen=True, eq=False)
class GridData:
    """One rectangular map: masked values over sorted x/y axes."""

    xs: np.ndarray
    ys: np.ndarray
    values: np.ma.MaskedArray  # shape (len(ys), len(xs))


def _read_rows(path, expected_header: str, num_values: int, has_flag: bool):
    lines = Path(path).read_text().splitlines()
    if not lines:
        raise SchemaError(path, 1, "empty file")
    if lines[0] != expected_header:
        raise SchemaError(path, 1,
                          f"expected header {expected_header!r}, got {lines[0]!r}")
    expected_cells = 2 + num_values + (1 if has_flag else 0)
    rows = []
    for line_no, line in enumerate(lines[1:], start=2):
        cells = line.split(",")
        if len(cells) != expected_cells:
            raise SchemaError(path, line_no,
                              f"expected {expected_cells} fields, got {len(cells)}")
        try:
            x = float(cells[0])
            y = float(cells[1])
        except ValueError:
            raise SchemaError(path, line_no, "coordinates must be numbers") from None
        values = []
        for cell in cells[2:2 + num_values]:
            if cell == "":
                values.append(None)
                continue
            try:
                value = float(cell)
            except ValueError:
                raise SchemaError(path, line_no,
                                  f"malformed value {cell!r}") from None
            if not np.isfinite(value):
                raise SchemaError(path, line_no, f"non-finite value {cell!r}")
            values.append(value)
        rows.append((x, y, values))
    if not rows:
        raise SchemaError(path, 2, "no data rows")
    return rows


def _to_grid(path, rows, column: int) -> GridData:
    xs = np.array(sorted({x for x, _, _ in rows}))
    ys = np.array(sorted({y for _, y, _ in rows}))
    if len(rows) != xs.size * ys.size:
        raise SchemaError(path, 2,
                          f"rows do not tile a rectangular grid: {len(rows)} rows "
                          f"for {xs.size} x {ys.size} axes")
    xi = {x: i for i, x in enumerate(xs)}
    yi = {y: i for i, y in enumerate(ys)}
    values = np.ma.masked_all((ys.size, xs.size))
    for x, y, vals in rows:
        v = vals[column]
        if v is not None:
            values[yi[y], xi[x]] = v
    return GridData(xs=xs, ys=ys, values=values)


def load_bound_map(path, column: str) -> GridData:
    """Load a case CSV; ``column`` is ``"position"`` or ``"doppler"``."""
    index = {"position": 0, "doppler": 1}.get(column)
    if index is None:
        raise ValueError(f"column must be 'position' or 'doppler', got {column!r}")
    rows = _read_rows(path, MAP_HEADER, num_values=2, has_flag=True)
    return _to_grid(path, rows, index)


def load_ratio_map(path) -> GridData:
    rows = _read_rows(path, RATIO_HEADER, num_values=1, has_flag=True)
    return _to_grid(path, rows, 0)


def load_wbaf(path) -> GridData:
    """Ambiguity surface: x axis is delay (s), y axis is the doppler scale."""
    rows = _read_rows(path, WBAF_HEADER, num_values=1, has_flag=False)
    grid = _to_grid(path, rows, 0)
    if grid.values.mask.any():
        raise SchemaError(path, 2, "ambiguity surfaces cannot have empty cells")
    return grid
