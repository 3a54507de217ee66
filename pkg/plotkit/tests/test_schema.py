from pathlib import Path

import numpy as np
import pytest

from plotkit.schema import (SchemaError, load_bound_map, load_ratio_map,
                            load_wbaf)

DATA = Path(__file__).parent / "data"


def test_load_bound_map_shapes_and_masking():
    grid = load_bound_map(DATA / "case2_pcmfsk_like.csv", "position")
    assert grid.values.shape == (grid.ys.size, grid.xs.size)
    assert grid.values.shape == (4, 4)
    assert grid.values.mask.any()          # baseline cells are singular
    assert not grid.values.mask.all()
    doppler = load_bound_map(DATA / "case2_pcmfsk_like.csv", "doppler")
    assert doppler.values.shape == (4, 4)
    with pytest.raises(ValueError):
        load_bound_map(DATA / "case2_pcmfsk_like.csv", "bogus")


def test_case1_has_fully_masked_doppler():
    grid = load_bound_map(DATA / "case1.csv", "doppler")
    assert grid.values.mask.all()


def test_values_roundtrip_exactly():
    path = DATA / "case2_pcmfsk_like.csv"
    grid = load_bound_map(path, "position")
    xi = {x: i for i, x in enumerate(grid.xs)}
    yi = {y: i for i, y in enumerate(grid.ys)}
    for line in path.read_text().splitlines()[1:]:
        x, y, p, _eta, _flag = line.split(",")
        cell = grid.values[yi[float(y)], xi[float(x)]]
        if p == "":
            assert cell is np.ma.masked
        else:
            assert float(cell) == float(p)  # bit-exact, no rounding anywhere


def test_load_ratio_map():
    grid = load_ratio_map(DATA / "ratio_position_pcmfsk_like.csv")
    finite = grid.values.compressed()
    assert finite.size > 0
    assert finite.min() >= 1.0 - 1e-6


def test_load_wbaf():
    grid = load_wbaf(DATA / "wbaf_pcmfsk_like.csv")
    assert grid.values.shape == (25, 31)
    assert grid.values.max() == pytest.approx(1.0)


def test_header_mismatch_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("wrong,header\n1,2\n")
    with pytest.raises(SchemaError) as err:
        load_bound_map(path, "position")
    assert err.value.line_no == 1


def test_malformed_value_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x_m,y_m,sqrt_crlb_p_m,sqrt_crlb_eta,flag\n"
                    "0.0,0.0,1.0,2.0,\n"
                    "1.0,0.0,oops,2.0,\n")
    with pytest.raises(SchemaError) as err:
        load_bound_map(path, "position")
    assert err.value.line_no == 3
    assert "oops" in str(err.value)


def test_wrong_field_count_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x_m,y_m,sqrt_crlb_p_m,sqrt_crlb_eta,flag\n0.0,0.0,1.0\n")
    with pytest.raises(SchemaError) as err:
        load_bound_map(path, "position")
    assert err.value.line_no == 2


def test_incomplete_grid_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x_m,y_m,sqrt_crlb_p_m,sqrt_crlb_eta,flag\n"
                    "0.0,0.0,1.0,1.0,\n"
                    "1.0,0.0,1.0,1.0,\n"
                    "0.0,1.0,1.0,1.0,\n")
    with pytest.raises(SchemaError):
        load_bound_map(path, "position")


def test_nonfinite_value_rejected(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("x_m,y_m,ratio,flag\n0.0,0.0,inf,\n")
    with pytest.raises(SchemaError):
        load_ratio_map(path)
