import json

import numpy as np
import pytest

from uwisac.cli import main


@pytest.fixture
def config_file(tmp_path):
    data = {
        "scenario": {
            "nodes": [{"position": [-1000.0, 0.0]}, {"position": [1000.0, 0.0]}],
            "target": {"position": [0.0, 1000.0], "speed_knots": 9.72},
        },
        "waveforms": [{"family": "pcmfsk"}],
        "grid": {"x_min": -500.0, "x_max": 500.0, "y_min": 500.0, "y_max": 1500.0,
                 "nx": 2, "ny": 2},
        "cases": [2, 3],
        "seed": 3,
        "wbaf": {"num_delays": 21, "num_etas": 21},
    }
    path = tmp_path / "config.json"
    path.write_text(json.dumps(data))
    return path


def test_sweep_command(tmp_path, config_file, capsys):
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(config_file), "--out", str(out)]) == 0
    files = {p.name for p in out.iterdir()}
    assert {"case2_pcmfsk_like.csv", "case3_pcmfsk_like.csv",
            "ratio_position_pcmfsk_like.csv", "ratio_doppler_pcmfsk_like.csv",
            "run_metadata.json"} <= files
    assert "wrote" in capsys.readouterr().out


def test_sweep_case_override(tmp_path, config_file):
    out = tmp_path / "out"
    assert main(["sweep", "--config", str(config_file), "--out", str(out),
                 "--cases", "3"]) == 0
    names = {p.name for p in out.glob("*.csv")}
    assert names == {"case3_pcmfsk_like.csv"}


def test_wbaf_command(tmp_path, config_file):
    out = tmp_path / "wbaf"
    assert main(["wbaf", "--config", str(config_file), "--out", str(out)]) == 0
    lines = (out / "wbaf_pcmfsk_like.csv").read_text().splitlines()
    assert lines[0] == "delay_s,eta,chi_norm"
    assert len(lines) == 1 + 21 * 21
    values = np.array([float(line.split(",")[2]) for line in lines[1:]])
    assert values.max() == pytest.approx(1.0)


def test_compare_command(tmp_path, config_file, capsys):
    data = json.loads(config_file.read_text())
    data["waveforms"] = [{"family": "pcmfsk", "name": "a"},
                         {"family": "pcmfsk", "name": "b", "energy": 80.0}]
    config = tmp_path / "two.json"
    config.write_text(json.dumps(data))
    assert main(["compare", "--config", str(config)]) == 0
    out = capsys.readouterr().out
    assert "median_sqrt_crlb_eta" in out and " a" in out and " b" in out


def test_mc_check_command(capsys):
    assert main(["mc-check", "--config", "configs/mc_toy.json",
                 "--trials", "120", "--seed", "123"]) == 0
    out = capsys.readouterr().out
    assert "bound respected within MC tolerance: True" in out


def test_bad_config_reports_fields(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"grid": {"nx": 0}}))
    assert main(["sweep", "--config", str(path), "--out", str(tmp_path)]) == 2
    err = capsys.readouterr().err
    assert "scenario" in err and "grid" in err
