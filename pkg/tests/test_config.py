import json

import pytest

from uwisac.config import ConfigError, load_config, parse_config


def minimal_config():
    return {
        "scenario": {
            "nodes": [{"position": [-1000.0, 0.0]}, {"position": [1000.0, 0.0]}],
            "target": {"position": [0.0, 1000.0], "speed_knots": 9.72},
        },
        "waveforms": [{"family": "pcmfsk"}],
        "grid": {"x_min": -100.0, "x_max": 100.0, "y_min": 500.0, "y_max": 900.0,
                 "nx": 3, "ny": 3},
    }


def test_minimal_config_fills_defaults():
    config = parse_config(minimal_config())
    assert config.scenario.sound_speed == 1500.0
    assert config.scenario.sample_rate == 24000.0
    assert config.scenario.num_samples == 128
    assert config.ar_coefficient == 0.5
    assert config.environment.wind_speed_knots == 6.0
    assert config.cases == (1, 2, 3)
    assert config.waveforms[0].label == "pcmfsk_like"
    assert config.waveforms[0].seed == config.seed


def test_target_velocity_from_heading():
    data = minimal_config()
    data["scenario"]["target"]["heading_deg"] = 0.0
    config = parse_config(data)
    vx, vy = config.scenario.target.velocity
    assert vx == pytest.approx(9.72 * 0.514444)
    assert vy == pytest.approx(0.0, abs=1e-12)


def test_all_problems_reported_at_once():
    data = minimal_config()
    data["grid"]["nx"] = -2
    data["noise"] = {"ar_coefficient": 1.5}
    data["cases"] = [7]
    with pytest.raises(ConfigError) as err:
        parse_config(data)
    assert "grid.nx" in err.value.fields
    assert "noise.ar_coefficient" in err.value.fields
    assert "cases" in err.value.fields


def test_missing_required_fields():
    with pytest.raises(ConfigError) as err:
        parse_config({"waveforms": [{"family": "pcmfsk"}]})
    assert "scenario" in err.value.fields
    assert "grid.x_min" in err.value.fields


def test_node_count_enforced():
    data = minimal_config()
    data["scenario"]["nodes"] = [{"position": [0.0, 0.0]}]
    with pytest.raises(ConfigError) as err:
        parse_config(data)
    assert "scenario.nodes" in err.value.fields


def test_unknown_waveform_family_and_keys():
    data = minimal_config()
    data["waveforms"] = [{"family": "ofdm"}]
    with pytest.raises(ConfigError) as err:
        parse_config(data)
    assert "waveforms[0].family" in err.value.fields

    data["waveforms"] = [{"family": "pcmfsk", "bogus_knob": 3}]
    with pytest.raises(ConfigError) as err:
        parse_config(data)
    assert "waveforms[0]" in err.value.fields


def test_empty_extents_rejected():
    data = minimal_config()
    data["grid"]["x_max"] = -200.0
    with pytest.raises(ConfigError) as err:
        parse_config(data)
    assert "grid" in err.value.fields


def test_duplicate_waveforms_get_distinct_labels():
    data = minimal_config()
    data["waveforms"] = [{"family": "pcmfsk"}, {"family": "pcmfsk"}]
    config = parse_config(data)
    labels = [wf.label for wf in config.waveforms]
    assert labels[0] != labels[1]
    assert config.waveforms[0].seed == config.waveforms[1].seed


def test_waveform_overrides_and_seed():
    data = minimal_config()
    data["seed"] = 99
    data["waveforms"] = [{"family": "spfsk", "energy": 80.0, "seed": 5,
                          "name": "hot"}]
    config = parse_config(data)
    wf = config.waveforms[0]
    assert wf.energy == 80.0
    assert wf.seed == 5
    assert wf.label == "hot"


def test_waveform_rate_must_match_scenario():
    data = minimal_config()
    data["waveforms"] = [{"family": "pcmfsk", "sample_rate": 48000.0}]
    with pytest.raises(ConfigError) as err:
        parse_config(data)
    assert "waveforms[0].sample_rate" in err.value.fields


def test_load_config_roundtrip(tmp_path):
    path = tmp_path / "config.json"
    path.write_text(json.dumps(minimal_config()))
    config = load_config(path)
    assert config.grid.nx == 3
    path.write_text("{not json")
    with pytest.raises(ConfigError):
        load_config(path)
