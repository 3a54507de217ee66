"""JSON sweep configuration: parsing, validation, and echo.

Validation is collected, not fail-fast: a bad file reports every offending
field path in one error so the config can be fixed in a single pass.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .scenario import Position2D, Scenario, SensorNode, TargetState
from .sonar import Environment
from .waveforms import (FAMILY_PCMFSK_LIKE, FAMILY_SPFSK_LIKE, WaveformConfig,
                        pcmfsk_like_config, spfsk_like_config)

_FAMILY_ALIASES = {
    "spfsk": FAMILY_SPFSK_LIKE,
    "spfsk_like": FAMILY_SPFSK_LIKE,
    "pcmfsk": FAMILY_PCMFSK_LIKE,
    "pcmfsk_like": FAMILY_PCMFSK_LIKE,
}

_PRESETS = {
    FAMILY_SPFSK_LIKE: spfsk_like_config,
    FAMILY_PCMFSK_LIKE: pcmfsk_like_config,
}

_WAVEFORM_KEYS = ("mary", "frame_length", "guard_fraction", "tones", "num_bits",
                  "center_frequency", "bandwidth", "energy", "seed",
                  "sample_rate", "name", "codec_notes")


class ConfigError(ValueError):
    """Invalid sweep configuration; ``fields`` lists every offending path."""

    def __init__(self, problems: list[tuple[str, str]]):
        self.fields = [path for path, _ in problems]
        detail = "; ".join(f"{path}: {reason}" for path, reason in problems)
        super().__init__(f"invalid config: {detail}")


@dataclass(frozen=True)
class GridSpec:
    """Rectangular target-position sweep grid."""

    x_min: float
    x_max: float
    y_min: float
    y_max: float
    nx: int
    ny: int

    def xs(self) -> np.ndarray:
        return np.linspace(self.x_min, self.x_max, self.nx)

    def ys(self) -> np.ndarray:
        return np.linspace(self.y_min, self.y_max, self.ny)

    @property
    def num_points(self) -> int:
        return self.nx * self.ny


@dataclass(frozen=True)
class WbafGridSpec:
    """Grid sizes for the ambiguity-surface command.  Spans left as ``None``
    adapt to each waveform's bandwidth and duration."""

    delay_span_s: float | None = None
    num_delays: int = 81
    eta_span: float | None = None
    num_etas: int = 81


@dataclass(frozen=True)
class SweepConfig:
    """Everything one sweep run needs."""

    scenario: Scenario
    ar_coefficient: float
    environment: Environment
    waveforms: tuple[WaveformConfig, ...]
    grid: GridSpec
    cases: tuple[int, ...]
    seed: int
    wbaf: WbafGridSpec = field(default_factory=WbafGridSpec)


class _Parser:
    def __init__(self, data):
        self.data = data
        self.problems: list[tuple[str, str]] = []

    def fail(self, path: str, reason: str) -> None:
        self.problems.append((path, reason))

    def get(self, container, key, path, kind, default=None, required=False):
        if key not in container:
            if required:
                self.fail(path, "missing")
                return None
            return default
        value = container[key]
        try:
            if kind is float:
                value = float(value)
            elif kind is int:
                if isinstance(value, bool) or int(value) != value:
                    raise TypeError
                value = int(value)
            elif kind is list and not isinstance(value, list):
                raise TypeError
            elif kind is dict and not isinstance(value, dict):
                raise TypeError
            elif kind is str and not isinstance(value, str):
                raise TypeError
        except (TypeError, ValueError):
            self.fail(path, f"expected {kind.__name__}")
            return default
        return value

    def positive(self, container, key, path, kind, default=None, required=False):
        value = self.get(container, key, path, kind, default, required)
        if value is not None and value <= 0:
            self.fail(path, "must be positive")
            return default
        return value


def _parse_position(parser: _Parser, container, key, path, required=True):
    raw = parser.get(container, key, path, list, required=required)
    if raw is None:
        return None
    if len(raw) != 2 or not all(isinstance(v, (int, float)) and not isinstance(v, bool)
                                for v in raw):
        parser.fail(path, "expected [x, y] numbers")
        return None
    return float(raw[0]), float(raw[1])


def _parse_node(parser: _Parser, raw, path) -> SensorNode | None:
    if not isinstance(raw, dict):
        parser.fail(path, "expected object")
        return None
    pos = _parse_position(parser, raw, "position", f"{path}.position")
    num = parser.positive(raw, "num_sensors", f"{path}.num_sensors", int, default=4)
    spacing = parser.positive(raw, "element_spacing", f"{path}.element_spacing",
                              float, default=0.125)
    if pos is None or num is None or spacing is None:
        return None
    return SensorNode(origin=Position2D(*pos), num_sensors=num, element_spacing=spacing)


def _parse_waveform(parser: _Parser, raw, path, default_seed: int
                    ) -> WaveformConfig | None:
    if not isinstance(raw, dict):
        parser.fail(path, "expected object")
        return None
    family_raw = parser.get(raw, "family", f"{path}.family", str, required=True)
    if family_raw is None:
        return None
    family = _FAMILY_ALIASES.get(family_raw.lower())
    if family is None:
        parser.fail(f"{path}.family",
                    f"unknown family {family_raw!r}; expected one of {sorted(set(_FAMILY_ALIASES))}")
        return None
    unknown = set(raw) - set(_WAVEFORM_KEYS) - {"family"}
    if unknown:
        parser.fail(path, f"unknown keys: {sorted(unknown)}")
        return None
    overrides = {k: raw[k] for k in _WAVEFORM_KEYS if k in raw}
    overrides.setdefault("seed", default_seed)
    try:
        return _PRESETS[family](**overrides)
    except (TypeError, ValueError) as err:
        parser.fail(path, str(err))
        return None


def parse_config(data: dict) -> SweepConfig:
    """Build a :class:`SweepConfig` from a decoded JSON object."""
    parser = _Parser(data)
    if not isinstance(data, dict):
        raise ConfigError([("<root>", "expected a JSON object")])

    seed = parser.get(data, "seed", "seed", int, default=0)
    if seed is None:
        seed = 0

    scen_raw = parser.get(data, "scenario", "scenario", dict, required=True) or {}
    nodes_raw = parser.get(scen_raw, "nodes", "scenario.nodes", list, required=True)
    nodes = []
    if nodes_raw is not None:
        if len(nodes_raw) != 2:
            parser.fail("scenario.nodes", "exactly two nodes are required")
        else:
            for i, entry in enumerate(nodes_raw):
                node = _parse_node(parser, entry, f"scenario.nodes[{i}]")
                if node is not None:
                    nodes.append(node)

    target_raw = parser.get(scen_raw, "target", "scenario.target", dict, required=True) or {}
    target_pos = _parse_position(parser, target_raw, "position", "scenario.target.position")
    speed = parser.get(target_raw, "speed_knots", "scenario.target.speed_knots",
                       float, default=9.72)
    if speed is not None and speed < 0:
        parser.fail("scenario.target.speed_knots", "must be >= 0")
        speed = None
    heading = parser.get(target_raw, "heading_deg", "scenario.target.heading_deg",
                         float, default=90.0)
    weight = parser.positive(target_raw, "weight_tonnes", "scenario.target.weight_tonnes",
                             float, default=1.0)

    sound_speed = parser.positive(scen_raw, "sound_speed", "scenario.sound_speed",
                                  float, default=1500.0)
    sample_rate = parser.positive(scen_raw, "sample_rate", "scenario.sample_rate",
                                  float, default=24000.0)
    passive_n = parser.positive(scen_raw, "passive_num_samples",
                                "scenario.passive_num_samples", int, default=128)
    passive_window = parser.positive(scen_raw, "passive_window_s",
                                     "scenario.passive_window_s", float, default=0.05)
    if passive_n is not None and passive_n % 2 != 0:
        parser.fail("scenario.passive_num_samples", "must be even")

    noise_raw = parser.get(data, "noise", "noise", dict, default={}) or {}
    ar = parser.get(noise_raw, "ar_coefficient", "noise.ar_coefficient", float, default=0.5)
    if ar is not None and not abs(ar) < 1.0:
        parser.fail("noise.ar_coefficient", "must satisfy |a| < 1")

    env_raw = parser.get(data, "environment", "environment", dict, default={}) or {}
    wind = parser.get(env_raw, "wind_speed_knots", "environment.wind_speed_knots",
                      float, default=6.0)
    if wind is not None and wind < 0:
        parser.fail("environment.wind_speed_knots", "must be >= 0")
    freq = parser.positive(env_raw, "listening_frequency_khz",
                           "environment.listening_frequency_khz", float, default=6.0)

    wf_raw = parser.get(data, "waveforms", "waveforms", list, required=True)
    waveforms = []
    if wf_raw is not None:
        if not wf_raw:
            parser.fail("waveforms", "at least one waveform is required")
        for i, entry in enumerate(wf_raw):
            wf = _parse_waveform(parser, entry, f"waveforms[{i}]", seed)
            if wf is not None:
                waveforms.append(wf)

    grid_raw = parser.get(data, "grid", "grid", dict, required=True) or {}
    grid_vals = {}
    for key in ("x_min", "x_max", "y_min", "y_max"):
        grid_vals[key] = parser.get(grid_raw, key, f"grid.{key}", float, required=True)
    for key in ("nx", "ny"):
        grid_vals[key] = parser.positive(grid_raw, key, f"grid.{key}", int, required=True)
    grid = None
    if all(v is not None for v in grid_vals.values()):
        if grid_vals["x_max"] < grid_vals["x_min"] or grid_vals["y_max"] < grid_vals["y_min"]:
            parser.fail("grid", "extents are empty (max < min)")
        else:
            grid = GridSpec(**grid_vals)

    cases_raw = parser.get(data, "cases", "cases", list, default=[1, 2, 3])
    cases: tuple[int, ...] = ()
    if cases_raw is not None:
        if not cases_raw:
            parser.fail("cases", "at least one case is required")
        elif not all(c in (1, 2, 3) for c in cases_raw):
            parser.fail("cases", "entries must be 1, 2 or 3")
        else:
            cases = tuple(sorted(set(int(c) for c in cases_raw)))

    wbaf_raw = parser.get(data, "wbaf", "wbaf", dict, default={}) or {}
    wbaf = WbafGridSpec(
        delay_span_s=parser.positive(wbaf_raw, "delay_span_s", "wbaf.delay_span_s",
                                     float, default=None),
        num_delays=parser.positive(wbaf_raw, "num_delays", "wbaf.num_delays",
                                   int, default=81),
        eta_span=parser.positive(wbaf_raw, "eta_span", "wbaf.eta_span",
                                 float, default=None),
        num_etas=parser.positive(wbaf_raw, "num_etas", "wbaf.num_etas",
                                 int, default=81),
    )

    for i, wf in enumerate(waveforms):
        if sample_rate is not None and wf.sample_rate != sample_rate:
            parser.fail(f"waveforms[{i}].sample_rate",
                        f"must equal scenario.sample_rate ({sample_rate})")

    if parser.problems:
        raise ConfigError(parser.problems)

    target = TargetState.from_knots(Position2D(*target_pos), speed, heading,
                                    weight_tonnes=weight)
    try:
        scenario = Scenario(node1=nodes[0], node2=nodes[1], target=target,
                            sound_speed=sound_speed, sample_rate=sample_rate,
                            num_samples=passive_n, passive_window_s=passive_window)
    except ValueError as err:
        raise ConfigError([("scenario", str(err))]) from err

    names = []
    renamed = []
    for wf in waveforms:
        label = wf.label
        if label in names:
            label = f"{label}_{names.count(label) + 1}"
        names.append(wf.label)
        renamed.append(wf if wf.name == label else
                       WaveformConfig(**{**wf.__dict__, "name": label}))

    return SweepConfig(scenario=scenario, ar_coefficient=ar, environment=env_from(wind, freq),
                       waveforms=tuple(renamed), grid=grid, cases=cases, seed=seed,
                       wbaf=wbaf)


def env_from(wind: float, freq: float) -> Environment:
    return Environment(wind_speed_knots=wind, listening_frequency_khz=freq)


def load_config(path) -> SweepConfig:
    """Parse a JSON config file into a validated :class:`SweepConfig`."""
    try:
        data = json.loads(Path(path).read_text())
    except json.JSONDecodeError as err:
        raise ConfigError([(str(path), f"not valid JSON: {err}")]) from err
    return parse_config(data)


def config_echo(config: SweepConfig) -> dict:
    """JSON-serializable snapshot of a parsed config, for run metadata."""
    scen = config.scenario
    return {
        "scenario": {
            "nodes": [
                {"position": [n.origin.x, n.origin.y], "num_sensors": n.num_sensors,
                 "element_spacing": n.element_spacing}
                for n in (scen.node1, scen.node2)
            ],
            "target": {
                "position": [scen.target.position.x, scen.target.position.y],
                "velocity_mps": list(scen.target.velocity),
                "speed_knots": scen.target.speed_knots,
                "weight_tonnes": scen.target.weight_tonnes,
            },
            "sound_speed": scen.sound_speed,
            "sample_rate": scen.sample_rate,
            "passive_num_samples": scen.num_samples,
            "passive_window_s": scen.passive_window_s,
        },
        "noise": {"ar_coefficient": config.ar_coefficient},
        "environment": {
            "wind_speed_knots": config.environment.wind_speed_knots,
            "listening_frequency_khz": config.environment.listening_frequency_khz,
        },
        "waveforms": [dict(wf.__dict__) for wf in config.waveforms],
        "grid": dict(config.grid.__dict__),
        "cases": list(config.cases),
        "seed": config.seed,
    }
