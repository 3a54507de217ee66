"""Target-position grid sweeps of the localization bounds.

For every grid point the target is placed there (velocity fixed), the signal
parameters and sonar-equation SNRs are recomputed, the per-path information
matrices are assembled and fused per case, and the square-root bounds are
extracted.  Points where the geometry or numerics degenerate are flagged, not
fatal.  Output is one CSV per case (per waveform for the bistatic cases),
ratio maps of case 3 over case 2, and a run-metadata JSON.

Runs are deterministic: the same config and seed produce byte-identical CSVs
regardless of the worker count, because every point is computed independently
and results are gathered in grid order.
"""

from __future__ import annotations

import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .bistatic_fim import fim_bistatic, received_amplitude
from .config import SweepConfig, config_echo
from .crlb import CrlbResult, crlb, fuse
from .noise import NoiseModel
from .passive_fim import ConditioningError, fim_passive
from .scenario import DegenerateGeometryError, target_range
from .sonar import passive_snr_db, snr_db_to_signal_power
from .waveforms import SampledWaveform, generate

CSV_HEADER = "x_m,y_m,sqrt_crlb_p_m,sqrt_crlb_eta,flag"
RATIO_HEADER = "x_m,y_m,ratio,flag"

#: Key of one output grid: (case id, waveform label or None for case 1).
GridKey = tuple[int, "str | None"]


@dataclass(eq=False)
class CaseGrid:
    """Bounds of one (case, waveform) combination over the sweep grid."""

    sqrt_p: np.ndarray    # (ny, nx), NaN where flagged
    sqrt_eta: np.ndarray  # (ny, nx), NaN where flagged
    flags: np.ndarray     # (ny, nx) object array of flag strings
    cond: np.ndarray      # (ny, nx) equilibrated condition numbers


@dataclass(eq=False)
class SweepResult:
    """In-memory view of one sweep run."""

    xs: np.ndarray
    ys: np.ndarray
    grids: dict[GridKey, CaseGrid]
    ratios: dict[str, dict[str, CaseGrid]]
    files: list[str]


def case_keys(config: SweepConfig) -> list[GridKey]:
    """Deterministic output ordering of the (case, waveform) combinations."""
    keys: list[GridKey] = []
    for case in config.cases:
        if case == 1:
            keys.append((1, None))
        else:
            keys.extend((case, wf.label) for wf in config.waveforms)
    return keys


def _singular(case_id: int) -> CrlbResult:
    return CrlbResult(None, None, case_id, np.inf)


def _evaluate_point(config: SweepConfig, waveforms: list[SampledWaveform],
                    x: float, y: float) -> dict[GridKey, CrlbResult]:
    keys = case_keys(config)
    scen = config.scenario.with_target_position(x, y)

    try:
        r1 = target_range(scen, 1)
        r2 = target_range(scen, 2)
    except DegenerateGeometryError:
        return {key: _singular(key[0]) for key in keys}

    env = config.environment
    passive_noise = NoiseModel(config.ar_coefficient, scen.num_samples)

    zero = np.zeros((3, 3))
    passive_fims = None
    if any(case in (1, 2) for case in config.cases):
        try:
            fims = []
            for node_index, r in ((1, r1), (2, r2)):
                snr = passive_snr_db(r, env.listening_frequency_khz,
                                     scen.target.speed_knots,
                                     scen.target.weight_tonnes,
                                     env.wind_speed_knots)
                sigma_s2 = snr_db_to_signal_power(snr, passive_noise)
                fims.append(fim_passive(scen, node_index, sigma_s2, passive_noise))
            passive_fims = fims
        except (ConditioningError, DegenerateGeometryError):
            passive_fims = None

    bistatic_fims: dict[str, np.ndarray | None] = {}
    if any(case in (2, 3) for case in config.cases):
        for wf in waveforms:
            try:
                bs_noise = NoiseModel(config.ar_coefficient, wf.num_samples)
                amp = received_amplitude(scen, wf, bs_noise, env)
                bistatic_fims[wf.label] = fim_bistatic(scen, wf, bs_noise, amp)
            except (ConditioningError, DegenerateGeometryError):
                bistatic_fims[wf.label] = None

    results: dict[GridKey, CrlbResult] = {}
    for case, label in keys:
        if case in (1, 2) and passive_fims is None:
            results[(case, label)] = _singular(case)
            continue
        if case in (2, 3) and bistatic_fims.get(label) is None:
            results[(case, label)] = _singular(case)
            continue
        n1, n2 = passive_fims if passive_fims is not None else (zero, zero)
        bs = bistatic_fims[label] if label is not None else zero
        results[(case, label)] = crlb(fuse(case, n1, n2, bs), case)
    return results


_WORKER_STATE: dict = {}


def _init_worker(config: SweepConfig) -> None:
    _WORKER_STATE["config"] = config
    _WORKER_STATE["waveforms"] = [generate(wc).warmup() for wc in config.waveforms]


def _point_task(point: tuple[float, float]) -> dict[GridKey, CrlbResult]:
    return _evaluate_point(_WORKER_STATE["config"], _WORKER_STATE["waveforms"], *point)


def _flag_of(result: CrlbResult) -> str:
    parts = []
    if result.position_singular:
        parts.append("p")
    if result.eta_singular:
        parts.append("eta")
    return ";".join(parts)


def run_sweep(config: SweepConfig, out_dir=None, workers: int = 1) -> SweepResult:
    """Evaluate every grid point for every configured case and waveform.

    With ``out_dir`` set, CSVs, ratio maps and run metadata are written there.
    """
    if config.scenario.target.speed_knots <= 0.0:
        raise ValueError("sweep requires a positive target speed")
    if workers < 1:
        raise ValueError("workers must be >= 1")
    start_time = time.monotonic()

    xs = config.grid.xs()
    ys = config.grid.ys()
    points = [(float(x), float(y)) for y in ys for x in xs]

    if workers == 1:
        _init_worker(config)
        outcomes = [_point_task(point) for point in points]
        _WORKER_STATE.clear()
    else:
        with ProcessPoolExecutor(max_workers=workers, initializer=_init_worker,
                                 initargs=(config,)) as pool:
            chunk = max(1, len(points) // (workers * 4))
            outcomes = list(pool.map(_point_task, points, chunksize=chunk))

    keys = case_keys(config)
    grids: dict[GridKey, CaseGrid] = {}
    for key in keys:
        shape = (ys.size, xs.size)
        grids[key] = CaseGrid(sqrt_p=np.full(shape, np.nan),
                              sqrt_eta=np.full(shape, np.nan),
                              flags=np.full(shape, "", dtype=object),
                              cond=np.full(shape, np.inf))
    for idx, outcome in enumerate(outcomes):
        iy, ix = divmod(idx, xs.size)
        for key in keys:
            result = outcome[key]
            grid = grids[key]
            if result.sqrt_crlb_position is not None:
                grid.sqrt_p[iy, ix] = result.sqrt_crlb_position
            if result.sqrt_crlb_eta is not None:
                grid.sqrt_eta[iy, ix] = result.sqrt_crlb_eta
            grid.flags[iy, ix] = _flag_of(result)
            grid.cond[iy, ix] = result.condition_number

    ratios = _ratio_grids(config, grids)
    result = SweepResult(xs=xs, ys=ys, grids=grids, ratios=ratios, files=[])
    if out_dir is not None:
        result.files = _write_outputs(config, result, Path(out_dir),
                                      time.monotonic() - start_time)
    return result


def _ratio_grids(config: SweepConfig, grids: dict[GridKey, CaseGrid]
                 ) -> dict[str, dict[str, CaseGrid]]:
    """Case-3-over-case-2 ratio maps per waveform, where both are present."""
    ratios: dict[str, dict[str, CaseGrid]] = {}
    if not (2 in config.cases and 3 in config.cases):
        return ratios
    for wf in config.waveforms:
        g2 = grids[(2, wf.label)]
        g3 = grids[(3, wf.label)]
        per_kind = {}
        for kind, a2, a3 in (("position", g2.sqrt_p, g3.sqrt_p),
                             ("doppler", g2.sqrt_eta, g3.sqrt_eta)):
            with np.errstate(invalid="ignore", divide="ignore"):
                values = a3 / a2
            ok = np.isfinite(values)
            flags = np.where(ok, "", "ratio")
            values = np.where(ok, values, np.nan)
            per_kind[kind] = CaseGrid(sqrt_p=values, sqrt_eta=values,
                                      flags=flags.astype(object),
                                      cond=np.maximum(g2.cond, g3.cond))
        ratios[wf.label] = per_kind
    return ratios


def _fmt(value: float) -> str:
    return "" if not np.isfinite(value) else repr(float(value))


def _rows(xs: np.ndarray, ys: np.ndarray):
    for iy, y in enumerate(ys):
        for ix, x in enumerate(xs):
            yield iy, ix, float(x), float(y)


def _write_case_csv(path: Path, xs, ys, grid: CaseGrid) -> None:
    lines = [CSV_HEADER]
    for iy, ix, x, y in _rows(xs, ys):
        lines.append(f"{x!r},{y!r},{_fmt(grid.sqrt_p[iy, ix])},"
                     f"{_fmt(grid.sqrt_eta[iy, ix])},{grid.flags[iy, ix]}")
    path.write_text("\n".join(lines) + "\n")


def _write_ratio_csv(path: Path, xs, ys, grid: CaseGrid) -> None:
    lines = [RATIO_HEADER]
    for iy, ix, x, y in _rows(xs, ys):
        lines.append(f"{x!r},{y!r},{_fmt(grid.sqrt_p[iy, ix])},{grid.flags[iy, ix]}")
    path.write_text("\n".join(lines) + "\n")


def _write_outputs(config: SweepConfig, result: SweepResult, out_dir: Path,
                   wall_time_s: float) -> list[str]:
    out_dir.mkdir(parents=True, exist_ok=True)
    files = []
    for key in case_keys(config):
        case, label = key
        name = f"case{case}.csv" if label is None else f"case{case}_{label}.csv"
        _write_case_csv(out_dir / name, result.xs, result.ys, result.grids[key])
        files.append(name)
    for label, per_kind in result.ratios.items():
        for kind, grid in per_kind.items():
            name = f"ratio_{kind}_{label}.csv"
            _write_ratio_csv(out_dir / name, result.xs, result.ys, grid)
            files.append(name)

    import scipy

    from . import __version__

    metadata = {
        "config": config_echo(config),
        "seed": config.seed,
        "files": files,
        "grid_points": int(result.xs.size * result.ys.size),
        "versions": {"uwisac": __version__, "numpy": np.__version__,
                     "scipy": scipy.__version__},
        "wall_time_s": wall_time_s,
    }
    (out_dir / "run_metadata.json").write_text(
        json.dumps(metadata, indent=2, sort_keys=True) + "\n")
    files.append("run_metadata.json")
    return files


@dataclass(frozen=True)
class WaveformComparison:
    """Per-waveform Doppler-bound and ambiguity summary over one grid."""

    rows: tuple[dict, ...]

    def format_table(self) -> str:
        columns = ("waveform", "duration_s", "median_sqrt_crlb_eta",
                   "max_sqrt_crlb_eta", "doppler_mainlobe_width",
                   "delay_mainlobe_width_s")
        header = "  ".join(f"{c:>24}" for c in columns)
        lines = [header]
        for row in self.rows:
            cells = []
            for c in columns:
                v = row[c]
                cells.append(f"{v:>24}" if isinstance(v, str) else f"{v:>24.6e}")
            lines.append("  ".join(cells))
        return "\n".join(lines)


def compare_waveforms(config: SweepConfig, workers: int = 1) -> WaveformComparison:
    """Sweep case 2 for every configured waveform and summarize the Doppler
    bounds next to the ambiguity mainlobe metrics."""
    from .waveforms import delay_mainlobe_width, doppler_mainlobe_width

    if len(config.waveforms) < 2:
        raise ValueError("compare_waveforms needs at least two waveforms")
    sweep_config = config if 2 in config.cases else replace(config, cases=(2,))
    result = run_sweep(sweep_config, out_dir=None, workers=workers)

    rows = []
    for wf_config in config.waveforms:
        wf = generate(wf_config)
        grid = result.grids[(2, wf_config.label)]
        finite = grid.sqrt_eta[np.isfinite(grid.sqrt_eta)]
        if finite.size == 0:
            raise ConditioningError(
                f"no finite Doppler bounds for waveform {wf_config.label}")
        rows.append({
            "waveform": wf_config.label,
            "duration_s": wf.duration,
            "median_sqrt_crlb_eta": float(np.median(finite)),
            "max_sqrt_crlb_eta": float(np.max(finite)),
            "doppler_mainlobe_width": doppler_mainlobe_width(wf),
            "delay_mainlobe_width_s": delay_mainlobe_width(wf),
        })
    return WaveformComparison(rows=tuple(rows))
