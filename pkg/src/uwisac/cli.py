"""Command-line entry point.

Subcommands:
  sweep     grid sweep of the bounds, CSV + metadata output
  wbaf      ambiguity surfaces of the configured waveforms, CSV output
  compare   per-waveform Doppler-bound and ambiguity summary table
  mc-check  Monte-Carlo validation of the bound on the configured scenario

Point-level parallelism comes from ``--workers``; BLAS threading on top of
that oversubscribes small machines, so each process is pinned to one BLAS
thread unless the user overrides the environment explicitly.
"""

from __future__ import annotations

import argparse
import os
import sys


def _limit_blas_threads() -> None:
    for var in ("OPENBLAS_NUM_THREADS", "OMP_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ.setdefault(var, "1")


def _cmd_sweep(args) -> int:
    from .sweep import run_sweep

    config = _load(args)
    result = run_sweep(config, out_dir=args.out, workers=args.workers)
    print(f"wrote {len(result.files)} files to {args.out}")
    return 0


def _cmd_wbaf(args) -> int:
    from pathlib import Path

    import numpy as np

    from .waveforms import _rms_bandwidth_hz, _spectral_centroid_hz, generate, wbaf

    config = _load(args)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)
    spec = config.wbaf
    for wf_config in config.waveforms:
        wf = generate(wf_config)
        delay_span = spec.delay_span_s or 4.0 / _rms_bandwidth_hz(wf)
        eta_span = spec.eta_span or 3.0 / (_spectral_centroid_hz(wf) * wf.duration)
        delays = np.linspace(-delay_span, delay_span, spec.num_delays)
        etas = 1.0 + np.linspace(-eta_span, eta_span, spec.num_etas)
        surface = wbaf(wf, delays, etas)
        normalized = surface.normalized
        lines = ["delay_s,eta,chi_norm"]
        for ie, eta in enumerate(surface.etas):
            for id_, delay in enumerate(surface.delays):
                lines.append(f"{float(delay)!r},{float(eta)!r},"
                             f"{float(normalized[ie, id_])!r}")
        path = out_dir / f"wbaf_{wf_config.label}.csv"
        path.write_text("\n".join(lines) + "\n")
        print(f"wrote {path}")
    return 0


def _cmd_compare(args) -> int:
    from .sweep import compare_waveforms

    config = _load(args)
    table = compare_waveforms(config, workers=args.workers)
    print(table.format_table())
    return 0


def _cmd_mc_check(args) -> int:
    from .bistatic_fim import received_amplitude
    from .montecarlo import McInstance, mc_crlb_check
    from .noise import NoiseModel
    from .scenario import target_range
    from .sonar import passive_snr_db, snr_db_to_signal_power
    from .waveforms import generate

    config = _load(args)
    scen = config.scenario
    env = config.environment
    passive_noise = NoiseModel(config.ar_coefficient, scen.num_samples)
    sigma = []
    for gamma in (1, 2):
        snr = passive_snr_db(target_range(scen, gamma), env.listening_frequency_khz,
                             scen.target.speed_knots, scen.target.weight_tonnes,
                             env.wind_speed_knots)
        sigma.append(snr_db_to_signal_power(snr, passive_noise))
    waveform = generate(config.waveforms[0])
    bs_noise = NoiseModel(config.ar_coefficient, waveform.num_samples)
    amplitude = received_amplitude(scen, waveform, bs_noise, env)
    instance = McInstance(scenario=scen, waveform=waveform,
                          ar_coefficient=config.ar_coefficient,
                          sigma_s2_node1=sigma[0], sigma_s2_node2=sigma[1],
                          amplitude=amplitude)
    report = mc_crlb_check(instance, args.case, args.trials, args.seed)
    print(report.format_report())
    return 0 if report.bound_respected else 1


def _load(args):
    from dataclasses import replace

    from .config import ConfigError, load_config

    config = load_config(args.config)
    if getattr(args, "seed", None) is not None:
        config = replace(config, seed=args.seed)
    if getattr(args, "cases", None):
        cases = tuple(sorted({int(c) for c in args.cases.split(",")}))
        if not all(c in (1, 2, 3) for c in cases):
            raise ConfigError([("--cases", "entries must be 1, 2 or 3")])
        config = replace(config, cases=cases)
    return config


def main(argv=None) -> int:
    _limit_blas_threads()
    parser = argparse.ArgumentParser(
        prog="uwisac",
        description="Localization error bounds for a bistatic underwater "
                    "sensor pair using communication waveforms")
    sub = parser.add_subparsers(dest="command", required=True)

    p_sweep = sub.add_parser("sweep", help="grid sweep, CSV output")
    p_sweep.add_argument("--config", required=True, help="JSON config file")
    p_sweep.add_argument("--out", required=True, help="output directory")
    p_sweep.add_argument("--workers", type=int, default=1)
    p_sweep.add_argument("--cases", help="comma-separated subset of 1,2,3")
    p_sweep.add_argument("--seed", type=int, help="override the config seed")
    p_sweep.set_defaults(func=_cmd_sweep)

    p_wbaf = sub.add_parser("wbaf", help="ambiguity surfaces, CSV output")
    p_wbaf.add_argument("--config", required=True, help="JSON config file")
    p_wbaf.add_argument("--out", required=True, help="output directory")
    p_wbaf.set_defaults(func=_cmd_wbaf)

    p_cmp = sub.add_parser("compare", help="waveform comparison table")
    p_cmp.add_argument("--config", required=True, help="JSON config file")
    p_cmp.add_argument("--workers", type=int, default=1)
    p_cmp.set_defaults(func=_cmd_compare)

    p_mc = sub.add_parser("mc-check", help="Monte-Carlo bound validation")
    p_mc.add_argument("--config", required=True, help="JSON config file")
    p_mc.add_argument("--trials", type=int, required=True)
    p_mc.add_argument("--seed", type=int, default=0)
    p_mc.add_argument("--case", type=int, default=2, choices=(2, 3))
    p_mc.set_defaults(func=_cmd_mc_check)

    args = parser.parse_args(argv)
    from .config import ConfigError

    try:
        return args.func(args)
    except (ConfigError, ValueError) as err:
        print(f"error: {err}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
