"""Shared scenario builders and independent numerical oracles."""

import numpy as np

from uwisac.scenario import Position2D, Scenario, SensorNode, TargetState
from uwisac.waveforms import SampledWaveform, pcmfsk_like_config


def make_scenario(target=(0.0, 1000.0), velocity=(0.0, 5.0), nodes=(-1000.0, 1000.0),
                  num_sensors=4, spacing=0.125, num_samples=128, sample_rate=24000.0,
                  node_y=(0.0, 0.0)):
    return Scenario(
        node1=SensorNode(Position2D(nodes[0], node_y[0]), num_sensors, spacing),
        node2=SensorNode(Position2D(nodes[1], node_y[1]), num_sensors, spacing),
        target=TargetState(position=Position2D(*target), velocity=tuple(velocity)),
        sample_rate=sample_rate, num_samples=num_samples)


def random_scenario(rng, num_samples=16, max_sensors=4):
    """Non-degenerate random geometry: target kept at least 100 m from both
    nodes, arbitrary heading and moderate speed."""
    half_baseline = rng.uniform(300.0, 1500.0)
    node_y = rng.uniform(-200.0, 200.0, size=2)
    while True:
        r = rng.uniform(200.0, 3000.0)
        angle = rng.uniform(0.0, 2.0 * np.pi)
        target = (r * np.cos(angle), r * np.sin(angle))
        d1 = np.hypot(target[0] + half_baseline, target[1] - node_y[0])
        d2 = np.hypot(target[0] - half_baseline, target[1] - node_y[1])
        if min(d1, d2) > 100.0:
            break
    speed = rng.uniform(0.5, 8.0)
    heading = rng.uniform(0.0, 2.0 * np.pi)
    return make_scenario(
        target=target,
        velocity=(speed * np.cos(heading), speed * np.sin(heading)),
        nodes=(-half_baseline, half_baseline), node_y=tuple(node_y),
        num_sensors=int(rng.integers(2, max_sensors + 1)),
        spacing=float(rng.uniform(0.08, 0.3)),
        num_samples=num_samples)


def move_target(scenario, dx=0.0, dy=0.0):
    p = scenario.target.position
    return scenario.with_target_position(p.x + dx, p.y + dy)


def central_diff(f, scenario, axis, h):
    """Central finite difference of a scenario scalar/network in x or y."""
    plus = move_target(scenario, *((h, 0.0) if axis == 0 else (0.0, h)))
    minus = move_target(scenario, *((-h, 0.0) if axis == 0 else (0.0, -h)))
    return (f(plus) - f(minus)) / (2.0 * h)


def toy_waveform_config(**overrides):
    """Small low-rate FSK burst for fast bistatic tests.  The guard is kept
    generous so the band-limited extension is deeply quiet at the support
    edges (finite-difference probes cross them)."""
    base = dict(seed=3, frame_length=96, num_bits=16, mary=4, tones=4,
                center_frequency=2000.0, bandwidth=1000.0,
                sample_rate=8000.0, energy=8.0, guard_fraction=0.12)
    base.update(overrides)
    return pcmfsk_like_config(**base)


def bandlimited_eval(waveform: SampledWaveform, t):
    """Direct trigonometric reconstruction from the DFT coefficients: the
    exact band-limited extension the interpolant approximates.  Slow, for
    oracles only."""
    s = waveform.samples
    n = s.size
    fs = waveform.sample_rate
    spectrum = np.fft.rfft(s)
    t = np.atleast_1d(np.asarray(t, dtype=float))
    out = np.full(t.shape, spectrum[0].real / n)
    for k in range(1, spectrum.size):
        fk = k * fs / n
        if k == spectrum.size - 1 and n % 2 == 0:
            out += spectrum[k].real * np.cos(2 * np.pi * fk * t) / n
        else:
            out += 2.0 * (spectrum[k].real * np.cos(2 * np.pi * fk * t)
                          - spectrum[k].imag * np.sin(2 * np.pi * fk * t)) / n
    out[(t < 0.0) | (t > (n - 1) / fs)] = 0.0
    return out


def inversion_slack(value_a, cond_a, value_b, cond_b, base=1e-9):
    """Numerical allowance for comparing two independently inverted bounds.

    The underlying matrix inequality is exact; the extracted square-root
    bounds each carry first-order inversion roundoff of order
    eps * condition * value, which dwarfs any fixed absolute tolerance when
    the equilibrated conditioning reaches 1e9 at far/endfire grid points.
    """
    eps = np.finfo(float).eps
    return base + 8.0 * eps * (np.abs(value_a) * cond_a + np.abs(value_b) * cond_b)


def fd_step_for_position(scenario, waveform, axis):
    """Position step that keeps the carrier-phase change of the bistatic
    argument small enough for a central difference to sit in the linear
    regime (cubic phase term below 1e-5 relative)."""
    from uwisac.scenario import k_derivatives

    node = scenario.node(2)
    rates = []
    for m in (1, node.num_sensors):
        _, dk_dp = k_derivatives(scenario, 2, m, 0.0)
        rates.append(abs(dk_dp[axis]))
    fc = waveform.config.center_frequency if waveform.config else 2000.0
    return 0.008 / (2.0 * np.pi * fc * max(max(rates), 1e-12))
