"""Mean-form Fisher information of the bistatic communication path.

One node transmits a known communication waveform; the other node's array
receives the target-reflected copy, time-scaled by the Doppler factor and
delayed by the bistatic plus per-element delays.  The direct-path copy is
assumed decoded and removed, so only the reflected path informs the bound.
Because the signal is deterministic, the information is the Jacobian of the
mean pushed through the inverse noise covariance.

The nodes exchange bursts (each sends its bearing measurement to the other),
so by default the bistatic information sums the two one-way links: the echo
of node 1's transmission sensed by node 2's array plus the echo of node 2's
transmission sensed by node 1's array.  Both links share the Doppler scale
and the bistatic delay; only the sensing array differs.  Single-link
quantities remain available through the ``receiver_node`` arguments.

The received amplitude is tied to the sonar equation: the transmit power is
the configured waveform energy divided by 40 (so the default energy of 40
transmits at 1 W), and the received per-sample power realizes the active-path
SNR at the evaluation geometry (symmetric in the two ranges, hence shared by
both links).
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .noise import NoiseModel, ar1_apply_precision
from .scenario import (Scenario, bistatic_delay, doppler_scale, intersensor_delay,
                       k_derivatives, target_range)
from .sonar import Environment, active_snr_db, snr_db_to_signal_power
from .waveforms import SampledWaveform

#: Waveform energy that corresponds to a 1 W transmit power.
REFERENCE_ENERGY_AT_1W = 40.0

#: Default sensing array for single-link quantities (echo of node 1's
#: transmission).
RECEIVER_NODE = 2

#: Sensing arrays of the full two-way exchange.
EXCHANGE_RECEIVERS = (1, 2)


@dataclass(frozen=True, eq=False)
class BistaticJacobian:
    """Columns d(mean)/d(x), d(mean)/d(y), d(mean)/d(doppler scale), each a
    stacked per-element sequence of length M N."""

    matrix: np.ndarray       # (M N, 3)
    window_times: np.ndarray


def _check_rates(scenario: Scenario, waveform: SampledWaveform) -> None:
    if not math.isclose(waveform.sample_rate, scenario.sample_rate, rel_tol=1e-12):
        raise ValueError(
            f"waveform rate {waveform.sample_rate} Hz differs from scenario rate "
            f"{scenario.sample_rate} Hz")


def bistatic_window_times(scenario: Scenario, waveform: SampledWaveform,
                          window_start: float | None = None) -> np.ndarray:
    """Observation instants of the bistatic window: one waveform duration,
    anchored at the true bistatic arrival unless overridden."""
    _check_rates(scenario, waveform)
    if window_start is None:
        window_start = bistatic_delay(scenario)
    return window_start + np.arange(waveform.num_samples) * waveform.sample_interval


def bistatic_mean(scenario: Scenario, waveform: SampledWaveform,
                  amplitude: float = 1.0, window_start: float | None = None,
                  receiver_node: int = RECEIVER_NODE) -> np.ndarray:
    """Stacked noise-free received sequence at one sensing array's elements.

    Keeping ``window_start`` fixed while perturbing the scenario isolates the
    parameter dependence of the mean from the window placement, which is what
    the information matrix differentiates.
    """
    times = bistatic_window_times(scenario, waveform, window_start)
    eta = doppler_scale(scenario)
    tau0 = bistatic_delay(scenario)
    node = scenario.node(receiver_node)

    blocks = []
    for m in range(1, node.num_sensors + 1):
        tau_m = intersensor_delay(scenario, receiver_node, m)
        blocks.append(amplitude * waveform.evaluate(eta, tau0 + tau_m, times))
    mean = np.concatenate(blocks)
    if amplitude != 0.0 and waveform.energy > 0.0 and not np.any(mean):
        warnings.warn("bistatic delays push the signal outside the observation "
                      "window; the mean is identically zero", RuntimeWarning)
    return mean


def bistatic_jacobian(scenario: Scenario, waveform: SampledWaveform,
                      amplitude: float = 1.0, window_start: float | None = None,
                      receiver_node: int = RECEIVER_NODE) -> BistaticJacobian:
    """Derivative of one link's mean with respect to (x, y, doppler scale).

    Each column is the waveform's time derivative at the scaled-delayed
    argument times the corresponding derivative of that argument.
    """
    times = bistatic_window_times(scenario, waveform, window_start)
    eta = doppler_scale(scenario)
    tau0 = bistatic_delay(scenario)
    node = scenario.node(receiver_node)

    columns = np.empty((node.num_sensors * times.size, 3))
    for m in range(1, node.num_sensors + 1):
        tau_m = intersensor_delay(scenario, receiver_node, m)
        sprime = amplitude * waveform.evaluate_derivative(eta, tau0 + tau_m, times)
        dk_deta, dk_dp = k_derivatives(scenario, receiver_node, m, times)
        row = slice((m - 1) * times.size, m * times.size)
        columns[row, 0] = sprime * dk_dp[0]
        columns[row, 1] = sprime * dk_dp[1]
        columns[row, 2] = sprime * dk_deta
    return BistaticJacobian(matrix=columns, window_times=times)


def transmit_power_watt(waveform: SampledWaveform) -> float:
    """Transmit power implied by the waveform energy (1 W at energy 40)."""
    return waveform.energy / REFERENCE_ENERGY_AT_1W


def received_amplitude(scenario: Scenario, waveform: SampledWaveform,
                       noise: NoiseModel, environment: Environment) -> float:
    """Amplitude scaling that makes the per-element received signal power
    match the active-path sonar-equation SNR at the current geometry."""
    r1 = target_range(scenario, 1)
    r2 = target_range(scenario, 2)
    snr = active_snr_db(transmit_power_watt(waveform), r1, r2,
                        environment.listening_frequency_khz,
                        environment.wind_speed_knots)
    power = snr_db_to_signal_power(snr, noise)
    return math.sqrt(power * waveform.num_samples / waveform.energy)


def fim_bistatic(scenario: Scenario, waveform: SampledWaveform,
                 noise: NoiseModel, amplitude: float = 1.0,
                 receiver_nodes: tuple[int, ...] = EXCHANGE_RECEIVERS) -> np.ndarray:
    """3x3 information matrix of the bistatic path, J^T R^-1 J per link.

    By default both directions of the exchange contribute (independent noise,
    so the links add at the information level); pass a single-entry tuple for
    one-way analysis.  The noise covariance is block diagonal with one AR(1)
    block per element, so the inverse is applied with the closed-form
    tridiagonal stencil.
    """
    if noise.num_samples != waveform.num_samples:
        raise ValueError("noise model sample count must match the waveform length")
    n = waveform.num_samples
    fim = np.zeros((3, 3))
    for receiver in receiver_nodes:
        jac = bistatic_jacobian(scenario, waveform, amplitude,
                                receiver_node=receiver)
        for m in range(scenario.node(receiver).num_sensors):
            block = jac.matrix[m * n:(m + 1) * n, :]
            fim += block.T @ ar1_apply_precision(noise, block)
    return 0.5 * (fim + fim.T)
