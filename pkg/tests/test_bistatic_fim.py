import itertools

import numpy as np
import pytest
from numpy.testing import assert_allclose

from helpers import (bandlimited_eval, fd_step_for_position, make_scenario,
                     move_target, toy_waveform_config)
from uwisac.bistatic_fim import (bistatic_jacobian, bistatic_mean, bistatic_window_times,
                                 fim_bistatic, received_amplitude, transmit_power_watt)
from uwisac.noise import NoiseModel, spatial_block_covariance
from uwisac.scenario import bistatic_delay, doppler_scale, intersensor_delay
from uwisac.sonar import Environment
from uwisac.waveforms import SampledWaveform, generate


@pytest.fixture(scope="module")
def toy_wf():
    return generate(toy_waveform_config()).warmup()


def toy_scenario(target=(150.0, 600.0), velocity=(1.0, 3.0), num_sensors=2):
    return make_scenario(target=target, velocity=velocity, nodes=(-400.0, 400.0),
                         num_sensors=num_sensors, num_samples=8, sample_rate=8000.0)


def test_mean_reduces_to_waveform(toy_wf):
    scen = toy_scenario(velocity=(0.0, 0.0), num_sensors=1)
    mean = bistatic_mean(scen, toy_wf)
    assert_allclose(mean, toy_wf.samples, atol=1e-12)


def test_mean_identical_rows_at_broadside(toy_wf):
    # Receiver sees the target at its own y: zero element delays.
    scen = toy_scenario(target=(150.0, 0.0), num_sensors=3)
    mean = bistatic_mean(scen, toy_wf)
    n = toy_wf.num_samples
    rows = mean.reshape(3, n)
    assert_allclose(rows[1], rows[0], atol=1e-15)
    assert_allclose(rows[2], rows[0], atol=1e-15)


def test_mean_matches_direct_evaluation_oracle(toy_wf):
    scen = toy_scenario(num_sensors=2)
    amp = 1.3
    mean = bistatic_mean(scen, toy_wf, amplitude=amp)
    times = bistatic_window_times(scen, toy_wf)
    eta = doppler_scale(scen)
    tau0 = bistatic_delay(scen)
    n = toy_wf.num_samples
    for m in (1, 2):
        tau = tau0 + intersensor_delay(scen, 2, m)
        ref = amp * bandlimited_eval(toy_wf, eta * (times - tau))
        rms = np.sqrt(np.mean(ref ** 2))
        block = mean[(m - 1) * n:m * n]
        assert np.sqrt(np.mean((block - ref) ** 2)) < 1e-4 * rms


def test_mean_rate_mismatch_rejected(toy_wf):
    scen = toy_scenario()
    bad = make_scenario(target=(150.0, 600.0), nodes=(-400.0, 400.0),
                        sample_rate=24000.0, num_samples=8)
    with pytest.raises(ValueError):
        bistatic_mean(bad, toy_wf)
    assert bistatic_mean(scen, toy_wf).size == 2 * toy_wf.num_samples


def test_mean_support_exhaustion_warns(toy_wf):
    scen = toy_scenario()
    with pytest.warns(RuntimeWarning):
        mean = bistatic_mean(scen, toy_wf, window_start=bistatic_delay(scen) + 100.0)
    assert_allclose(mean, 0.0)


def test_fim_zero_waveform_is_zero():
    scen = toy_scenario()
    zero = SampledWaveform(np.zeros(64), scen.sample_rate)
    fim = fim_bistatic(scen, zero, NoiseModel(0.5, 64), amplitude=1.0)
    assert_allclose(fim, 0.0, atol=1e-15)


def test_fim_white_noise_reduces_to_gram(toy_wf):
    scen = toy_scenario()
    noise = NoiseModel(0.0, toy_wf.num_samples)
    jac = bistatic_jacobian(scen, toy_wf, amplitude=2.0).matrix
    fim = fim_bistatic(scen, toy_wf, noise, amplitude=2.0, receiver_nodes=(2,))
    assert_allclose(fim, jac.T @ jac, rtol=1e-12, atol=1e-9)


def test_fim_matches_dense_covariance(toy_wf):
    scen = toy_scenario()
    noise = NoiseModel(0.45, toy_wf.num_samples)
    jac = bistatic_jacobian(scen, toy_wf, amplitude=1.0).matrix
    dense = spatial_block_covariance(noise, 2)
    expected = jac.T @ np.linalg.solve(dense, jac)
    single = fim_bistatic(scen, toy_wf, noise, amplitude=1.0, receiver_nodes=(2,))
    assert_allclose(single, expected, rtol=1e-9, atol=1e-9)


def test_jacobian_matches_fd_of_mean(toy_wf):
    scen = toy_scenario()
    amp = 1.5
    anchor = bistatic_delay(scen)
    jac = bistatic_jacobian(scen, toy_wf, amplitude=amp).matrix

    for axis in range(2):
        h = fd_step_for_position(scen, toy_wf, axis)
        delta = (h, 0.0) if axis == 0 else (0.0, h)
        plus = bistatic_mean(move_target(scen, *delta), toy_wf, amp, window_start=anchor)
        minus = bistatic_mean(move_target(scen, -delta[0], -delta[1]), toy_wf, amp,
                              window_start=anchor)
        fd = (plus - minus) / (2 * h)
        rel = np.linalg.norm(fd - jac[:, axis]) / np.linalg.norm(jac[:, axis])
        assert rel < 1e-4

    # Doppler-scale column: perturb the scale as a free parameter.
    eta0 = doppler_scale(scen)
    tau0 = bistatic_delay(scen)
    times = bistatic_window_times(scen, toy_wf)

    def mean_at_eta(eta):
        blocks = [amp * toy_wf.evaluate(eta, tau0 + intersensor_delay(scen, 2, m), times)
                  for m in (1, 2)]
        return np.concatenate(blocks)

    de = 1e-6
    fd = (mean_at_eta(eta0 + de) - mean_at_eta(eta0 - de)) / (2 * de)
    rel = np.linalg.norm(fd - jac[:, 2]) / np.linalg.norm(jac[:, 2])
    assert rel < 1e-4


def curvature_oracle(scen, wf, noise, amp, steps):
    """Numerical Hessian of the quadratic mismatch of the mean."""
    anchor = bistatic_delay(scen)
    eta0 = doppler_scale(scen)
    x0, y0 = scen.target.position.x, scen.target.position.y
    dense = spatial_block_covariance(noise, scen.node2.num_sensors)
    inv = np.linalg.inv(dense)

    def mean_at(dx, dy, de):
        cand = scen.with_target_position(x0 + dx, y0 + dy)
        times = anchor + np.arange(wf.num_samples) * wf.sample_interval
        tau0 = bistatic_delay(cand)
        blocks = [amp * wf.evaluate(eta0 + de, tau0 + intersensor_delay(cand, 2, m), times)
                  for m in range(1, scen.node2.num_sensors + 1)]
        return np.concatenate(blocks)

    mu0 = mean_at(0.0, 0.0, 0.0)

    def q(d):
        r = mean_at(*d) - mu0
        return 0.5 * r @ inv @ r

    hess = np.zeros((3, 3))
    for i in range(3):
        e = np.zeros(3)
        e[i] = steps[i]
        hess[i, i] = (q(e) + q(-e)) / steps[i] ** 2
    for i, j in itertools.combinations(range(3), 2):
        ei, ej = np.zeros(3), np.zeros(3)
        ei[i], ej[j] = steps[i], steps[j]
        hess[i, j] = hess[j, i] = (q(ei + ej) - q(ei - ej) - q(-ei + ej)
                                   + q(-ei - ej)) / (4 * steps[i] * steps[j])
    return hess


def test_fim_matches_curvature_oracle(toy_wf):
    scen = toy_scenario()
    noise = NoiseModel(0.4, toy_wf.num_samples)
    amp = 1.5
    fim = fim_bistatic(scen, toy_wf, noise, amplitude=amp, receiver_nodes=(2,))
    steps = (fd_step_for_position(scen, toy_wf, 0) / 5.0,
             fd_step_for_position(scen, toy_wf, 1) / 5.0, 4e-6)
    oracle = curvature_oracle(scen, toy_wf, noise, amp, steps)
    assert np.max(np.abs(fim - oracle)) / np.max(np.abs(oracle)) < 1e-3


def test_fim_linear_in_energy(toy_wf):
    scen = toy_scenario()
    noise = NoiseModel(0.4, toy_wf.num_samples)
    base = fim_bistatic(scen, toy_wf, noise, amplitude=1.0)
    doubled_wf = SampledWaveform(np.sqrt(2.0) * toy_wf.samples, toy_wf.sample_rate)
    doubled = fim_bistatic(scen, doubled_wf, noise, amplitude=1.0)
    assert_allclose(doubled, 2.0 * base, rtol=1e-9)


def test_doppler_entry_grows_quadratically_with_duration():
    scen = toy_scenario()
    fs = scen.sample_rate
    f0 = 1000.0
    energy = 4.0

    def tone(n):
        t = np.arange(n) / fs
        s = np.sin(np.pi * t / (n / fs)) ** 2 * np.cos(2 * np.pi * f0 * t)
        return SampledWaveform(s * np.sqrt(energy / np.sum(s ** 2)), fs)

    short, long_ = tone(256), tone(512)
    f_short = fim_bistatic(scen, short, NoiseModel(0.0, 256), amplitude=1.0,
                           receiver_nodes=(2,))
    f_long = fim_bistatic(scen, long_, NoiseModel(0.0, 512), amplitude=1.0,
                          receiver_nodes=(2,))
    ratio = f_long[2, 2] / f_short[2, 2]
    assert 3.0 < ratio < 5.0


def test_fim_symmetric_psd(toy_wf):
    scen = toy_scenario()
    fim = fim_bistatic(scen, toy_wf, NoiseModel(0.3, toy_wf.num_samples), 1.7)
    assert_allclose(fim, fim.T, atol=1e-9 * np.abs(fim).max())
    assert np.linalg.eigvalsh(fim).min() >= -1e-9 * np.trace(fim)


def test_received_amplitude_scaling(toy_wf):
    scen = toy_scenario()
    noise = NoiseModel(0.5, toy_wf.num_samples)
    env = Environment(wind_speed_knots=6.0, listening_frequency_khz=2.0)
    amp = received_amplitude(scen, toy_wf, noise, env)
    assert amp > 0.0
    assert transmit_power_watt(toy_wf) == pytest.approx(toy_wf.energy / 40.0)
    # Doubling the transmit energy leaves the SNR-matched per-sample power
    # twice as large, so the amplitude gain cancels to sqrt(2) on the mean.
    double = SampledWaveform(np.sqrt(2.0) * toy_wf.samples, toy_wf.sample_rate,
                             config=toy_wf.config, family=toy_wf.family)
    amp2 = received_amplitude(scen, double, noise, env)
    assert amp2 == pytest.approx(amp, rel=1e-12)


def test_default_fim_sums_both_links(toy_wf):
    scen = toy_scenario()
    noise = NoiseModel(0.4, toy_wf.num_samples)
    both = fim_bistatic(scen, toy_wf, noise, amplitude=1.2)
    rx1 = fim_bistatic(scen, toy_wf, noise, amplitude=1.2, receiver_nodes=(1,))
    rx2 = fim_bistatic(scen, toy_wf, noise, amplitude=1.2, receiver_nodes=(2,))
    assert_allclose(both, rx1 + rx2, rtol=1e-12, atol=1e-12)
