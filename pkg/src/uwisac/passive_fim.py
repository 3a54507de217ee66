"""Covariance-form Fisher information of the passively received signal.

The target radiates a zero-mean white Gaussian sequence.  Each array element
of a node observes that sequence through a circular fractional-delay operator
realized by trigonometric interpolation: a unitary DFT, a per-element diagonal
phase spectrum, and the inverse DFT.  The measurement covariance is then
sigma_s^2 D D^T plus the block AR(1) noise covariance, and the information
about the target position flows through the delay operator's dependence on
the per-element delays.  The Doppler scale does not enter this covariance, so
its row and column of the information matrix are structurally zero.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import cho_factor, cho_solve, circulant

from .noise import NoiseModel, spatial_block_covariance
from .scenario import Scenario, intersensor_delay, signal_param_gradients

#: Covariances with a larger estimated condition number are refused rather
#: than silently amplifying roundoff.
CONDITION_LIMIT = 1e12


class ConditioningError(RuntimeError):
    """A covariance factorization failed or is numerically unusable."""


@dataclass(frozen=True, eq=False)
class DelayOperator:
    """Assembled fractional-delay operator of one node.

    ``spectra`` holds the per-element diagonal (M, N); ``matrix`` the real
    assembled operator (M N, N).  ``max_imag`` records the largest imaginary
    magnitude discarded during assembly; the conjugate-symmetric spectrum
    structure keeps it at roundoff level.
    """

    node_index: int
    delays: np.ndarray
    spectra: np.ndarray
    matrix: np.ndarray
    max_imag: float


def _passive_grid(scenario: Scenario) -> tuple[int, float]:
    n = scenario.num_samples
    if n % 2 != 0:
        raise ValueError("passive sample count must be even")
    return n, scenario.passive_sample_interval


def delay_spectrum(tau: float, num_samples: int, sample_interval: float) -> np.ndarray:
    """Diagonal DFT spectrum of a circular delay by ``tau`` seconds.

    Bins below half rate rotate as exp(-j 2 pi k tau / (N T)), the mirrored
    bins as the conjugate, and the half-rate bin is real, cos(pi tau / T),
    so the assembled operator is real.
    """
    n, ts = num_samples, sample_interval
    k = np.arange(n)
    spec = np.empty(n, dtype=complex)
    low = k < n // 2
    high = k > n // 2
    spec[low] = np.exp(-2j * np.pi * k[low] * tau / (n * ts))
    spec[n // 2] = np.cos(np.pi * tau / ts)
    spec[high] = np.exp(2j * np.pi * (n - k[high]) * tau / (n * ts))
    return spec


def delay_spectrum_derivative(tau: float, num_samples: int,
                              sample_interval: float) -> np.ndarray:
    """Derivative of :func:`delay_spectrum` with respect to the delay."""
    n, ts = num_samples, sample_interval
    k = np.arange(n)
    spec = delay_spectrum(tau, n, ts)
    out = np.empty(n, dtype=complex)
    low = k < n // 2
    high = k > n // 2
    out[low] = -2j * np.pi * k[low] / (n * ts) * spec[low]
    out[n // 2] = -np.pi / ts * np.sin(np.pi * tau / ts)
    out[high] = 2j * np.pi * (n - k[high]) / (n * ts) * spec[high]
    return out


def _assemble(spectra: np.ndarray) -> tuple[np.ndarray, float]:
    """Stack per-element circulant blocks built from diagonal spectra."""
    m, n = spectra.shape
    blocks = np.empty((m * n, n))
    max_imag = 0.0
    for i in range(m):
        first_col = np.fft.ifft(spectra[i])
        max_imag = max(max_imag, float(np.max(np.abs(first_col.imag))))
        blocks[i * n:(i + 1) * n] = circulant(first_col.real)
    return blocks, max_imag


def build_delay_operator(scenario: Scenario, node_index: int) -> DelayOperator:
    """Fractional-delay operator for every element of the given node."""
    n, ts = _passive_grid(scenario)
    node = scenario.node(node_index)
    delays = np.array([intersensor_delay(scenario, node_index, m)
                       for m in range(1, node.num_sensors + 1)])
    if np.any(np.abs(delays) >= n * ts):
        raise ValueError("element delay exceeds the passive observation window")
    spectra = np.vstack([delay_spectrum(tau, n, ts) for tau in delays])
    matrix, max_imag = _assemble(spectra)
    return DelayOperator(node_index=node_index, delays=delays,
                         spectra=spectra, matrix=matrix, max_imag=max_imag)


def delay_operator_derivative(scenario: Scenario, node_index: int,
                              wrt: str) -> np.ndarray:
    """Derivative of the assembled operator with respect to a target
    coordinate (``wrt`` is ``"x"`` or ``"y"``)."""
    axis = {"x": 0, "y": 1}.get(wrt)
    if axis is None:
        raise ValueError(f"wrt must be 'x' or 'y', got {wrt!r}")
    n, ts = _passive_grid(scenario)
    node = scenario.node(node_index)
    rows = []
    for m in range(1, node.num_sensors + 1):
        tau = intersensor_delay(scenario, node_index, m)
        dtau = signal_param_gradients(scenario, node_index, m)[2][axis]
        rows.append(delay_spectrum_derivative(tau, n, ts) * dtau)
    matrix, _ = _assemble(np.vstack(rows))
    return matrix


@dataclass(eq=False)
class PassiveCovariance:
    """Measurement covariance of one node and its position derivatives."""

    sigma: np.ndarray        # (M N, M N)
    dsigma: np.ndarray       # (2, M N, M N), d/dx and d/dy
    sigma_s2: float


def passive_covariance(scenario: Scenario, node_index: int, sigma_s2: float,
                       noise: NoiseModel) -> PassiveCovariance:
    """Covariance sigma_s^2 D D^T + R(noise) and its x/y derivatives."""
    if sigma_s2 < 0.0:
        raise ValueError("sigma_s2 must be >= 0")
    if noise.num_samples != scenario.num_samples:
        raise ValueError("noise model sample count must match the passive window")
    node = scenario.node(node_index)
    op = build_delay_operator(scenario, node_index)
    noise_block = spatial_block_covariance(noise, node.num_sensors)
    sigma = sigma_s2 * (op.matrix @ op.matrix.T) + noise_block
    sigma = 0.5 * (sigma + sigma.T)

    dsigma = np.empty((2,) + sigma.shape)
    for axis, wrt in enumerate(("x", "y")):
        dop = delay_operator_derivative(scenario, node_index, wrt)
        cross = dop @ op.matrix.T
        dsigma[axis] = sigma_s2 * (cross + cross.T)
    return PassiveCovariance(sigma=sigma, dsigma=dsigma, sigma_s2=sigma_s2)


def _condition_estimate(sigma: np.ndarray, factor) -> float:
    """Cheap deterministic 2-norm condition estimate from a few power
    iterations on the matrix and its inverse."""
    v = np.ones(sigma.shape[0]) / np.sqrt(sigma.shape[0])
    w = v.copy()
    lam_max = lam_min_inv = 1.0
    for _ in range(8):
        v = sigma @ v
        lam_max = float(np.linalg.norm(v))
        if lam_max == 0.0:
            return np.inf
        v /= lam_max
        w = cho_solve(factor, w)
        lam_min_inv = float(np.linalg.norm(w))
        if not np.isfinite(lam_min_inv) or lam_min_inv == 0.0:
            return np.inf
        w /= lam_min_inv
    return lam_max * lam_min_inv


def fim_passive(scenario: Scenario, node_index: int, sigma_s2: float,
                noise: NoiseModel) -> np.ndarray:
    """3x3 information matrix over (x, y, doppler scale) from one node's
    passive covariance.  The doppler row and column are exactly zero.

    Entries are 1/2 tr(S^-1 dS_i S^-1 dS_j) over the position coordinates.
    """
    cov = passive_covariance(scenario, node_index, sigma_s2, noise)
    try:
        factor = cho_factor(cov.sigma, lower=True)
    except np.linalg.LinAlgError as err:
        raise ConditioningError(
            f"passive covariance factorization failed at node {node_index}: {err}") from err
    cond = _condition_estimate(cov.sigma, factor)
    if cond > CONDITION_LIMIT:
        raise ConditioningError(
            f"passive covariance at node {node_index} has condition ~{cond:.3e} "
            f"(limit {CONDITION_LIMIT:.1e}); N={scenario.num_samples}, "
            f"sigma_s2={sigma_s2:.3e}")

    solved = [cho_solve(factor, cov.dsigma[axis]) for axis in range(2)]
    fim = np.zeros((3, 3))
    for i in range(2):
        for j in range(i, 2):
            value = 0.5 * float(np.sum(solved[i] * solved[j].T))
            fim[i, j] = fim[j, i] = value
    return fim
