"""First-order autoregressive ambient noise model.

The noise observed at every sensor element is temporally correlated with a
geometric autocorrelation of alternating sign and is independent across
elements.  The lag-q covariance is (-a)^q / (1 - a^2), so the lag-0 variance
is 1 / (1 - a^2) rather than unity; SNR-to-power conversions account for it.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import toeplitz


@dataclass(frozen=True)
class NoiseModel:
    """AR(1) temporal noise over a fixed number of samples."""

    ar_coefficient: float
    num_samples: int

    def __post_init__(self):
        if not abs(self.ar_coefficient) < 1.0:
            raise ValueError(
                f"ar_coefficient must satisfy |a| < 1 for stationarity, got {self.ar_coefficient}")
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")

    @property
    def lag0_variance(self) -> float:
        """Per-sample noise variance, 1 / (1 - a^2)."""
        return 1.0 / (1.0 - self.ar_coefficient ** 2)


def ar1_covariance(model: NoiseModel) -> np.ndarray:
    """Dense temporal covariance: symmetric positive-definite Toeplitz with
    entry (i, j) = (-a)^|i-j| / (1 - a^2)."""
    lags = np.arange(model.num_samples)
    first_row = (-model.ar_coefficient) ** lags * model.lag0_variance
    return toeplitz(first_row)


def spatial_block_covariance(model: NoiseModel, num_sensors: int) -> np.ndarray:
    """Covariance of the stacked multi-sensor noise vector.

    Sensors are mutually independent, so the result is block diagonal with
    ``num_sensors`` identical AR(1) blocks.
    """
    if num_sensors < 1:
        raise ValueError("num_sensors must be >= 1")
    return np.kron(np.eye(num_sensors), ar1_covariance(model))


def ar1_precision(model: NoiseModel) -> np.ndarray:
    """Closed-form inverse of :func:`ar1_covariance`.

    The AR(1) covariance has a tridiagonal inverse: off-diagonal entries a,
    diagonal entries 1 at both ends and 1 + a^2 inside (after absorbing the
    1 / (1 - a^2) lag-0 scaling).
    """
    a = model.ar_coefficient
    n = model.num_samples
    if n == 1:
        return np.array([[1.0 - a ** 2]])
    prec = np.zeros((n, n))
    diag = np.full(n, 1.0 + a ** 2)
    diag[0] = diag[-1] = 1.0
    np.fill_diagonal(prec, diag)
    idx = np.arange(n - 1)
    prec[idx, idx + 1] = a
    prec[idx + 1, idx] = a
    return prec


def ar1_apply_precision(model: NoiseModel, x: np.ndarray) -> np.ndarray:
    """Multiply the AR(1) inverse covariance onto ``x`` along axis 0 in
    O(n) using the tridiagonal stencil (no dense matrix is formed)."""
    a = model.ar_coefficient
    x = np.asarray(x, dtype=float)
    if x.shape[0] != model.num_samples:
        raise ValueError(
            f"leading dimension {x.shape[0]} does not match num_samples {model.num_samples}")
    if model.num_samples == 1:
        return (1.0 - a ** 2) * x
    out = (1.0 + a ** 2) * x
    out[0] = x[0]
    out[-1] = x[-1]
    out[:-1] += a * x[1:]
    out[1:] += a * x[:-1]
    return out
