import numpy as np
import pytest
from numpy.testing import assert_allclose

from uwisac.noise import (NoiseModel, ar1_apply_precision, ar1_covariance,
                          ar1_precision, spatial_block_covariance)


def test_white_case_is_identity():
    assert_allclose(ar1_covariance(NoiseModel(0.0, 5)), np.eye(5))


def test_entries_match_closed_form():
    cov = ar1_covariance(NoiseModel(0.5, 4))
    assert_allclose(cov[0, 0], 4.0 / 3.0, rtol=1e-15)
    assert_allclose(cov[0, 1], -2.0 / 3.0, rtol=1e-15)
    assert_allclose(cov[0, 3], (-0.5) ** 3 / 0.75, rtol=1e-15)


def test_alternating_sign_geometric_decay():
    a = 0.6
    cov = ar1_covariance(NoiseModel(a, 8))
    lags = np.arange(8)
    assert_allclose(np.abs(cov[0]), a ** lags / (1 - a * a), rtol=1e-14)
    assert np.all(np.sign(cov[0]) == (-1.0) ** lags)


def test_positive_definite_small():
    eigs = np.linalg.eigvalsh(ar1_covariance(NoiseModel(0.5, 3)))
    assert eigs.min() > 0.0


@pytest.mark.parametrize("a", [-0.95, -0.5, 0.0, 0.5, 0.9, 0.95])
@pytest.mark.parametrize("n", [1, 8, 64, 256])
def test_positive_definite_by_factorization(a, n):
    np.linalg.cholesky(ar1_covariance(NoiseModel(a, n)))


def test_stationarity_validation():
    with pytest.raises(ValueError):
        NoiseModel(1.0, 4)
    with pytest.raises(ValueError):
        NoiseModel(-1.2, 4)
    with pytest.raises(ValueError):
        NoiseModel(0.5, 0)


def test_block_covariance_structure():
    model = NoiseModel(0.4, 6)
    block = spatial_block_covariance(model, 3)
    single = ar1_covariance(model)
    assert block.shape == (18, 18)
    for i in range(3):
        s = slice(6 * i, 6 * (i + 1))
        assert_allclose(block[s, s], single)
    assert_allclose(block[0:6, 6:12], 0.0)
    assert_allclose(spatial_block_covariance(model, 1), single)
    assert_allclose(spatial_block_covariance(NoiseModel(0.0, 4), 2), np.eye(8))


def test_precision_is_exact_inverse():
    for a, n in [(0.5, 1), (0.5, 2), (-0.7, 5), (0.9, 32)]:
        model = NoiseModel(a, n)
        prod = ar1_precision(model) @ ar1_covariance(model)
        assert_allclose(prod, np.eye(n), atol=1e-10)


def test_apply_precision_matches_dense(rng):
    model = NoiseModel(0.6, 17)
    x = rng.standard_normal((17, 3))
    assert_allclose(ar1_apply_precision(model, x), ar1_precision(model) @ x,
                    rtol=1e-12, atol=1e-12)
    with pytest.raises(ValueError):
        ar1_apply_precision(model, np.zeros((5, 2)))


def test_lag0_variance():
    assert_allclose(NoiseModel(0.5, 4).lag0_variance, 4.0 / 3.0, rtol=1e-15)
