import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from multiscale_is.errors import InvalidParameterError
from multiscale_is.random_field import (
    FieldRealization,
    FieldSpec,
    ensemble_values,
    eval_all,
    eval_d2Q,
    eval_dQ,
    eval_Q,
    sample_field,
)


def test_single_mode_lengths():
    real = sample_field(FieldSpec(n_modes=1, seed=123))
    assert len(real.wavenumbers) == len(real.cos_amps) == len(real.sin_amps) == 1


def test_invalid_spec():
    with pytest.raises(InvalidParameterError):
        FieldSpec(n_modes=0)
    with pytest.raises(InvalidParameterError):
        FieldSpec(seed=-1)


def test_determinism_and_independence():
    a = sample_field(FieldSpec(50, seed=9, index=3))
    b = sample_field(FieldSpec(50, seed=9, index=3))
    c = sample_field(FieldSpec(50, seed=9, index=4))
    assert a == b
    for name in ("wavenumbers", "cos_amps", "sin_amps"):
        assert getattr(a, name).tobytes() == getattr(b, name).tobytes()
    assert a != c


def test_realization_is_read_only():
    real = sample_field(FieldSpec(5, seed=1))
    with pytest.raises(ValueError):
        real.wavenumbers[0] = 1.0


def test_constant_mode():
    real = FieldRealization([0.0], [1.0], [0.0])
    assert eval_Q(real, 3.7) == 1.0
    assert np.all(eval_Q(real, np.linspace(-5, 5, 7)) == 1.0)


def test_zero_wavenumber_has_zero_derivative():
    real = FieldRealization([0.0], [0.3], [-1.2])
    assert np.all(eval_dQ(real, np.linspace(-5, 5, 11)) == 0.0)


@pytest.mark.parametrize("y", [-2.0, 0.3, 5.0])
def test_derivative_matches_central_difference(field, y):
    h = 1e-6
    fd = (eval_Q(field, y + h) - eval_Q(field, y - h)) / (2 * h)
    d = eval_dQ(field, y)
    assert abs(fd - d) <= 1e-6 * max(1.0, abs(d))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32), y=st.floats(-50, 50))
def test_derivative_is_exact_for_any_realization(seed, y):
    real = sample_field(FieldSpec(40, seed=seed))
    h = 1e-4
    fd = (eval_Q(real, y + h) - eval_Q(real, y - h)) / (2 * h)
    fd2 = (eval_dQ(real, y + h) - eval_dQ(real, y - h)) / (2 * h)
    # Truncation error h**2 |Q'''| / 6 with |Q'''| of order tens.
    assert abs(fd - eval_dQ(real, y)) < 1e-5
    assert abs(fd2 - eval_d2Q(real, y)) < 1e-4


def test_eval_all_agrees_with_single_orders(field):
    y = np.linspace(-30, 30, 501)
    q, dq, d2q = eval_all(field, y)
    np.testing.assert_allclose(q, eval_Q(field, y), rtol=0, atol=1e-12)
    np.testing.assert_allclose(dq, eval_dQ(field, y), rtol=0, atol=1e-12)
    np.testing.assert_allclose(d2q, eval_d2Q(field, y), rtol=0, atol=1e-11)


def test_scalar_and_array_shapes(field):
    assert isinstance(eval_Q(field, 0.5), float)
    assert eval_Q(field, np.zeros((2, 3))).shape == (2, 3)


@pytest.fixture(scope="module")
def sampled_q():
    """Q(0) and Q(0.7) over 1e5 realizations drawn through sample_field."""
    vals = np.empty((100_000, 2))
    for i in range(vals.shape[0]):
        real = sample_field(FieldSpec(20, seed=77, index=i))
        vals[i] = eval_Q(real, np.array([0.0, 0.7]))
    return vals


@pytest.mark.slow
def test_sample_mean_zero(sampled_q):
    q0 = sampled_q[:, 0]
    se = q0.std(ddof=1) / math.sqrt(q0.size)
    assert abs(q0.mean()) <= 3 * se


@pytest.mark.slow
def test_sample_unit_variance(sampled_q):
    q = sampled_q[:, 1]
    n = q.size
    var = q.var(ddof=1)
    m4 = np.mean((q - q.mean()) ** 4)
    se = math.sqrt((m4 - var**2) / n)
    assert abs(var - 1.0) <= 3 * se


@pytest.fixture(scope="module")
def ensemble():
    lags = [0.0, 0.5, 1.0, 2.0]
    q = ensemble_values(100_000, lags, n_modes=200, seed=11)
    dq = ensemble_values(100_000, [0.0], n_modes=200, seed=12, derivative=True)[:, 0]
    return lags, q, dq


def _cov_and_se(a, b):
    prod = a * b
    return prod.mean(), prod.std(ddof=1) / math.sqrt(prod.size)


@pytest.mark.parametrize("j", [0, 1, 2, 3])
def test_empirical_covariance(ensemble, j):
    lags, q, _ = ensemble
    c, se = _cov_and_se(q[:, j], q[:, 0])
    assert abs(c - math.exp(-lags[j] ** 2)) <= 3 * se


def test_derivative_variance(ensemble):
    _, _, dq = ensemble
    v, se = _cov_and_se(dq, dq)
    # -C''(0) = 2 for C(y) = exp(-y^2)
    assert abs(v - 2.0) <= 3 * se
