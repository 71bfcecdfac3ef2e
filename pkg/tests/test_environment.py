import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from multiscale_is.environment import (
    EnvironmentStats,
    analytic_moments,
    invariant_density_weight,
    monte_carlo_moments,
    spatial_average_weight,
)
from multiscale_is.errors import InvalidParameterError
from multiscale_is.random_field import FieldSpec, constant_field, sample_field


def test_unit_diffusivity():
    s = analytic_moments(1.0)
    assert s.K == pytest.approx(1.6487212707001282, abs=1e-15)
    assert s.Z == s.K
    assert s.KZ == pytest.approx(math.e, rel=1e-15)


def test_d_equal_two():
    assert analytic_moments(2.0).K == pytest.approx(1.1331484530668263, rel=1e-15)


def test_large_d_limit():
    s = analytic_moments(1e6)
    assert s.K == pytest.approx(1.0, abs=1e-12)
    assert s.Z == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("D", [0.0, -1.0])
def test_rejects_nonpositive_d(D):
    with pytest.raises(InvalidParameterError):
        analytic_moments(D)
    with pytest.raises(InvalidParameterError):
        invariant_density_weight(constant_field(), D, 0.0)


@given(st.floats(min_value=0.05, max_value=1e3))
def test_kz_exceeds_one(D):
    assert analytic_moments(D).KZ > 1.0


def test_stats_validation():
    with pytest.raises(InvalidParameterError):
        EnvironmentStats(D=1.0, K=0.0, Z=1.0)


@pytest.mark.slow
@pytest.mark.parametrize("D", [1.0, 2.0])
def test_monte_carlo_oracle_agrees(D):
    exact = analytic_moments(D)
    mc = monte_carlo_moments(D, n_realizations=10**6, seed=5)
    assert abs(mc["K"] - exact.K) <= 3 * mc["K_se"]
    assert abs(mc["Z"] - exact.Z) <= 3 * mc["Z_se"]
    assert mc["K"] * mc["Z"] > 1.0


def test_weight_values():
    assert invariant_density_weight(constant_field(0.0), 1.3, 2.0) == 1.0
    D = 0.7
    assert invariant_density_weight(constant_field(D), D, -4.0) == pytest.approx(
        0.36787944117144233, rel=1e-15)


def test_spatial_averages_center_on_z():
    # A single window of length 100 fluctuates by roughly 16% around Z, so the
    # check is on the mean over independent environments.
    D = 1.0
    avgs = np.array([spatial_average_weight(sample_field(FieldSpec(200, 3, i)), D, 50.0)
                     for i in range(60)])
    se = avgs.std(ddof=1) / math.sqrt(avgs.size)
    assert abs(avgs.mean() - analytic_moments(D).Z) <= 3 * se
