import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from kinfront import (
    BoundsViolation,
    BranchTag,
    DegenerateFitError,
    FrontQuery,
    InvalidParameterError,
    NoFrontError,
    NotInZoneError,
    RateParams,
    bounds_check,
    fit_exponent,
    freidlin_profile,
    front_location,
    front_trace,
    mu_gamma_values,
    rate_conjecture,
    truncate_min,
)
from kinfront.front import freidlin_sweep


def test_rate_conjecture():
    assert rate_conjecture(RateParams(1.0, 2.0)) == pytest.approx(0.272166, abs=1e-6)
    assert rate_conjecture(RateParams(1.0, 1.0)) == pytest.approx(0.125)
    with pytest.raises(InvalidParameterError):
        rate_conjecture(RateParams(0.0, 2.0))


def test_front_location():
    assert front_location(100.0, RateParams(1.0, 2.0)) == pytest.approx(272.166, abs=1e-3)
    assert front_location(100.0, RateParams(1.0, 1.0)) == pytest.approx(1250.0, rel=1e-9)
    # tuples are accepted for the parameters
    assert front_location(10.0, (2.0, 2.0)) > front_location(10.0, (1.0, 2.0))

    with pytest.raises(NoFrontError):
        front_location(10.0, RateParams(0.0, 2.0))
    with pytest.raises(NoFrontError):
        front_location(0.0, RateParams(1.0, 2.0))


def test_front_location_is_a_sign_change():
    params = RateParams(0.5, 2.0)
    for t in (1.0, 10.0, 50.0):
        x = front_location(t, params)
        values, _ = mu_gamma_values(t, np.array([x * (1 - 1e-6), x * (1 + 1e-6)]), 0.0, params)
        assert values[0] <= 0 < values[1]


def test_truncation_is_zero_up_to_the_front():
    params = RateParams(1.0, 2.0)
    t = 20.0
    front = front_location(t, params)
    x = np.linspace(0, 2 * front, 101)
    values, _ = mu_gamma_values(t, x, 0.0, params)
    truncated = truncate_min(values)
    assert (truncated >= 0).all()
    assert (truncated[x < front * (1 - 1e-6)] == 0).all()
    assert (truncated[x > front * (1 + 1e-6)] > 0).all()


@pytest.mark.parametrize("r", [0.01, 0.1, 1.0, 2.0, 10.0, 100.0])
def test_conjecture_within_bounds(r):
    lower, upper = bounds_check(r)
    assert lower <= rate_conjecture(RateParams(r, 2.0)) <= upper


@settings(max_examples=100, deadline=None)
@given(st.floats(min_value=1e-6, max_value=10.0))
def test_conjecture_within_bounds_for_random_rates(r):
    lower, upper = bounds_check(r)
    assert lower <= rate_conjecture(RateParams(r, 2.0)) <= upper


def test_bounds_values():
    assert bounds_check(1.0) == pytest.approx((0.19245, 1.41421), abs=1e-5)
    assert bounds_check(2.0) == pytest.approx((0.35355, 2.0), abs=1e-5)
    assert issubclass(BoundsViolation, AssertionError)
    with pytest.raises(InvalidParameterError):
        bounds_check(0.0)


def test_fit_exponent():
    t = np.array([1.0, 2.0, 4.0, 8.0, 16.0])
    b, a = fit_exponent(t, 3.0 * t ** 1.5)
    assert b == pytest.approx(1.5)
    assert a == pytest.approx(3.0)

    with pytest.raises(InvalidParameterError):
        fit_exponent(t[:4], t[:4])
    with pytest.raises(DegenerateFitError):
        fit_exponent(t, np.array([1.0, 2.0, 0.0, 4.0, 5.0]))


def test_query_validation():
    with pytest.raises(InvalidParameterError):
        FrontQuery(RateParams(0.0, 2.0), 0.0, (1.0, 2.0))
    with pytest.raises(InvalidParameterError):
        FrontQuery(RateParams(1.0, 2.0), 0.0, (2.0, 1.0))
    with pytest.raises(InvalidParameterError):
        FrontQuery(RateParams(1.0, 2.0), 0.0, ())


def test_front_trace_recovers_the_conjecture():
    query = FrontQuery(RateParams(1.0, 2.0), 0.0, tuple(np.arange(10.0, 101.0, 10.0)))
    trace = front_trace(query, threads=2)
    assert all(tag is BranchTag.POWER_LAW for tag in trace.tags)
    assert trace.onset == 10.0
    assert trace.exponent == pytest.approx(1.5, rel=1e-6)
    assert trace.prefactor == pytest.approx(trace.conjecture, rel=1e-6)
    assert np.abs(trace.residuals).max() < 1e-6
    assert np.allclose(trace.local_exponents[1:], 1.5)
    assert trace.nondecreasing_after_onset()


def test_front_trace_gamma_one():
    query = FrontQuery(RateParams(1.0, 1.0), 0.0, (10.0, 20.0, 40.0, 80.0, 160.0))
    trace = front_trace(query)
    assert trace.exponent == pytest.approx(2.0, rel=1e-6)
    assert trace.prefactor == pytest.approx(0.125, rel=1e-6)


def test_freidlin_profile_along_a_flight():
    profile = freidlin_profile(5.0, 3.0, 0.2, 0.0, RateParams(1.0))
    assert len(profile.tau) == 200
    assert profile.tau[-1] == 5.0
    assert profile.positions[-1] == pytest.approx(3.0)
    assert 0 < profile.switch_time < 5.0
    assert profile.ok


def test_freidlin_profile_zone():
    with pytest.raises(NotInZoneError):
        freidlin_profile(1.0, 1.0, 2.0, 0.0)
    with pytest.raises(NotInZoneError):
        freidlin_profile(1.0, -1.0, 0.0, 0.0)
    with pytest.raises(InvalidParameterError):
        freidlin_profile(1.0, 1.0, 0.5, 0.0, n=10)


def test_freidlin_sweep_is_reproducible():
    first = freidlin_sweep(20, seed=5)
    second = freidlin_sweep(20, seed=5)
    assert first.n == 20
    assert first.failures == second.failures
    assert 0 <= first.fraction_unimodal <= 1
    assert first.unimodal == second.unimodal


@pytest.mark.parametrize("seed", [0, 1, 7])
def test_freidlin_sweep_is_all_unimodal(seed):
    sweep = freidlin_sweep(500, seed=seed)
    assert sweep.n == 500
    assert not sweep.failures
    assert sweep.fraction_unimodal == 1.0
    assert sweep.concave == 500
