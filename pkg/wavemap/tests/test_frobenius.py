import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import polynomial as poly

from wavemap.core.errors import DomainError, LogBranchError, RecurrenceError, SeriesRadiusError
from wavemap.spectral import frobenius
from wavemap.spectral.connection import phi0_at, phi1_at
from wavemap.spectral.odecore import HomogeneousBasis


def test_indices_at_origin_are_lambda_independent():
    for lam in (0.25, 1.0, 2.5, 1 + 0.5j):
        data = frobenius.indices_at(0, lam)
        assert data.exponents == (1, -2)
        assert data.integer_gap
        assert not data.both_bounded


def test_indicial_roots_at_origin():
    roots = sorted(poly.polyroots(frobenius.indicial_polynomial(0, 0.5)).real)
    assert roots == pytest.approx([-2.0, 1.0], abs=1e-12)
    # normalized: s^2 + s - 2
    coefficients = frobenius.indicial_polynomial(0, 0.7)
    assert list(coefficients / coefficients[-1]) == [-2.0, 1.0, 1.0]


@pytest.mark.parametrize("lam", [0.3, 0.5, 1.5])
def test_indicial_roots_at_one(lam):
    roots = sorted(poly.polyroots(frobenius.indicial_polynomial(1, lam)).real)
    assert roots == pytest.approx(sorted([0.0, 1.0 - lam]), abs=1e-12)


def test_both_branches_bounded_for_lambda_below_one():
    data = frobenius.indices_at(1, 0.4)
    assert data.exponents[1] == pytest.approx(0.6)
    assert data.both_bounded
    assert not data.integer_gap
    assert not frobenius.indices_at(1, 1.5).both_bounded


def test_indices_reject_other_centers():
    with pytest.raises(DomainError):
        frobenius.indices_at(2, 0.5)
    with pytest.raises(DomainError):
        frobenius.local_coefficients(-1, 0.5)


def test_phi0_series_at_gauge_matches_theta_taylor():
    series = frobenius.series_phi0(1.0)
    # theta = 2 rho / (1 + rho^2) = sum 2 (-1)^k rho^{2k + 1}
    expected = np.zeros(21)
    expected[0::2] = 2.0 * (-1.0) ** np.arange(11)
    assert np.max(np.abs(series.coefficients[:21] - expected)) < 1e-13
    u, du = frobenius.series_eval(series, 0.3)
    assert u == pytest.approx(HomogeneousBasis.theta(0.3), rel=1e-14)
    assert du == pytest.approx(HomogeneousBasis.dtheta(0.3), rel=1e-14)


def test_phi0_series_normalization():
    series = frobenius.series_phi0(0.5)
    assert series.exponent == 1
    assert series.coefficients[0] == 2.0
    assert series.endpoint_derivative() == 2.0
    assert frobenius.series_eval(series, 0.0) == (0.0, 2.0)


@pytest.mark.parametrize("lam", [round(0.1 * k, 1) for k in range(1, 10)])
def test_phi1_regularity_condition(lam):
    series = frobenius.series_phi1(lam)
    assert series.coefficients[0] == 1.0
    expected = (2.0 - lam - lam * lam) / (2.0 * lam)
    assert series.endpoint_derivative() == pytest.approx(expected, abs=1e-12)


def test_phi1_gauge_series_is_theta():
    series = frobenius.series_phi1(1.0 + 1e-13)
    assert series.gauge
    assert series.lam == 1.0
    u, du = frobenius.series_eval(series, 0.8)
    assert u == pytest.approx(HomogeneousBasis.theta(0.8), rel=1e-12)
    assert du == pytest.approx(HomogeneousBasis.dtheta(0.8), rel=1e-10)


@pytest.mark.parametrize("lam", [2.0, 3.0])
def test_phi1_integer_gap_is_log_branch(lam):
    with pytest.raises(LogBranchError):
        frobenius.series_phi1(lam)
    # nudged off the integer the recurrence runs
    assert frobenius.series_phi1(lam + 1e-9).recurrence_residual < 1e-10


def test_phi1_complex_lambda():
    lam = 0.8 + 0.3j
    series = frobenius.series_phi1(lam)
    assert np.iscomplexobj(series.coefficients)
    assert complex(series.endpoint_derivative()) == pytest.approx((2.0 - lam - lam * lam) / (2.0 * lam), abs=1e-12)


@settings(max_examples=25, deadline=None)
@given(lam=st.floats(min_value=0.05, max_value=2.95).filter(lambda v: abs(v - round(v)) > 1e-6))
def test_recurrence_residual_small(lam):
    assert frobenius.series_phi1(lam).recurrence_residual < 1e-10
    assert frobenius.series_phi0(lam).recurrence_residual < 1e-10


def test_series_agrees_with_shooting():
    for lam in (0.25, 0.5, 1.7):
        u0, du0 = frobenius.series_eval(frobenius.series_phi0(lam), 0.3)
        s0, ds0 = phi0_at(lam, 0.3)
        assert u0 == pytest.approx(s0, rel=1e-8, abs=1e-9)
        assert du0 == pytest.approx(ds0, rel=1e-8, abs=1e-9)
        u1, du1 = frobenius.series_eval(frobenius.series_phi1(lam), 0.7)
        s1, ds1 = phi1_at(lam, 0.7)
        assert u1 == pytest.approx(s1, rel=1e-8, abs=1e-9)
        assert du1 == pytest.approx(ds1, rel=1e-8, abs=1e-9)


def test_phi1_series_against_mpmath_ode():
    with mpmath.workdps(30):
        lam = mpmath.mpf("0.5")
        series = frobenius.series_phi1(0.5)

        def rhs(x, y):
            rho = 1 - x
            c = (rho ** 4 - 6 * rho ** 2 + 1) / (1 + rho ** 2) ** 2
            p = 2 / rho - 2 * lam * rho / (1 - rho ** 2)
            r = (2 * c / rho ** 2 + lam * (1 + lam)) / (1 - rho ** 2)
            # d/dx = -d/drho
            return [-y[1], p * y[1] - r * y[0]]

        start = mpmath.mpf("0.05")
        u, du = frobenius.series_eval_local(series, 0.05)
        solution = mpmath.odefun(rhs, start, [mpmath.mpf(float(u)), mpmath.mpf(float(du))])
        expected = solution(mpmath.mpf("0.3"))
        value, slope = frobenius.series_eval_local(series, 0.3)
        assert value == pytest.approx(float(expected[0]), rel=1e-10)
        assert slope == pytest.approx(float(expected[1]), rel=1e-9)


def test_tail_estimate_shrinks_toward_center():
    series = frobenius.series_phi1(0.5)
    assert frobenius.error_estimate(series, 0.95) < frobenius.error_estimate(series, 0.7)
    assert frobenius.error_estimate(series, 0.99) < 1e-30


def test_radius_and_order_errors():
    series = frobenius.series_phi0(0.5)
    with pytest.raises(SeriesRadiusError):
        frobenius.series_eval(series, 0.6)
    with pytest.raises(SeriesRadiusError):
        frobenius.series_eval_local(series, -0.1)
    with pytest.raises(DomainError):
        frobenius.series_phi0(0.5, order=3)


def test_vanishing_lead_rejected():
    with pytest.raises(RecurrenceError):
        frobenius.SeriesExpansion(center=0, exponent=1, coefficients=np.zeros(5), order=4, radius=0.4, lam=0.5)
