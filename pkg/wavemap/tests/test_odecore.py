import math
import warnings

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from wavemap.core.errors import DomainError, RootCountError, SingularPointError
from wavemap.spectral import odecore
from wavemap.spectral.odecore import BackgroundProfile, HomogeneousBasis

interior_rho = st.floats(min_value=0.02, max_value=0.98)
real_lam = st.floats(min_value=0.05, max_value=3.0)


def _mp_r(rho, lam):
    rho, lam = mpmath.mpf(rho), mpmath.mpf(lam)
    c = mpmath.cos(4 * mpmath.atan(rho))
    return (2 * c / rho ** 2 + lam * (1 + lam)) / (1 - rho ** 2)


def test_cos2f0_rational_matches_trig():
    rho = np.linspace(0.0, 1.0, 1000)
    assert np.max(np.abs(BackgroundProfile.cos2f0(rho) - BackgroundProfile.cos2f0_trig(rho))) < 1e-14


def test_eval_background_endpoints():
    f0, c = odecore.eval_background(np.array([0.0, 1.0]))
    assert f0[0] == 0.0
    assert f0[1] == pytest.approx(math.pi / 2)
    assert c[0] == 1.0
    assert c[1] == pytest.approx(-1.0)


def test_eval_background_rejects_outside_interval():
    with pytest.raises(DomainError):
        odecore.eval_background(1.2)
    with pytest.raises(ValueError):
        odecore.eval_background(-0.1)


@pytest.mark.parametrize("rho,lam", [(0.5, 0.5), (0.1, 0.25), (0.9, 1.7), (0.99, 0.3)])
def test_pencil_r_against_mpmath(rho, lam):
    assert float(odecore.pencil_r(rho, lam)) == pytest.approx(float(_mp_r(rho, lam)), rel=1e-13)


def test_pencil_p_closed_form():
    # 2/rho - 2 lambda rho/(1 - rho^2) at rho = 1/2, lambda = 1/2
    assert odecore.pencil_p(0.5, 0.5) == pytest.approx(4.0 - 0.5 / 0.75, rel=1e-15)


def test_offset_form_agrees_near_one():
    x = 1e-9
    rho = 1.0 - x
    direct = odecore.pencil_r(rho, 0.5)
    offset = odecore.pencil_r(rho, 0.5, x=x)
    assert offset == pytest.approx(direct, rel=1e-6)
    assert odecore.one_minus_sq(rho, x) == pytest.approx(x * (2.0 - x), rel=1e-15)


def test_pencil_second_derivative_rejects_singular_points():
    with pytest.raises(SingularPointError):
        odecore.pencil_second_derivative(0.0, 0.5, 1.0, 1.0)
    with pytest.raises(SingularPointError):
        odecore.pencil_second_derivative(1.0, 0.5, 1.0, 1.0)


def test_pencil_rhs_is_complex_for_complex_lambda():
    rhs = odecore.pencil_rhs(1 + 0.5j)
    du, d2u = rhs(0.5, np.array([1.0 + 0j, 0.0 + 0j]))
    assert du == 0
    assert isinstance(complex(d2u), complex)
    assert complex(d2u).imag != 0


def test_gauge_pair_solves_lambda_one_pencil(interior):
    rho = interior
    for f, df, d2f in (
        (HomogeneousBasis.theta, HomogeneousBasis.dtheta, HomogeneousBasis.d2theta),
        (HomogeneousBasis.chi, HomogeneousBasis.dchi, HomogeneousBasis.d2chi),
    ):
        residual = odecore.pencil_residual(rho, 1.0, f(rho), df(rho), d2f(rho))
        assert np.max(residual) < 1e-10


def test_gauge_pair_wronskian(interior):
    rho = interior
    computed = HomogeneousBasis.theta(rho) * HomogeneousBasis.dchi(rho) - HomogeneousBasis.dtheta(rho) * HomogeneousBasis.chi(rho)
    expected = HomogeneousBasis.wronskian(rho)
    assert np.max(np.abs(computed / expected - 1.0)) < 1e-12


def test_chi_matches_mpmath():
    rho = mpmath.mpf("0.7")
    chi = (1 / rho ** 2 + 6 * rho * mpmath.log((1 - rho) / (1 + rho)) + 9) / (1 + rho ** 2)
    assert HomogeneousBasis.chi(0.7) == pytest.approx(float(chi), rel=1e-13)


def test_variation_kernels_match_quotients():
    rho = np.linspace(0.05, 0.95, 19)
    chi_kernel, theta_kernel = odecore.variation_kernels(rho)
    denominator = HomogeneousBasis.wronskian(rho) * odecore.one_minus_sq(rho)
    assert np.allclose(chi_kernel, HomogeneousBasis.chi(rho) / denominator, rtol=1e-12, atol=0)
    assert np.allclose(theta_kernel, HomogeneousBasis.theta(rho) / denominator, rtol=1e-12, atol=0)


def test_variation_kernels_finite_at_origin():
    chi_kernel, theta_kernel = odecore.variation_kernels(np.array([0.0]))
    assert chi_kernel[0] == pytest.approx(-1.0 / 6.0)
    assert theta_kernel[0] == 0.0


def test_theta_kernel_finite_at_one():
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        kernel = odecore.theta_kernel(np.array([0.0, 1.0]))
    assert kernel[0] == 0.0
    assert kernel[1] == pytest.approx(-1.0 / 6.0)


@settings(max_examples=60, deadline=None)
@given(rho=interior_rho, lam=real_lam, start=st.sampled_from([(1.0, 0.0), (0.0, 1.0)]))
def test_sl_transform_conjugates_pencil(rho, lam, start):
    u, du = start
    d2u = odecore.pencil_second_derivative(rho, lam, u, du)
    ut, dut, d2ut = odecore.sl_transform(u, du, rho, lam, d2u)
    expected = odecore.sl_potential(rho, lam) * ut
    scale = 1.0 + abs(expected) + abs(d2ut)
    assert abs(d2ut - expected) < 1e-9 * scale


def test_sl_transform_of_shooting_solution():
    from wavemap.spectral.connection import phi0_profile

    rho = np.linspace(0.05, 0.95, 91)
    profile = phi0_profile(0.5, rho).with_second_derivative()
    ut, _, d2ut = odecore.sl_transform(profile.u, profile.du, rho, 0.5, profile.d2u)
    residual = np.abs(d2ut - odecore.sl_potential(rho, 0.5) * ut)
    assert np.max(residual / (np.abs(d2ut) + 1.0)) < 1e-8


def test_sl_inverse_recovers_pair():
    ut, dut = odecore.sl_transform(0.3, -1.2, 0.6, 0.75)
    u, du = odecore.sl_inverse(ut, dut, 0.6, 0.75)
    assert u == pytest.approx(0.3, rel=1e-14)
    assert du == pytest.approx(-1.2, rel=1e-13)


@given(rho=interior_rho, lam=st.floats(min_value=-1.0, max_value=3.0))
def test_potentials_symmetric_under_reflection(rho, lam):
    assert odecore.sl_potential(rho, lam) == pytest.approx(odecore.sl_potential(rho, 2.0 - lam), rel=1e-12, abs=1e-12)
    assert odecore.comparison_potential(rho, lam) == pytest.approx(odecore.comparison_potential(rho, 2.0 - lam), rel=1e-12, abs=1e-12)


@given(rho=interior_rho, lam=real_lam)
def test_comparison_potential_gap(rho, lam):
    s = 1.0 - rho * rho
    gap = odecore.comparison_potential(rho, lam) - odecore.comparison_potential(rho, 1.0)
    assert gap == pytest.approx((1.0 - lam) ** 2 / (s * s), rel=1e-9, abs=1e-9)


def test_q_operator_examples():
    assert odecore.q_operator(0.5, 0.0, 1.0, 0.0) == pytest.approx(-8.0 / 3.0, rel=1e-15)
    assert odecore.q_operator(0.5, 0.5, 1.0, 2.0) == pytest.approx((2 * -0.5 * 0.5 * 2.0 + (0.75 - 2.0)) / 0.75)


@given(
    rho=interior_rho,
    u=st.floats(min_value=-5, max_value=5),
    du=st.floats(min_value=-5, max_value=5),
)
def test_q_operator_vanishes_at_gauge_value(rho, u, du):
    assert odecore.q_operator(rho, 1.0, u, du) == 0.0


@given(lam=st.floats(min_value=-1.9, max_value=5.0).filter(lambda v: abs(v - 1.0) > 1e-6))
def test_q_operator_nonzero_away_from_gauge(lam):
    # (u, u') = (1, 0) isolates lambda(1 + lambda) - 2
    assert odecore.q_operator(0.5, lam, 1.0, 0.0) != 0.0
    assert np.sign(lam * (1.0 + lam) - 2.0) == np.sign(lam - 1.0)


def test_psi_at_base_point_is_zero():
    value, derivative = odecore.psi_eval(0.5, 0.7)
    assert value == 0.0
    assert derivative == pytest.approx(1.0 / (0.25 * 0.75 ** 0.7))


def test_psi_closed_form_at_gauge_value():
    value, _ = odecore.psi_eval(0.8, 1.0)
    expected = (-1.0 / 0.8 + math.atanh(0.8)) - (-2.0 + math.atanh(0.5))
    assert value == pytest.approx(expected, rel=1e-10)
    assert value == pytest.approx(1.2993, abs=1e-4)


def test_psi_against_mpmath():
    expected = mpmath.quad(lambda t: 1 / (t ** 2 * (1 - t ** 2) ** mpmath.mpf("0.5")), [0.5, 0.9])
    value, _ = odecore.psi_eval(0.9, 0.5)
    assert value == pytest.approx(float(expected), rel=1e-10)


def test_psi_base_change_is_constant_shift():
    rho = [0.2, 0.45, 0.7, 0.95]
    shifts = [odecore.psi_eval(r, 0.6, 0.3)[0] - odecore.psi_eval(r, 0.6, 0.5)[0] for r in rho]
    assert max(shifts) - min(shifts) < 1e-12


def test_psi_increasing_for_real_lambda():
    values = [odecore.psi_eval(r, 0.4)[0] for r in np.linspace(0.1, 0.9, 9)]
    assert all(b > a for a, b in zip(values, values[1:]))


def test_psi_complex_lambda():
    value, derivative = odecore.psi_eval(0.7, 0.5 + 0.2j)
    assert isinstance(value, complex)
    assert value.imag != 0
    assert derivative == pytest.approx(1.0 / (0.49 * 0.51 ** (0.5 + 0.2j)))


def test_beta_root_half():
    assert odecore.beta_root(0.5) == pytest.approx(0.4351893, abs=1e-6)


def test_beta_root_small_lambda_limit():
    assert odecore.beta_root(1e-6) == pytest.approx(math.sqrt(2.0) - 1.0, abs=1e-5)


def test_beta_root_is_a_zero():
    for lam in (0.1, 0.3, 0.7, 0.9):
        root = odecore.beta_root(lam)
        assert abs(odecore.beta(root, lam)) < 1e-9


def test_beta_positive_near_origin():
    rho = np.linspace(1e-3, 0.1, 100)
    for lam in np.linspace(0.05, 0.95, 10):
        assert np.all(odecore.beta(rho, lam) > 0)


def test_beta_forms_sign_changes():
    for lam in (0.3, 0.5, 0.7):
        assert odecore.beta_sign_changes(lam, "double_angle") == 1
        # cos(f0) >= 0 on [0, 1], so the literal form never changes sign
        assert odecore.beta_sign_changes(lam, "literal") == 0


def test_beta_unknown_form():
    with pytest.raises(DomainError):
        odecore.beta(0.5, 0.5, form="half_angle")


def test_beta_root_domain_and_count(monkeypatch):
    with pytest.raises(DomainError):
        odecore.beta_root(1.5)
    monkeypatch.setattr(odecore, "pencil_r", lambda rho, lam, x=None: np.ones_like(rho))
    with pytest.raises(RootCountError):
        odecore.beta_root(0.5)
