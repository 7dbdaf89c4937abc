"""Closed-form background, pencil coefficients and kernels of the linearized wave map.

The mode equation for w = e^{lambda tau} u(rho) around the blow-up profile
f0 = 2 arctan(rho) is the pencil

    u'' = -p(rho, lambda) u' + r(rho, lambda) u

on (0, 1), singular at both endpoints. Everything here is a pure function of
its arguments and works on floats, complex lambdas and numpy arrays alike.
cos(2 f0) is always taken in its rational form.
"""
import math
import warnings

import numpy as np
from scipy import integrate, optimize

from wavemap.core.errors import DomainError, QuadratureError, RootCountError, SingularPointError

SQRT2_MINUS_1 = math.sqrt(2.0) - 1.0
PSI_BASE = 0.5
QUAD_EPSABS = 1e-12
QUAD_EPSREL = 1e-10
BETA_FORMS = ("double_angle", "literal")


def _check_closed(rho):
    values = np.asarray(rho)
    if np.any(values < 0) or np.any(values > 1) or np.any(np.isnan(values)):
        raise DomainError(f"rho must lie in [0, 1], got {rho}")


def _check_open(rho):
    values = np.asarray(rho)
    if np.any(values <= 0) or np.any(values >= 1) or np.any(np.isnan(values)):
        raise SingularPointError(f"rho must lie in (0, 1), got {rho}")


def one_minus_sq(rho, x=None):
    """1 - rho^2, taken as x(2 - x) when the offset x = 1 - rho is known."""
    if x is not None:
        return x * (2.0 - x)
    return (1.0 - rho) * (1.0 + rho)


class BackgroundProfile:
    """The self-similar profile f0(rho) = 2 arctan(rho)."""

    @staticmethod
    def f0(rho):
        return 2.0 * np.arctan(rho)

    @staticmethod
    def cos2f0(rho):
        r2 = rho * rho
        return (r2 * r2 - 6.0 * r2 + 1.0) / (1.0 + r2) ** 2

    @staticmethod
    def cos2f0_trig(rho):
        # oracle only
        return np.cos(2.0 * BackgroundProfile.f0(rho))

    @staticmethod
    def sin_f0(rho):
        return 2.0 * rho / (1.0 + rho * rho)

    @staticmethod
    def cos_f0(rho):
        return (1.0 - rho * rho) / (1.0 + rho * rho)


def eval_background(rho):
    """Returns (f0, cos 2f0) for rho in [0, 1]."""
    _check_closed(rho)
    return BackgroundProfile.f0(rho), BackgroundProfile.cos2f0(rho)


# --- pencil ---------------------------------------------------------------

def pencil_p(rho, lam, x=None):
    """First-order coefficient 2/rho - 2 lambda rho / (1 - rho^2)."""
    return 2.0 / rho - 2.0 * lam * rho / one_minus_sq(rho, x)


def pencil_r(rho, lam, x=None):
    """Zeroth-order coefficient [2 cos(2f0)/rho^2 + lambda(1 + lambda)] / (1 - rho^2)."""
    c = BackgroundProfile.cos2f0(rho)
    return (2.0 * c / (rho * rho) + lam * (1.0 + lam)) / one_minus_sq(rho, x)


def pencil_second_derivative(rho, lam, u, du):
    """The pencil solved for u''."""
    _check_open(rho)
    return -pencil_p(rho, lam) * du + pencil_r(rho, lam) * u


def pencil_rhs(lam):
    """First-order system y = (u, u') for an adaptive integrator."""

    def rhs(rho, y):
        return [y[1], -pencil_p(rho, lam) * y[1] + pencil_r(rho, lam) * y[0]]

    return rhs


def pencil_residual(rho, lam, u, du, d2u, x=None):
    """Relative residual |u'' + p u' - r u| / (|u''| + |p u'| + |r u|)."""
    p_term = pencil_p(rho, lam, x) * du
    r_term = pencil_r(rho, lam, x) * u
    scale = np.abs(d2u) + np.abs(p_term) + np.abs(r_term)
    scale = np.where(scale > 0, scale, 1.0)
    return np.abs(d2u + p_term - r_term) / scale


def beta(rho, lam, form="double_angle"):
    """The coefficient whose sign drives the critical-point argument.

    `double_angle` is the full zeroth-order coefficient of the pencil;
    `literal` keeps cos(f0) in place of cos(2 f0).
    """
    if form == "double_angle":
        return pencil_r(rho, lam)
    if form == "literal":
        c = BackgroundProfile.cos_f0(rho)
        return (2.0 * c / (rho * rho) + lam * (1.0 + lam)) / one_minus_sq(rho)
    raise DomainError(f"unknown beta form {form!r}, expected one of {BETA_FORMS}")


def q_coefficient(rho, lam, x=None):
    """Zeroth-order coefficient in the form used by the equation at rho = 1."""
    return pencil_r(rho, lam, x)


# --- Sturm-Liouville form -------------------------------------------------

def _sl_factors(rho, lam):
    s = one_minus_sq(rho)
    m = s ** (0.5 * lam)
    k = 1.0 - lam * rho * rho / s
    return s, m, k


def sl_transform(u, du, rho, lam, d2u=None):
    """u~ = rho (1 - rho^2)^{lambda/2} u, with derivatives."""
    _check_open(rho)
    s, m, k = _sl_factors(rho, lam)
    ut = rho * m * u
    dut = m * (k * u + rho * du)
    if d2u is None:
        return ut, dut
    # g = rho s^a, a = lambda/2
    a = 0.5 * lam
    dg = m * k
    d2g = -6.0 * a * rho * m / s + 4.0 * a * (a - 1.0) * rho ** 3 * m / (s * s)
    d2ut = d2g * u + 2.0 * dg * du + rho * m * d2u
    return ut, dut, d2ut


def sl_inverse(ut, dut, rho, lam):
    _check_open(rho)
    s, m, k = _sl_factors(rho, lam)
    u = ut / (rho * m)
    du = (dut / m - k * u) / rho
    return u, du


def sl_potential(rho, lam):
    """V in u~'' = V u~."""
    _check_open(rho)
    s = one_minus_sq(rho)
    c = BackgroundProfile.cos2f0(rho)
    return 2.0 * c / (rho * rho * s) - lam * (2.0 - lam) / (s * s)


def comparison_potential(rho, lam):
    """p_lambda = -lambda(2 - lambda)/(1 - rho^2)^2; p_lambda - p_1 = (1 - lambda)^2/(1 - rho^2)^2."""
    s = one_minus_sq(rho)
    return -lam * (2.0 - lam) / (s * s)


def q_operator(rho, lam, u, du):
    """Q_lambda u = [2(lambda - 1) rho u' + (lambda(1 + lambda) - 2) u] / (1 - rho^2)."""
    _check_open(rho)
    return reduced_q(rho, lam, u, du) / one_minus_sq(rho)


def reduced_q(rho, lam, u, du):
    """(1 - rho^2) Q_lambda u, finite on the closed interval."""
    return 2.0 * (lam - 1.0) * rho * du + (lam * (1.0 + lam) - 2.0) * u


# --- fundamental system at lambda = 1 ------------------------------------

def log_ratio(rho):
    """log((1 - rho)/(1 + rho))."""
    return np.log1p(-rho) - np.log1p(rho)


class HomogeneousBasis:
    """theta (the gauge mode) and chi, a fundamental system of the lambda = 1 pencil."""

    @staticmethod
    def theta(rho):
        return 2.0 * rho / (1.0 + rho * rho)

    @staticmethod
    def dtheta(rho):
        return 2.0 * (1.0 - rho * rho) / (1.0 + rho * rho) ** 2

    @staticmethod
    def d2theta(rho):
        return 4.0 * rho * (rho * rho - 3.0) / (1.0 + rho * rho) ** 3

    @staticmethod
    def _chi_parts(rho):
        r2 = rho * rho
        s = one_minus_sq(rho)
        log = log_ratio(rho)
        dlog = -2.0 / s
        d2log = -4.0 * rho / (s * s)
        h = 1.0 / r2 + 6.0 * rho * log + 9.0
        dh = -2.0 / (r2 * rho) + 6.0 * log + 6.0 * rho * dlog
        d2h = 6.0 / (r2 * r2) + 12.0 * dlog + 6.0 * rho * d2log
        g = 1.0 / (1.0 + r2)
        dg = -2.0 * rho * g * g
        d2g = (6.0 * r2 - 2.0) * g ** 3
        return h, dh, d2h, g, dg, d2g

    @staticmethod
    def chi(rho):
        h, _, _, g, _, _ = HomogeneousBasis._chi_parts(rho)
        return h * g

    @staticmethod
    def dchi(rho):
        h, dh, _, g, dg, _ = HomogeneousBasis._chi_parts(rho)
        return dh * g + h * dg

    @staticmethod
    def d2chi(rho):
        h, dh, d2h, g, dg, d2g = HomogeneousBasis._chi_parts(rho)
        return d2h * g + 2.0 * dh * dg + h * d2g

    @staticmethod
    def wronskian(rho):
        """W(theta, chi) = -6 / (rho^2 (1 - rho^2))."""
        return -6.0 / (rho * rho * one_minus_sq(rho))


def theta_kernel(rho):
    """theta / (W (1 - rho^2)); polynomial over 1 + rho^2, finite on [0, 1]."""
    r2 = rho * rho
    return -r2 * rho / (3.0 * (1.0 + r2))


def variation_kernels(rho):
    """(chi / (W (1 - rho^2)), theta / (W (1 - rho^2))), both finite at rho = 0."""
    r2 = rho * rho
    chi_kernel = -(1.0 + 9.0 * r2 + 6.0 * r2 * rho * log_ratio(rho)) / (6.0 * (1.0 + r2))
    return chi_kernel, theta_kernel(rho)


# --- second kernel pair (1, psi) -----------------------------------------

def psi_prime(rho, lam, x=None):
    """psi' = 1 / (rho^2 (1 - rho^2)^lambda)."""
    return 1.0 / (rho * rho * one_minus_sq(rho, x) ** lam)


def _quad(f, a, b, epsabs, epsrel):
    with warnings.catch_warnings():
        warnings.simplefilter("error", integrate.IntegrationWarning)
        try:
            value, _ = integrate.quad(f, a, b, epsabs=epsabs, epsrel=epsrel, limit=200)
        except integrate.IntegrationWarning as e:
            raise QuadratureError(f"quad on [{a}, {b}] missed tolerance: {e}") from e
    return value


def psi_eval(rho, lam, c=PSI_BASE, epsabs=QUAD_EPSABS, epsrel=QUAD_EPSREL):
    """Returns (psi, psi') with psi(rho) = int_c^rho dxi / (xi^2 (1 - xi^2)^lambda)."""
    _check_open(rho)
    _check_open(c)
    derivative = psi_prime(rho, lam)
    if rho == c:
        return 0.0 * derivative, derivative
    if np.iscomplexobj(lam) or isinstance(lam, complex):
        re = _quad(lambda xi: psi_prime(xi, lam).real, c, rho, epsabs, epsrel)
        im = _quad(lambda xi: psi_prime(xi, lam).imag, c, rho, epsabs, epsrel)
        return complex(re, im), derivative
    return _quad(lambda xi: psi_prime(xi, lam), c, rho, epsabs, epsrel), derivative


# --- sign structure of beta ----------------------------------------------

def _beta_samples(lam, form, samples):
    rho = np.linspace(1e-4, 1.0 - 1e-4, samples)
    return rho, beta(rho, lam, form)


def beta_sign_changes(lam, form="double_angle", samples=4000) -> int:
    """Number of sign changes of beta_lambda on a fine grid of (0, 1)."""
    _, values = _beta_samples(lam, form, samples)
    signs = np.sign(values)
    return int(np.count_nonzero(signs[1:] * signs[:-1] < 0))


def beta_root(lam, samples=4000, xtol=1e-14):
    """Unique zero of beta_lambda on (0, 1) for lambda in (0, 1)."""
    if np.iscomplexobj(lam) or not 0 < lam < 1:
        raise DomainError(f"beta_root needs real lambda in (0, 1), got {lam}")
    rho, values = _beta_samples(lam, "double_angle", samples)
    signs = np.sign(values)
    changes = np.flatnonzero(signs[1:] * signs[:-1] < 0)
    if len(changes) != 1:
        raise RootCountError(f"beta_{lam} changes sign {len(changes)} times on (0, 1)")
    i = changes[0]
    return optimize.brentq(lambda t: pencil_r(t, lam), rho[i], rho[i + 1], xtol=xtol)
