"""Frobenius series for the pencil at its regular singular points rho = 0 and rho = 1.

Multiplying the pencil by rho^2 (1 - rho^2)(1 + rho^2)^2 gives the polynomial
form P2 u'' + P1 u' + P0 u = 0. In the local variable t = |rho - center| the
coefficients A2 = P2/t^2, A1 = P1/t, A0 = P0 are polynomials, and with
u = sum a_m t^{m+s} the coefficients obey

    a_m F_0(m + s) = -sum_{j>=1} a_{m-j} F_j(m - j + s),
    F_j(k) = A2_j k (k - 1) + A1_j k + A0_j.
"""
from dataclasses import dataclass

import numpy as np
from numpy.polynomial import Polynomial
from numpy.polynomial import polynomial as poly

from wavemap.core.errors import DomainError, LogBranchError, RecurrenceError, SeriesRadiusError
from wavemap.core.logger import get_logger

logger = get_logger(__name__)

DEFAULT_ORDER = 40
DEFAULT_RADIUS = 0.4
GAUGE_SNAP = 1e-12


@dataclass(frozen=True)
class IndicialData:
    center: int
    exponents: tuple
    gap: complex
    integer_gap: bool
    # second exponent in (0, 1): both branches bounded, only one C^1
    both_bounded: bool


@dataclass(frozen=True, eq=False)
class SeriesExpansion:
    center: int
    exponent: int
    coefficients: np.ndarray
    order: int
    radius: float
    lam: complex
    recurrence_residual: float = 0.0
    gauge: bool = False

    def __post_init__(self):
        if self.coefficients[0] == 0:
            raise RecurrenceError("leading coefficient vanished")

    def evaluate_local(self, t):
        """Value and d/dt at the local offset t = |rho - center|."""
        c = self.coefficients
        value = poly.polyval(t, c)
        slope = poly.polyval(t, poly.polyder(c))
        if self.exponent == 0:
            return value, slope
        return t * value, value + t * slope

    def tail_estimate(self, t) -> float:
        """Magnitude of the last two retained terms at offset t."""
        t = np.max(np.abs(np.asarray(t, dtype=float)))
        last = np.abs(self.coefficients[-2:]) * t ** (np.arange(self.order - 1, self.order + 1) + self.exponent)
        return float(np.sum(last))

    def endpoint_derivative(self):
        """u'(center) in rho."""
        if self.exponent == 1:
            return self.coefficients[0]
        return self._rho_sign() * self.coefficients[1]

    def _rho_sign(self) -> float:
        return 1.0 if self.center == 0 else -1.0


def _is_integer(value, tol=1e-12) -> bool:
    value = complex(value)
    return abs(value.imag) < tol and abs(value.real - round(value.real)) < tol


def _local_polynomials(center: int, lam):
    if center == 0:
        rho, sign = Polynomial([0.0, 1.0]), 1.0
    else:
        rho, sign = Polynomial([1.0, -1.0]), -1.0
    r2 = rho * rho
    w = (1.0 + r2) ** 2
    p2 = r2 * (1.0 - r2) * w
    p1 = sign * w * (2.0 * rho - 2.0 * (1.0 + lam) * rho ** 3)
    p0 = -(2.0 * (r2 * r2 - 6.0 * r2 + 1.0) + lam * (1.0 + lam) * r2 * w)
    return p2.coef, p1.coef, p0.coef


def local_coefficients(center: int, lam):
    """(A2, A1, A0) coefficient arrays in the local variable, zero padded to equal length."""
    if center not in (0, 1):
        raise DomainError(f"center must be 0 or 1, got {center}")
    p2, p1, p0 = _local_polynomials(center, lam)
    if center == 0:
        a2, a1, a0 = p2[2:], p1[1:], p0
    else:
        a2, a1, a0 = p2[1:], p1, np.concatenate(([0.0], p0))
    size = max(len(a2), len(a1), len(a0))
    dtype = np.result_type(a2, a1, a0)
    out = np.zeros((3, size), dtype=dtype)
    out[0, : len(a2)], out[1, : len(a1)], out[2, : len(a0)] = a2, a1, a0
    return out[0], out[1], out[2]


def indicial_polynomial(center: int, lam):
    """Coefficients (constant first) of F_0(s) = A2_0 s(s - 1) + A1_0 s + A0_0."""
    a2, a1, a0 = local_coefficients(center, lam)
    return np.array([a0[0], a1[0] - a2[0], a2[0]])


def indices_at(center: int, lam) -> IndicialData:
    if center == 0:
        exponents = (1, -2)
    elif center == 1:
        exponents = (0, 1 - lam)
    else:
        raise DomainError(f"center must be 0 or 1, got {center}")
    gap = complex(exponents[0] - exponents[1])
    second = complex(exponents[1])
    both_bounded = abs(second.imag) < GAUGE_SNAP and 0 < second.real < 1
    return IndicialData(
        center=center,
        exponents=exponents,
        gap=gap,
        integer_gap=_is_integer(gap),
        both_bounded=both_bounded,
    )


def _recurrence(center, lam, exponent, lead, order):
    a2, a1, a0 = local_coefficients(center, lam)
    depth = len(a0)

    def factor(j, k):
        return a2[j] * k * (k - 1) + a1[j] * k + a0[j]

    coefficients = np.zeros(order + 1, dtype=np.result_type(a0, float))
    coefficients[0] = lead
    for m in range(1, order + 1):
        k = m + exponent
        denominator = factor(0, k)
        if abs(denominator) < 1e-12 * (1 + abs(k)) ** 2:
            raise RecurrenceError(f"indicial factor vanishes at step {m} (lambda={lam})")
        total = 0.0
        for j in range(1, min(m, depth - 1) + 1):
            total += coefficients[m - j] * factor(j, m - j + exponent)
        coefficients[m] = -total / denominator

    # relative residual of the defining relation at the last step
    terms = [
        coefficients[order - j] * factor(j, order - j + exponent)
        for j in range(0, min(order, depth - 1) + 1)
    ]
    scale = sum(abs(term) for term in terms)
    residual = abs(sum(terms)) / scale if scale > 0 else 0.0
    return coefficients, float(residual)


def _check_order(order: int):
    if order < 4:
        raise DomainError(f"series order must be >= 4, got {order}")


def series_phi0(lam, order: int = DEFAULT_ORDER, radius: float = DEFAULT_RADIUS) -> SeriesExpansion:
    """Analytic solution at rho = 0 normalized by phi0'(0) = 2; exponent 1."""
    _check_order(order)
    coefficients, residual = _recurrence(0, lam, 1, 2.0, order)
    return SeriesExpansion(
        center=0,
        exponent=1,
        coefficients=coefficients,
        order=order,
        radius=radius,
        lam=lam,
        recurrence_residual=residual,
    )


def _theta_at_one(order: int) -> np.ndarray:
    """Taylor coefficients of theta(1 - t) = 2(1 - t) / (2 - 2t + t^2)."""
    numerator = np.zeros(order + 1)
    numerator[:2] = [2.0, -2.0]
    denominator = np.zeros(order + 1)
    denominator[:3] = [2.0, -2.0, 1.0]
    out = np.zeros(order + 1)
    for k in range(order + 1):
        out[k] = (numerator[k] - np.dot(denominator[1 : k + 1], out[k - 1 :: -1][:k])) / denominator[0]
    return out


def series_phi1(lam, order: int = DEFAULT_ORDER, radius: float = DEFAULT_RADIUS) -> SeriesExpansion:
    """Analytic (exponent 0) solution at rho = 1 normalized by phi1(1) = 1."""
    _check_order(order)
    if abs(lam - 1) < GAUGE_SNAP:
        return SeriesExpansion(
            center=1,
            exponent=0,
            coefficients=_theta_at_one(order),
            order=order,
            radius=radius,
            lam=1.0,
            gauge=True,
        )
    if indices_at(1, lam).integer_gap:
        raise LogBranchError(f"integer indicial gap at rho = 1 for lambda={lam}")
    coefficients, residual = _recurrence(1, lam, 0, 1.0, order)
    if residual > 1e-12:
        logger.warning(f"phi1 recurrence residual {residual:.2e} at lambda={lam}")
    return SeriesExpansion(
        center=1,
        exponent=0,
        coefficients=coefficients,
        order=order,
        radius=radius,
        lam=lam,
        recurrence_residual=residual,
    )


def series_eval_local(series: SeriesExpansion, t):
    """(u, du/drho) at local offset t = |rho - center| >= 0."""
    t = np.asarray(t, dtype=float)
    if np.any(t < 0) or np.any(t > series.radius):
        raise SeriesRadiusError(f"offset {t} outside validity radius {series.radius}")
    value, slope = series.evaluate_local(t)
    return value, series._rho_sign() * slope


def series_eval(series: SeriesExpansion, rho):
    """(u, u') at rho, within the validity radius around the center."""
    rho = np.asarray(rho, dtype=float)
    offset = rho - series.center if series.center == 0 else series.center - rho
    if np.any(offset < 0):
        raise SeriesRadiusError(f"rho={rho} lies outside [0, 1]")
    return series_eval_local(series, offset)


def error_estimate(series: SeriesExpansion, rho) -> float:
    return series.tail_estimate(np.abs(np.asarray(rho, dtype=float) - series.center))
