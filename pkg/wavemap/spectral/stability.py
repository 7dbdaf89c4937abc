"""Certificate checks that tie the shooting and series numerics back to the mode-stability argument.

Each check returns a small verdict dataclass; `full_certificate` runs them all,
collects violations with the lambda or rho where they occur, and reports
a single pass flag.
"""
import math
import time
from dataclasses import asdict, dataclass, field
from typing import Optional

import numpy as np
from scipy import integrate, optimize
from scipy.interpolate import CubicSpline

from wavemap.core.config import DEFAULT_CERTIFICATE, DEFAULT_SHOOTING, CertificateConfig, ShootingConfig
from wavemap.core.errors import DomainError, WavemapError
from wavemap.core.logger import get_logger
from wavemap.core.system_monitor import log_run_status, runtime_metadata
from wavemap.spectral import odecore
from wavemap.spectral.connection import GridFunction, ModeParameter, phi0_profile, phi1_profile, scan_real
from wavemap.spectral.frobenius import series_eval_local, series_phi1
from wavemap.spectral.odecore import HomogeneousBasis
from wavemap.spectral.quadrature import CompositeGrid

logger = get_logger(__name__)

ENDPOINT_MARGIN = 1e-3
FINE_POINTS = 4001
GAUGE_TOL = 1e-6
SLOPE_THRESHOLD = 5e-4
RHO_MATCH_ATOL = 1e-12
INTEGRABLE = "integrable"
DIVERGENT = "divergent"
INCONCLUSIVE = "inconclusive"


@dataclass
class PositivityVerdict:
    lam: float
    passed: bool
    minimum: float
    argmin: float
    first_violation: Optional[float] = None


@dataclass
class CriticalPoint:
    rho: float
    u: float
    d2u: float
    beta_u: float
    beta: float
    mismatch: float


@dataclass
class SignArgumentVerdict:
    lam: float
    rho_star: float
    passed: bool
    critical_points: dict
    beta_negative_beyond_root: bool
    failures: list = field(default_factory=list)


@dataclass
class WeightedNormVerdict:
    lam: float
    exponent: float
    by_exponent: str
    by_quadrature: str
    slope: float
    increments: list
    classification: str
    agree: bool
    nudged: bool = False


@dataclass
class CheckResult:
    name: str
    passed: bool
    details: dict = field(default_factory=dict)
    violations: list = field(default_factory=list)


@dataclass
class CertificateReport:
    ranges: list
    checks: dict
    passed: bool
    tolerances: dict
    violations: list
    runtime: dict = field(default_factory=dict)


def _interior_grid(margin: float = ENDPOINT_MARGIN, points: int = 2001):
    return np.linspace(margin, 1.0 - margin, points)


def _require_real(lam):
    if isinstance(lam, complex) and lam.imag != 0:
        raise DomainError(f"real lambda required, got {lam}")
    return float(np.real(lam))


def check_positivity(lam, grid=None, config: ShootingConfig = DEFAULT_SHOOTING) -> PositivityVerdict:
    """phi0 > 0 on the grid (default: 2001 points in [1e-3, 1 - 1e-3])."""
    lam = _require_real(lam)
    grid = _interior_grid() if grid is None else np.asarray(grid, dtype=float)
    u = phi0_profile(lam, grid, config).u
    index = int(np.argmin(u))
    negative = np.flatnonzero(u <= 0)
    first = float(grid[negative[0]]) if len(negative) else None
    return PositivityVerdict(lam, first is None, float(u[index]), float(grid[index]), first)


def integral_identity(u: GridFunction, lam) -> float:
    """int (theta / W(theta, chi)) Q_lambda u over the sampled range.

    theta Q u / W equals the cancelled kernel times (1 - rho^2) Q u, which is
    finite up to both endpoints.
    """
    integrand = odecore.theta_kernel(u.rho) * odecore.reduced_q(u.rho, lam, u.u, u.du)
    if not np.any(integrand):
        return 0.0
    return integrate.simpson(integrand, x=u.rho)


def derivative_sign_change(u: GridFunction) -> list[float]:
    """Locations where u' changes sign, refined on a cubic spline of u'."""
    rho, du = np.asarray(u.rho, dtype=float), np.real(np.asarray(u.du))
    signs = np.sign(du)
    nonzero = np.flatnonzero(signs)
    if len(nonzero) < 2:
        return []
    spline = CubicSpline(rho, du)
    locations = []
    for i, j in zip(nonzero[:-1], nonzero[1:]):
        if signs[i] == signs[j]:
            continue
        if j - i > 1:
            # exact zero samples in between
            locations.append(float(rho[(i + j) // 2]))
        else:
            locations.append(float(optimize.brentq(spline, rho[i], rho[j], xtol=1e-14)))
    return locations


def regularity_condition(lam, u1, du1) -> float:
    """|u'(1) - (2 - lambda - lambda^2) / (2 lambda) u(1)|."""
    if lam == 0:
        raise DomainError("regularity condition undefined at lambda = 0")
    return abs(du1 - (2.0 - lam - lam * lam) / (2.0 * lam) * u1)


def critical_points(u: GridFunction, lam) -> list[CriticalPoint]:
    """Interior critical points with u'' from the spline derivative of u' compared to beta u."""
    rho = np.asarray(u.rho, dtype=float)
    du_spline = CubicSpline(rho, np.real(u.du))
    u_spline = CubicSpline(rho, np.real(u.u))
    second = du_spline.derivative()
    found = []
    for location in derivative_sign_change(u):
        value = float(u_spline(location))
        d2u = float(second(location))
        coefficient = float(odecore.beta(location, lam))
        beta_u = coefficient * value
        mismatch = abs(d2u - beta_u) / max(1.0, abs(beta_u))
        found.append(CriticalPoint(location, value, d2u, beta_u, coefficient, mismatch))
    return found


def theorem_sign_argument(
    lam,
    phi1: Optional[GridFunction] = None,
    config: ShootingConfig = DEFAULT_SHOOTING,
    tol: float = 1e-8,
    margin: float = ENDPOINT_MARGIN,
) -> SignArgumentVerdict:
    """Checks u'' = beta u and its sign at critical points beyond the zero of beta.

    Applied to phi1 on [rho*, 1 - margin] and to phi0 on [margin, 1 - margin].
    """
    lam = _require_real(lam)
    if lam == 1:
        theta = phi0_profile(1.0, _interior_grid(margin, FINE_POINTS), config)
        vacuous = not derivative_sign_change(theta)
        return SignArgumentVerdict(lam, math.nan, vacuous, {"phi0": [], "phi1": []}, True)

    rho_star = odecore.beta_root(lam)
    beyond = np.linspace(rho_star, 1.0 - margin, FINE_POINTS)[1:]
    beta_negative = bool(np.all(odecore.beta(beyond, lam) < 0))
    if phi1 is None:
        phi1 = phi1_profile(lam, np.linspace(rho_star, 1.0 - margin, FINE_POINTS), config)
    phi0 = phi0_profile(lam, _interior_grid(margin, FINE_POINTS), config)

    failures = []
    found = {}
    for name, profile in (("phi1", phi1), ("phi0", phi0)):
        points = critical_points(profile, lam)
        found[name] = [asdict(point) for point in points]
        for point in points:
            if point.mismatch > tol:
                failures.append(f"{name}: u'' - beta u = {point.d2u - point.beta_u:.2e} at rho={point.rho:.6f}")
            if point.rho > rho_star and point.u > 0 and np.sign(point.d2u) != np.sign(point.beta):
                failures.append(f"{name}: sign of u'' disagrees with beta at rho={point.rho:.6f}")
    if not beta_negative:
        failures.append(f"beta_{lam} is not negative on ({rho_star:.6f}, 1)")
    return SignArgumentVerdict(lam, rho_star, not failures, found, beta_negative, failures)


def _decade_increments(lam, decades, config: ShootingConfig):
    series = series_phi1(lam, config.series_order, config.series_radius)
    increments = []
    for k in decades:
        grid = CompositeGrid.geometric(10.0 ** (-k - 1), 10.0 ** (-k), ratio=0.75, order=12)
        x = grid.nodes
        u, _ = series_eval_local(series, x)
        weight = (1.0 - x) ** 2 * (x * (2.0 - x)) ** (lam - 2.0)
        increments.append(float(grid.integrate(weight * np.abs(u) ** 2)))
    return increments


def weighted_norm_classification(lam, config: ShootingConfig = DEFAULT_SHOOTING) -> WeightedNormVerdict:
    """Is rho (1 - rho^2)^{lambda/2} phi1 square integrable against d rho / (1 - rho^2)^2 near 1?

    Decided by the tail exponent lambda - 2 and, independently, by the
    growth of the integral over decades 1 - rho in [1e-14, 1e-6].
    """
    lam = _require_real(lam)
    if lam <= 0:
        raise DomainError(f"lambda must be > 0, got {lam}")
    exponent = lam - 2.0
    by_exponent = INTEGRABLE if exponent > -1.0 else DIVERGENT

    parameter = ModeParameter.from_value(lam)
    decades = list(range(6, 14))
    increments = _decade_increments(parameter.scalar, decades, config)
    slope = float(np.polyfit(decades, np.log10(increments), 1)[0])
    by_quadrature = INTEGRABLE if slope < -SLOPE_THRESHOLD else DIVERGENT

    if 0 < abs(lam - 1.0) < 1e-3:
        classification = INCONCLUSIVE
    else:
        classification = by_exponent
    return WeightedNormVerdict(
        lam=lam,
        exponent=exponent,
        by_exponent=by_exponent,
        by_quadrature=by_quadrature,
        slope=slope,
        increments=increments,
        classification=classification,
        agree=by_exponent == by_quadrature,
        nudged=parameter.nudged,
    )


def pde_residual(lam, u: GridFunction, rho=None) -> float:
    """sup relative residual of the time-evolution operator on w = e^{lambda tau} u at tau = 0.

    lambda^2 u - (1 - rho^2) u'' + 2 lambda rho u' + lambda u - 2 (1 - rho^2) u' / rho + 2 cos(2f0) u / rho^2
    """
    if u.d2u is None:
        u = u.with_second_derivative()
    if rho is None:
        mask = np.ones(u.rho.shape, dtype=bool)
    else:
        # grid points are matched up to rounding
        wanted = np.atleast_1d(np.asarray(rho, dtype=float))
        mask = np.isclose(u.rho[:, None], wanted[None, :], rtol=0.0, atol=RHO_MATCH_ATOL).any(axis=1)
    r = u.rho[mask]
    value, du, d2u = u.u[mask], u.du[mask], u.d2u[mask]
    s = odecore.one_minus_sq(r)
    terms = [
        lam * lam * value,
        -s * d2u,
        2.0 * lam * r * du,
        lam * value,
        -2.0 * s * du / r,
        2.0 * odecore.BackgroundProfile.cos2f0(r) * value / (r * r),
    ]
    total = np.abs(sum(terms))
    scale = sum(np.abs(term) for term in terms)
    scale = np.where(scale > 0, scale, 1.0)
    return float(np.max(total / scale)) if len(r) else 0.0


def gauge_residual(rho=None) -> tuple[float, float]:
    """Largest relative lambda = 1 pencil residual of theta and chi, and where it occurs."""
    rho = np.linspace(0.01, 0.99, 981) if rho is None else np.asarray(rho, dtype=float)
    worst, where = 0.0, math.nan
    for f, df, d2f in (
        (HomogeneousBasis.theta, HomogeneousBasis.dtheta, HomogeneousBasis.d2theta),
        (HomogeneousBasis.chi, HomogeneousBasis.dchi, HomogeneousBasis.d2chi),
    ):
        residual = odecore.pencil_residual(rho, 1.0, f(rho), df(rho), d2f(rho))
        index = int(np.argmax(residual))
        if residual[index] > worst:
            worst, where = float(residual[index]), float(rho[index])
    return worst, where


def oscillation_identity(lam, a: float, b: float, config: ShootingConfig = DEFAULT_SHOOTING, panels: int = 200):
    """(int_a^b (p_lambda - p_1) u~ theta~, W(u~, theta~)(a) - W(u~, theta~)(b)) for u = phi0."""
    lam = _require_real(lam)
    grid = CompositeGrid.uniform(a, b, panels, 8)
    rho = grid.nodes
    profile = phi0_profile(lam, rho, config)
    ut, dut = odecore.sl_transform(profile.u, profile.du, rho, lam)
    tt, dtt = odecore.sl_transform(HomogeneousBasis.theta(rho), HomogeneousBasis.dtheta(rho), rho, 1.0)
    weight = odecore.comparison_potential(rho, lam) - odecore.comparison_potential(rho, 1.0)
    lhs = float(grid.integrate(weight * ut * tt))
    wronskian = ut * dtt - dut * tt
    return lhs, float(wronskian[0] - wronskian[-1])


# --- certificate ----------------------------------------------------------

def _scan_check(name, lo, hi, n, config: CertificateConfig) -> CheckResult:
    report = scan_real(lo, hi, n, config.shooting, workers=config.workers)
    roots = report.root_values()
    expect_gauge = lo <= 1.0 <= hi
    violations = []
    if expect_gauge:
        gauge = [r for r in roots if abs(r - 1.0) <= GAUGE_TOL]
        if len(roots) != 1 or len(gauge) != 1:
            violations.append({"check": name, "detail": f"expected one root at 1, found {roots}"})
    else:
        for root in roots:
            violations.append({"check": name, "lambda": root, "detail": "unexpected eigenvalue candidate"})
    for failure in report.failures:
        violations.append({"check": name, "lambda": failure["lambda"], "detail": failure["error"]})
    details = {
        "range": [lo, hi, n],
        "roots": roots,
        "sign_changes": [list(b) for b in report.sign_changes],
        "discontinuities": report.discontinuities,
        "min_abs_miss": float(np.nanmin(np.abs(report.miss))),
    }
    return CheckResult(name, not violations, details, violations)


def _gauge_check(config: CertificateConfig) -> CheckResult:
    worst, where = gauge_residual()
    violations = []
    if not worst < config.residual_tol:
        violations.append({"check": "gauge_residual", "lambda": 1.0, "rho": where, "detail": f"relative residual {worst:.3e}"})
    return CheckResult("gauge_residual", not violations, {"max_residual": worst, "at_rho": where}, violations)


def _positivity_check(config: CertificateConfig) -> CheckResult:
    details, violations = {}, []
    grid = _interior_grid(config.margin)
    for lam in config.positivity_lambdas:
        verdict = check_positivity(lam, grid, config.shooting)
        details[str(lam)] = {"minimum": verdict.minimum, "argmin": verdict.argmin}
        if not verdict.passed:
            violations.append({"check": "positivity", "lambda": lam, "rho": verdict.first_violation, "detail": "phi0 <= 0"})
    return CheckResult("positivity", not violations, details, violations)


def _beta_check(config: CertificateConfig) -> CheckResult:
    details, violations = {}, []
    for lam in config.sign_lambdas:
        counts = {form: odecore.beta_sign_changes(lam, form) for form in odecore.BETA_FORMS}
        details[str(lam)] = counts
        if counts["double_angle"] != 1:
            violations.append({"check": "beta_roots", "lambda": lam, "detail": f"{counts['double_angle']} sign changes"})
    return CheckResult("beta_roots", not violations, details, violations)


def _regularity_check(config: CertificateConfig) -> CheckResult:
    details, violations = {}, []
    for lam in config.regularity_lambdas:
        series = series_phi1(lam, config.shooting.series_order, config.shooting.series_radius)
        residual = regularity_condition(lam, 1.0, float(np.real(series.endpoint_derivative())))
        details[str(lam)] = residual
        if not residual < config.regularity_tol:
            violations.append({"check": "regularity", "lambda": lam, "rho": 1.0, "detail": f"residual {residual:.3e}"})
    return CheckResult("regularity", not violations, details, violations)


def _sign_argument_check(config: CertificateConfig) -> CheckResult:
    details, violations = {}, []
    for lam in config.sign_lambdas:
        verdict = theorem_sign_argument(lam, config=config.shooting, tol=config.critical_tol, margin=config.margin)
        details[str(lam)] = {"rho_star": verdict.rho_star, "critical_points": verdict.critical_points}
        for failure in verdict.failures:
            violations.append({"check": "sign_argument", "lambda": lam, "detail": failure})
    return CheckResult("sign_argument", not violations, details, violations)


def _weighted_norm_check(config: CertificateConfig) -> CheckResult:
    details, violations = {}, []
    for lam in config.weighted_lambdas:
        verdict = weighted_norm_classification(lam, config.shooting)
        details[str(lam)] = asdict(verdict)
        expected = INTEGRABLE if lam > 1 else DIVERGENT
        if verdict.classification != expected or not verdict.agree:
            violations.append({
                "check": "weighted_norm",
                "lambda": lam,
                "detail": f"exponent says {verdict.by_exponent}, quadrature says {verdict.by_quadrature}",
            })
    return CheckResult("weighted_norm", not violations, details, violations)


def _run_check(name, check, *args) -> CheckResult:
    try:
        return check(*args)
    except WavemapError as e:
        logger.error(f"Certificate check {name} failed: {e}")
        return CheckResult(name, False, {}, [{"check": name, "detail": f"{type(e).__name__}: {e}"}])


def full_certificate(config: CertificateConfig = DEFAULT_CERTIFICATE) -> CertificateReport:
    """Runs every check and assembles the report; passes iff every check passes."""
    config.validate()
    started = time.perf_counter()
    logger.info(f"Certificate over ranges {list(config.ranges)}")

    checks = {}
    for lo, hi, n in config.ranges:
        name = f"scan[{lo}:{hi}]"
        checks[name] = _run_check(name, _scan_check, name, lo, hi, n, config)
    if config.gauge_window is not None:
        lo, hi, n = config.gauge_window
        checks["gauge_window"] = _run_check("gauge_window", _scan_check, "gauge_window", lo, hi, n, config)
    checks["gauge_residual"] = _run_check("gauge_residual", _gauge_check, config)
    checks["positivity"] = _run_check("positivity", _positivity_check, config)
    checks["beta_roots"] = _run_check("beta_roots", _beta_check, config)
    checks["regularity"] = _run_check("regularity", _regularity_check, config)
    checks["sign_argument"] = _run_check("sign_argument", _sign_argument_check, config)
    checks["weighted_norm"] = _run_check("weighted_norm", _weighted_norm_check, config)

    violations = [v for check in checks.values() for v in check.violations]
    passed = all(check.passed for check in checks.values())
    for check in checks.values():
        level = logger.info if check.passed else logger.warning
        level(f"Certificate check {check.name}: {'pass' if check.passed else 'FAIL'}")

    runtime = runtime_metadata(started, workers=config.workers)
    log_run_status(f"Certificate {'passed' if passed else 'failed'}", runtime)
    return CertificateReport(
        ranges=[list(r) for r in config.ranges],
        checks=checks,
        passed=passed,
        tolerances={
            "eigenvalue": config.shooting.eigen_tol,
            "gauge_root": GAUGE_TOL,
            "residual": config.residual_tol,
            "regularity": config.regularity_tol,
            "critical_point": config.critical_tol,
            "margin": config.margin,
        },
        violations=violations,
        runtime=runtime,
    )
