"""Two-sided shooting and the miss function.

phi0 is launched from its Frobenius series at rho = delta0, phi1 from its
series at rho = 1 - delta1; both are carried to the matching point by an
adaptive integrator. Their Wronskian there vanishes exactly when the two
are proportional, i.e. when lambda is a regular eigenvalue.
"""
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy import optimize
from scipy.integrate import solve_ivp

from wavemap.core.config import DEFAULT_SHOOTING, ShootingConfig
from wavemap.core.errors import (
    ArgumentJumpError,
    DomainError,
    IntegrationError,
    LogBranchError,
    WavemapError,
)
from wavemap.core.logger import get_logger
from wavemap.core.system_monitor import log_run_status, runtime_metadata
from wavemap.spectral import odecore
from wavemap.spectral.frobenius import series_eval, series_eval_local, series_phi0, series_phi1
from wavemap.spectral.odecore import HomogeneousBasis

logger = get_logger(__name__)

EIGENVALUE_CANDIDATE = "eigenvalue-candidate"
NO_EIGENVALUE = "no-eigenvalue"
INDETERMINATE = "indeterminate"

GAUGE_SNAP = 1e-12
INTEGER_NUDGE = 1e-9
NORMALIZATION_FLOOR = 1e-300


@dataclass(frozen=True)
class ModeParameter:
    """A spectral parameter lambda, snapped to the gauge value or nudged off other integers."""

    value: complex
    nudged: bool = False

    @classmethod
    def from_value(cls, lam, nudge: float = INTEGER_NUDGE) -> "ModeParameter":
        lam = complex(lam)
        if abs(lam - 1) < GAUGE_SNAP:
            return cls(1 + 0j)
        nearest = round(lam.real)
        if lam.imag == 0 and abs(lam.real - nearest) < nudge:
            return cls(complex(nearest + nudge, 0.0), nudged=True)
        return cls(lam)

    @property
    def is_real(self) -> bool:
        return self.value.imag == 0

    @property
    def is_gauge(self) -> bool:
        return self.value == 1

    @property
    def scalar(self):
        return self.value.real if self.is_real else self.value


@dataclass
class GridFunction:
    """Samples of (u, u') on a rho grid; tags say where each sample came from."""

    rho: np.ndarray
    u: np.ndarray
    du: np.ndarray
    lam: complex
    d2u: Optional[np.ndarray] = None
    tags: Optional[np.ndarray] = None

    def with_second_derivative(self) -> "GridFunction":
        """Fills u'' from the pencil at interior points."""
        inside = (self.rho > 0) & (self.rho < 1)
        d2u = np.full(self.u.shape, np.nan, dtype=np.result_type(self.u, float))
        d2u[inside] = odecore.pencil_second_derivative(
            self.rho[inside], self.lam, self.u[inside], self.du[inside]
        )
        return GridFunction(self.rho, self.u, self.du, self.lam, d2u, self.tags)

    def restrict(self, lo: float, hi: float) -> "GridFunction":
        mask = (self.rho >= lo) & (self.rho <= hi)
        return GridFunction(
            self.rho[mask],
            self.u[mask],
            self.du[mask],
            self.lam,
            None if self.d2u is None else self.d2u[mask],
            None if self.tags is None else self.tags[mask],
        )


@dataclass
class ConnectionResult:
    lam: complex
    match_point: float
    wronskian: complex
    abel_invariant: complex
    normalization: float
    normalized: complex
    classification: str
    phi0: tuple
    phi1: tuple


@dataclass
class RootEstimate:
    value: float
    bracket: tuple
    error: float
    residual: float


@dataclass
class ScanReport:
    lo: float
    hi: float
    n: int
    lambdas: list
    miss: list
    abel_invariant: list
    classifications: list
    sign_changes: list = field(default_factory=list)
    roots: list = field(default_factory=list)
    discontinuities: list = field(default_factory=list)
    failures: list = field(default_factory=list)
    runtime: dict = field(default_factory=dict)

    def root_values(self) -> list[float]:
        return [root.value for root in self.roots]


@dataclass
class ContourReport:
    rectangle: tuple
    winding: int
    raw_winding: float
    evaluations: int
    max_phase_step: float


# --- one-sided solutions --------------------------------------------------

def _solve(lam, start, y0, end, config: ShootingConfig, dense: bool = False):
    sol = solve_ivp(
        odecore.pencil_rhs(lam),
        (start, end),
        y0,
        method=config.method,
        rtol=config.rtol,
        atol=config.atol,
        dense_output=dense,
    )
    if not sol.success:
        raise IntegrationError(f"integration {start} -> {end} failed for lambda={lam}: {sol.message}")
    return sol


def _initial_state(u, du, lam):
    dtype = complex if isinstance(lam, complex) else float
    return np.array([u, du], dtype=dtype)


def _check_real_half_plane(lam):
    if complex(lam).real <= 0:
        raise DomainError(f"Re lambda must be > 0, got {lam}")


def _check_log_branch(lam):
    if isinstance(lam, complex) and lam.imag != 0:
        return
    value = complex(lam).real
    if value != 1 and abs(value - round(value)) < 1e-12:
        raise LogBranchError(f"integer lambda={value} sits on a log branch at rho = 1")


def phi0_at(lam, rho_m: Optional[float] = None, config: ShootingConfig = DEFAULT_SHOOTING):
    """(phi0, phi0') at rho_m, normalized by phi0'(0) = 2."""
    rho_m = config.match_point if rho_m is None else rho_m
    if not config.delta0 <= rho_m < 1:
        raise DomainError(f"rho_m={rho_m} must lie in [{config.delta0}, 1)")
    if lam == 1:
        return HomogeneousBasis.theta(rho_m), HomogeneousBasis.dtheta(rho_m)
    series = series_phi0(lam, config.series_order, config.series_radius)
    u, du = series_eval(series, config.delta0)
    if rho_m == config.delta0:
        return u, du
    sol = _solve(lam, config.delta0, _initial_state(u, du, lam), rho_m, config)
    return sol.y[0, -1], sol.y[1, -1]


def phi1_at(lam, rho_m: Optional[float] = None, config: ShootingConfig = DEFAULT_SHOOTING):
    """(phi1, phi1') at rho_m, normalized by phi1(1) = 1."""
    _check_real_half_plane(lam)
    _check_log_branch(lam)
    rho_m = config.match_point if rho_m is None else rho_m
    launch = 1.0 - config.delta1
    if not 0 < rho_m <= launch:
        raise DomainError(f"rho_m={rho_m} must lie in (0, {launch}]")
    if lam == 1:
        return HomogeneousBasis.theta(rho_m), HomogeneousBasis.dtheta(rho_m)
    series = series_phi1(lam, config.series_order, config.series_radius)
    u, du = series_eval_local(series, config.delta1)
    if rho_m == launch:
        return u, du
    sol = _solve(lam, launch, _initial_state(u, du, lam), rho_m, config)
    return sol.y[0, -1], sol.y[1, -1]


def _tagged(rho, lam, u, du, tags):
    return GridFunction(np.asarray(rho, dtype=float), u, du, lam, tags=tags)


def _closed_form_profile(rho, lam):
    tags = np.full(rho.shape, "closed-form", dtype=object)
    return _tagged(rho, lam, HomogeneousBasis.theta(rho), HomogeneousBasis.dtheta(rho), tags)


def phi0_profile(lam, rho, config: ShootingConfig = DEFAULT_SHOOTING) -> GridFunction:
    """phi0 sampled on an arbitrary grid in [0, 1)."""
    rho = np.asarray(rho, dtype=float)
    if np.any(rho < 0) or np.any(rho >= 1):
        raise DomainError("phi0 profile grid must lie in [0, 1)")
    if lam == 1:
        return _closed_form_profile(rho, lam)
    dtype = complex if isinstance(lam, complex) else float
    u = np.empty(rho.shape, dtype=dtype)
    du = np.empty(rho.shape, dtype=dtype)
    tags = np.full(rho.shape, "integrated", dtype=object)
    series = series_phi0(lam, config.series_order, config.series_radius)
    near = rho <= config.delta0
    u[near], du[near] = series_eval(series, rho[near])
    tags[near] = "series"
    far = ~near
    if np.any(far):
        start_u, start_du = series_eval(series, config.delta0)
        sol = _solve(lam, config.delta0, _initial_state(start_u, start_du, lam), rho[far].max(), config, dense=True)
        values = sol.sol(rho[far])
        u[far], du[far] = values[0], values[1]
    return _tagged(rho, lam, u, du, tags)


def phi1_profile(lam, rho=None, config: ShootingConfig = DEFAULT_SHOOTING, offsets=None) -> GridFunction:
    """phi1 sampled on a grid in (0, 1]; pass `offsets` = 1 - rho to resolve rho near 1."""
    _check_real_half_plane(lam)
    _check_log_branch(lam)
    if offsets is None:
        rho = np.asarray(rho, dtype=float)
        offsets = 1.0 - rho
    else:
        offsets = np.asarray(offsets, dtype=float)
        rho = 1.0 - offsets
    if np.any(offsets < 0) or np.any(offsets >= 1):
        raise DomainError("phi1 profile grid must lie in (0, 1]")
    if lam == 1:
        theta = HomogeneousBasis.theta(rho)
        tags = np.full(rho.shape, "closed-form", dtype=object)
        return _tagged(rho, lam, theta, HomogeneousBasis.dtheta(rho), tags)
    dtype = complex if isinstance(lam, complex) else float
    u = np.empty(rho.shape, dtype=dtype)
    du = np.empty(rho.shape, dtype=dtype)
    tags = np.full(rho.shape, "integrated", dtype=object)
    series = series_phi1(lam, config.series_order, config.series_radius)
    near = offsets <= config.delta1
    u[near], du[near] = series_eval_local(series, offsets[near])
    tags[near] = "series"
    far = ~near
    if np.any(far):
        start_u, start_du = series_eval_local(series, config.delta1)
        launch = 1.0 - config.delta1
        sol = _solve(lam, launch, _initial_state(start_u, start_du, lam), rho[far].min(), config, dense=True)
        values = sol.sol(rho[far])
        u[far], du[far] = values[0], values[1]
    return _tagged(rho, lam, u, du, tags)


# --- miss function --------------------------------------------------------

def normalized_wronskian(left, right):
    """(W, normalization, W / normalization) for two (u, u') pairs."""
    u0, du0 = left
    u1, du1 = right
    wronskian = u0 * du1 - du0 * u1
    normalization = float((abs(u0) + abs(du0)) * (abs(u1) + abs(du1)))
    if normalization < NORMALIZATION_FLOOR:
        return wronskian, normalization, math.nan
    return wronskian, normalization, wronskian / normalization


def classify(normalized, tol: float) -> str:
    if normalized is None or not np.isfinite(abs(normalized)):
        return INDETERMINATE
    return EIGENVALUE_CANDIDATE if abs(normalized) < tol else NO_EIGENVALUE


def miss(lam, config: ShootingConfig = DEFAULT_SHOOTING) -> ConnectionResult:
    """Normalized Wronskian of phi0 and phi1 at the matching point."""
    _check_real_half_plane(lam)
    lam = ModeParameter.from_value(lam, nudge=0.0).scalar
    rho_m = config.match_point
    left = phi0_at(lam, rho_m, config)
    right = phi1_at(lam, rho_m, config)
    wronskian, normalization, normalized = normalized_wronskian(left, right)
    abel = wronskian * rho_m ** 2 * (1.0 - rho_m ** 2) ** lam
    return ConnectionResult(
        lam=lam,
        match_point=rho_m,
        wronskian=wronskian,
        abel_invariant=abel,
        normalization=normalization,
        normalized=normalized,
        classification=classify(normalized, config.eigen_tol),
        phi0=left,
        phi1=right,
    )


def _miss_task(task):
    lam, config = task
    try:
        return miss(lam, config), None
    except WavemapError as e:
        return None, str(e)


def _evaluate_many(lambdas, config: ShootingConfig, workers: int):
    tasks = [(lam, config) for lam in lambdas]
    if workers <= 1 or len(tasks) < 2:
        return [_miss_task(task) for task in tasks]
    # map() keeps submission order, so the merge is deterministic
    with ProcessPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(_miss_task, tasks, chunksize=max(1, len(tasks) // (4 * workers))))


def scan_real(
    lo: float,
    hi: float,
    n: int,
    config: ShootingConfig = DEFAULT_SHOOTING,
    workers: int = 1,
    xtol: float = 1e-10,
) -> ScanReport:
    """Samples the normalized miss on a real grid and refines every sign change."""
    if not 0 < lo < hi:
        raise DomainError(f"need 0 < lo < hi, got {lo}, {hi}")
    if n < 2:
        raise DomainError(f"need n >= 2 grid points, got {n}")
    started = time.perf_counter()
    logger.info(f"Scanning lambda in [{lo}, {hi}] with n={n}, rho_m={config.match_point}")

    grid = [ModeParameter.from_value(value).value.real for value in np.linspace(lo, hi, n)]
    outcomes = _evaluate_many(grid, config, workers)

    report = ScanReport(lo=lo, hi=hi, n=n, lambdas=grid, miss=[], abel_invariant=[], classifications=[])
    values = []
    for lam, (result, error) in zip(grid, outcomes):
        if result is None:
            logger.warning(f"miss failed at lambda={lam}: {error}")
            report.failures.append({"lambda": lam, "error": error})
            values.append(math.nan)
            report.miss.append(math.nan)
            report.abel_invariant.append(math.nan)
            report.classifications.append(INDETERMINATE)
            continue
        values.append(float(np.real(result.normalized)))
        report.miss.append(values[-1])
        report.abel_invariant.append(float(np.real(result.abel_invariant)))
        report.classifications.append(result.classification)

    evaluations = len(grid)

    def objective(lam):
        return float(np.real(miss(ModeParameter.from_value(lam).scalar, config).normalized))

    for i, value in enumerate(values):
        if report.classifications[i] == EIGENVALUE_CANDIDATE and value == 0.0:
            report.roots.append(RootEstimate(grid[i], (grid[i], grid[i]), 0.0, 0.0))

    for i in range(len(grid) - 1):
        a, b = values[i], values[i + 1]
        if not (np.isfinite(a) and np.isfinite(b)) or a * b >= 0:
            continue
        bracket = (grid[i], grid[i + 1])
        report.sign_changes.append(bracket)
        try:
            root, info = optimize.brentq(objective, *bracket, xtol=xtol, full_output=True)
        except (ValueError, WavemapError) as e:
            logger.warning(f"refinement failed in {bracket}: {e}")
            report.failures.append({"lambda": bracket, "error": str(e)})
            continue
        evaluations += info.function_calls
        residual = abs(objective(root))
        evaluations += 1
        if residual < config.eigen_tol:
            report.roots.append(RootEstimate(root, bracket, xtol, residual))
        else:
            # sign flip through a pole or a normalization kink, not a zero
            report.discontinuities.append({"bracket": bracket, "lambda": root, "residual": residual})

    report.roots.sort(key=lambda r: r.value)
    report.runtime = runtime_metadata(started, workers=workers, evaluations=evaluations)
    log_run_status(f"Scan [{lo}, {hi}] found {len(report.roots)} root(s)", report.runtime)
    return report


# --- argument principle ---------------------------------------------------

def _boundary(rectangle, n_per_side):
    re_lo, re_hi, im_lo, im_hi = rectangle
    corners = [
        complex(re_lo, im_lo),
        complex(re_hi, im_lo),
        complex(re_hi, im_hi),
        complex(re_lo, im_hi),
    ]
    points = []
    for start, end in zip(corners, corners[1:] + corners[:1]):
        for k in range(n_per_side):
            points.append(start + (end - start) * k / n_per_side)
    return points


def scan_complex(
    rectangle: tuple,
    n_per_side: int = 32,
    config: ShootingConfig = DEFAULT_SHOOTING,
    max_depth: int = 8,
) -> ContourReport:
    """Winding number of the connection Wronskian along a positively oriented rectangle.

    rectangle is (Re lo, Re hi, Im lo, Im hi). Segments whose phase step
    exceeds pi/2 are bisected up to `max_depth` times.
    """
    re_lo, re_hi, im_lo, im_hi = rectangle
    if re_hi < re_lo or im_hi < im_lo:
        raise DomainError(f"rectangle corners out of order: {rectangle}")
    if re_hi == re_lo or im_hi == im_lo:
        return ContourReport(tuple(rectangle), 0, 0.0, 0, 0.0)
    if re_lo <= 0:
        raise DomainError("rectangle must lie in Re lambda > 0")
    if n_per_side < 2:
        raise DomainError("need at least two points per side")

    started = time.perf_counter()
    evaluations = 0

    def value(lam):
        nonlocal evaluations
        evaluations += 1
        result = miss(lam if lam.imag != 0 else lam.real, config)
        if result.abel_invariant == 0:
            raise ArgumentJumpError(f"connection value vanishes on the contour at lambda={lam}")
        return complex(result.abel_invariant)

    def step(a, b, fa, fb, depth):
        increment = np.angle(fb / fa)
        if abs(increment) <= math.pi / 2:
            return increment, abs(increment)
        if depth >= max_depth:
            raise ArgumentJumpError(f"phase step {increment:.3f} between {a} and {b} after {depth} bisections")
        mid = 0.5 * (a + b)
        fm = value(mid)
        left, left_max = step(a, mid, fa, fm, depth + 1)
        right, right_max = step(mid, b, fm, fb, depth + 1)
        return left + right, max(left_max, right_max)

    points = _boundary(rectangle, n_per_side)
    samples = [value(lam) for lam in points]
    total, largest = 0.0, 0.0
    for i in range(len(points)):
        j = (i + 1) % len(points)
        increment, biggest = step(points[i], points[j], samples[i], samples[j], 0)
        total += increment
        largest = max(largest, biggest)

    raw = total / (2 * math.pi)
    winding = int(round(raw))
    if abs(raw - winding) > 0.1:
        raise ArgumentJumpError(f"accumulated winding {raw:.3f} is not close to an integer")
    log_run_status(
        f"Contour {rectangle} winding {winding}",
        runtime_metadata(started, evaluations=evaluations),
    )
    return ContourReport(tuple(rectangle), winding, raw, evaluations, largest)
