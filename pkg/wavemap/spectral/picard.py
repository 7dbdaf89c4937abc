"""Fixed-point solvers for the two integral forms of the pencil.

Near rho = 0 the pencil is written as a perturbation of the lambda = 1
equation solved by theta and chi (variation of constants):

    K u = theta - theta int_0^rho chi Q u / W + chi int_0^rho theta Q u / W.

Near rho = 1 it is written around the fundamental system (1, psi):

    K u = 1 + int_rho^1 (psi / psi') q u - psi(rho) int_rho^1 (q / psi') u,

whose fixed point solves the pencil with u(1) = 1 and
u'(1) = (2 - lambda - lambda^2) / (2 lambda). Both maps are iterated on
composite Chebyshev grids; the rho = 1 side works in x = 1 - rho throughout.
"""
from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from wavemap.core.config import DEFAULT_PICARD, DEFAULT_SHOOTING, PicardConfig, ShootingConfig
from wavemap.core.errors import ContractionNotFound, DomainError, PicardDivergenceError
from wavemap.core.logger import get_logger
from wavemap.spectral import odecore
from wavemap.spectral.connection import GridFunction, phi0_profile
from wavemap.spectral.odecore import HomogeneousBasis
from wavemap.spectral.quadrature import CompositeGrid

logger = get_logger(__name__)

ZERO_CANDIDATES = tuple(round(0.9 - 0.05 * k, 2) for k in range(17)) + tuple(0.05 * 0.5 ** k for k in range(1, 10))
ONE_CANDIDATES = tuple(0.5 * 0.5 ** k for k in range(96))
ROUNDOFF_FLOOR = 1e-13
ZERO_BOUND_PANELS = 380
ZERO_BOUND_MAX = 0.95
ONE_BOUND_TAIL = 1e-30


@dataclass
class ContractionEstimate:
    lam: complex
    side: str
    endpoint: float
    offset: Optional[float]
    bound_sup: float
    constant: float
    contractive: bool
    tested: int


@dataclass(eq=False)
class PicardRun:
    lam: complex
    side: str
    interval: tuple
    nodes: np.ndarray
    u: np.ndarray
    du: np.ndarray
    iterations: int
    differences: list
    residual: float
    converged: bool
    contraction: Optional[float] = None
    offsets: Optional[np.ndarray] = None
    grid: Optional[CompositeGrid] = field(default=None, repr=False)

    def ratios(self, floor: float = ROUNDOFF_FLOOR) -> list[float]:
        """Ratios of successive differences, ignoring differences at roundoff level."""
        d = self.differences
        return [d[k + 1] / d[k] for k in range(len(d) - 1) if d[k] > floor and d[k + 1] > floor]

    def _interior(self):
        """Values on the composite grid and its non-endpoint mask."""
        start = 0 if self.side == "zero" else 1
        mask = np.ones(len(self.grid), dtype=bool)
        mask[0] = mask[-1] = False
        if self.side == "zero":
            mask &= self.grid.nodes > 0
        return slice(start, None), mask

    def ode_residual(self) -> float:
        """Largest relative pencil residual with u'' from spectral differentiation of u'."""
        part, mask = self._interior()
        u, du = self.u[part], self.du[part]
        if self.side == "zero":
            rho, x = self.grid.nodes, None
            d2u = self.grid.derivative(du)
        else:
            x = self.grid.nodes
            rho = 1.0 - x
            d2u = -self.grid.derivative(du)
        residual = odecore.pencil_residual(rho[mask], self.lam, u[mask], du[mask], d2u[mask], x=None if x is None else x[mask])
        return float(np.max(residual))

    def derivative_consistency(self) -> float:
        """sup |D u - u'| with D the panelwise spectral derivative."""
        part, mask = self._interior()
        derivative = self.grid.derivative(self.u[part])
        if self.side == "one":
            derivative = -derivative
        return float(np.max(np.abs(derivative[mask] - self.du[part][mask])))

    def as_grid_function(self) -> GridFunction:
        return GridFunction(self.nodes, self.u, self.du, self.lam)


# --- rho = 0 ---------------------------------------------------------------

def zero_side_bounds(rho_max: float = ZERO_BOUND_MAX, panels: int = ZERO_BOUND_PANELS, order: int = 8):
    """(nodes, alpha, beta) on [0, rho_max].

    alpha bounds the value of K u - K v and beta its derivative, both per
    unit C^1 norm of (1 - rho^2) Q (u - v).
    """
    grid = CompositeGrid.uniform(0.0, rho_max, panels, order)
    rho = grid.nodes
    chi_kernel, theta_kernel = odecore.variation_kernels(rho)
    chi_integral = grid.cumulative(np.abs(chi_kernel))
    theta_integral = grid.cumulative(np.abs(theta_kernel))
    alpha = np.zeros_like(rho)
    beta = np.zeros_like(rho)
    inside = rho > 0
    r = rho[inside]
    alpha[inside] = np.abs(HomogeneousBasis.theta(r)) * chi_integral[inside] + np.abs(HomogeneousBasis.chi(r)) * theta_integral[inside]
    beta[inside] = np.abs(HomogeneousBasis.dtheta(r)) * chi_integral[inside] + np.abs(HomogeneousBasis.dchi(r)) * theta_integral[inside]
    return rho, alpha, beta


def _q_bound(lam, rho0: float) -> float:
    return max(2.0 * abs(lam - 1.0) * rho0, abs(lam * (1.0 + lam) - 2.0))


def _sup_up_to(nodes, values, endpoint):
    inside = nodes <= endpoint
    return max(float(np.max(values[inside])), float(np.interp(endpoint, nodes, values)))


def contraction_radius_zero(lam, config: PicardConfig = DEFAULT_PICARD) -> ContractionEstimate:
    """Largest candidate rho0 for which the rho = 0 map contracts in C^1[0, rho0]."""
    nodes, alpha, beta = zero_side_bounds()
    for tested, rho0 in enumerate(ZERO_CANDIDATES, start=1):
        sup_alpha = _sup_up_to(nodes, alpha, rho0)
        sup_beta = _sup_up_to(nodes, beta, rho0)
        constant = _q_bound(lam, rho0) * (sup_alpha + sup_beta)
        if constant < config.safety:
            logger.info(f"rho0={rho0} contracts for lambda={lam} (constant {constant:.3f})")
            return ContractionEstimate(
                lam=lam,
                side="zero",
                endpoint=rho0,
                offset=None,
                bound_sup=_sup_up_to(nodes, alpha + beta, rho0),
                constant=constant,
                contractive=True,
                tested=tested,
            )
    raise ContractionNotFound(f"no rho0 down to {ZERO_CANDIDATES[-1]:.1e} contracts for lambda={lam}")


def _zero_side_map(grid: CompositeGrid, lam, theta, dtheta, chi, dchi, kernels):
    rho = grid.nodes
    chi_kernel, theta_kernel = kernels
    origin = rho == 0

    def apply(u, du):
        q = odecore.reduced_q(rho, lam, u, du)
        chi_integral = grid.cumulative(chi_kernel * q)
        theta_integral = grid.cumulative(theta_kernel * q)
        ku = theta - theta * chi_integral + chi * theta_integral
        dku = dtheta - dtheta * chi_integral + dchi * theta_integral
        # chi * int theta Q u vanishes like rho^2 at the origin
        ku[origin] = theta[origin]
        dku[origin] = dtheta[origin]
        return ku, dku

    return apply


def _zero_side_setup(lam, rho0: float, config: PicardConfig):
    grid = CompositeGrid.uniform(0.0, rho0, config.zero_panels, config.zero_order)
    rho = grid.nodes
    safe = np.where(rho > 0, rho, 0.5)
    chi = np.where(rho > 0, HomogeneousBasis.chi(safe), 0.0)
    dchi = np.where(rho > 0, HomogeneousBasis.dchi(safe), 0.0)
    theta, dtheta = HomogeneousBasis.theta(rho), HomogeneousBasis.dtheta(rho)
    apply = _zero_side_map(grid, lam, theta, dtheta, chi, dchi, odecore.variation_kernels(rho))
    return grid, theta, dtheta, apply


def _iterate(apply, u, du, norm, config: PicardConfig, label: str):
    differences = []
    growth = 0
    converged = False
    for iteration in range(1, config.max_iter + 1):
        ku, dku = apply(u, du)
        diff = norm(ku - u, dku - du)
        differences.append(diff)
        u, du = ku, dku
        if diff < config.tol:
            converged = True
            break
        if len(differences) > 1 and diff > differences[-2]:
            growth += 1
            if growth >= config.divergence_window:
                raise PicardDivergenceError(
                    f"{label}: differences grew {growth} times in a row (last {diff:.3e})"
                )
        else:
            growth = 0
    else:
        logger.warning(f"{label}: no convergence after {config.max_iter} iterations (last {differences[-1]:.3e})")
    ku, dku = apply(u, du)
    return u, du, iteration, differences, norm(ku - u, dku - du), converged


def _c1_norm(du_values, ddu_values):
    return float(np.max(np.abs(du_values)) + np.max(np.abs(ddu_values)))


def _c0_norm(du_values, _):
    return float(np.max(np.abs(du_values)))


def picard_phi0(
    lam,
    rho0: float,
    tol: Optional[float] = None,
    config: PicardConfig = DEFAULT_PICARD,
    contraction: Optional[float] = None,
) -> PicardRun:
    """Fixed point of the rho = 0 map on [0, rho0], started from theta."""
    if not 0 < rho0 < 1:
        raise DomainError(f"rho0 must lie in (0, 1), got {rho0}")
    if tol is not None:
        config = _with_tol(config, tol)
    grid, theta, dtheta, apply = _zero_side_setup(lam, rho0, config)
    label = f"picard phi0 lambda={lam} on [0, {rho0}]"
    u, du, iterations, differences, residual, converged = _iterate(apply, theta, dtheta, _c1_norm, config, label)
    logger.info(f"{label}: {iterations} iterations, residual {residual:.2e}")
    return PicardRun(
        lam=lam,
        side="zero",
        interval=(0.0, rho0),
        nodes=grid.nodes,
        u=u,
        du=du,
        iterations=iterations,
        differences=differences,
        residual=residual,
        converged=converged,
        contraction=contraction,
        grid=grid,
    )


def eq7_residual(lam, a: float = 0.9, config: PicardConfig = DEFAULT_PICARD, shooting: ShootingConfig = DEFAULT_SHOOTING) -> float:
    """sup |K phi0 - phi0| on [0, a] with phi0 from shooting."""
    grid, _, _, apply = _zero_side_setup(lam, a, config)
    profile = phi0_profile(lam, grid.nodes, shooting)
    ku, _ = apply(profile.u, profile.du)
    return float(np.max(np.abs(ku - profile.u)))


# --- rho = 1 ---------------------------------------------------------------

def _with_tol(config: PicardConfig, tol: float) -> PicardConfig:
    return replace(config, tol=tol)


def _psi_at_offset(lam, offset: float, config: PicardConfig):
    """psi(1 - offset) with base point config.psi_base, resolving offsets near 0."""
    base = config.psi_base
    far = 1.0 - base
    if offset >= far:
        value, _ = odecore.psi_eval(1.0 - offset, lam, base)
        return value
    grid = CompositeGrid.geometric(offset, far, config.one_ratio, config.one_order)
    y = grid.nodes
    return grid.integrate(odecore.psi_prime(1.0 - y, lam, x=y))


def _tail_weight(lam, absolute: bool):
    """Integral of a y^{lambda - 1} integrand over [0, y1] is f(y1) y1 / lambda."""
    return complex(lam).real if absolute else lam


def _one_side_setup(lam, x_max: float, x_tail: float, config: PicardConfig, absolute: bool = False):
    grid = CompositeGrid.geometric(x_tail, x_max, config.one_ratio, config.one_order)
    y = grid.nodes
    rho = 1.0 - y
    d_psi = odecore.psi_prime(rho, lam, x=y)
    psi = _psi_at_offset(lam, x_max, config) + grid.reverse_cumulative(d_psi)
    q = odecore.q_coefficient(rho, lam, x=y)
    w1 = psi / d_psi * q
    w2 = q / d_psi
    if absolute:
        psi, w1, w2 = np.abs(psi), np.abs(w1), np.abs(w2)
    return grid, psi, d_psi, w1, w2


def _cumulative_from_one(grid: CompositeGrid, values, weight):
    """int_0^{x_i} f over the composite grid plus the power-law sliver [0, x_tail]."""
    sliver = values[0] * grid.nodes[0] / weight
    return sliver + grid.cumulative(values)


def one_side_bound(lam, config: PicardConfig = DEFAULT_PICARD, x_max: float = 0.5, x_tail: float = ONE_BOUND_TAIL):
    """(offsets, alpha) with alpha(x) the Lipschitz bound of the rho = 1 map on [1 - x, 1]."""
    if complex(lam).real <= 0:
        raise DomainError(f"Re lambda must be > 0, got {lam}")
    grid, psi, _, w1, w2 = _one_side_setup(lam, x_max, x_tail, config, absolute=True)
    weight = _tail_weight(lam, absolute=True)
    alpha = _cumulative_from_one(grid, w1, weight) + psi * _cumulative_from_one(grid, w2, weight)
    offsets = np.concatenate(([0.0], grid.nodes))
    return offsets, np.concatenate(([0.0], np.real(alpha)))


def contraction_radius_one(lam, config: PicardConfig = DEFAULT_PICARD) -> ContractionEstimate:
    """Largest candidate offset X = 1 - rho1 for which the rho = 1 map contracts in C^0[rho1, 1]."""
    offsets, alpha = one_side_bound(lam, config)
    running = np.maximum.accumulate(alpha)
    for tested, x in enumerate(ONE_CANDIDATES, start=1):
        if x < offsets[1]:
            break
        constant = float(np.interp(x, offsets, running))
        if constant < config.safety:
            logger.info(f"rho1=1-{x:.3e} contracts for lambda={lam} (constant {constant:.3f})")
            return ContractionEstimate(
                lam=lam,
                side="one",
                endpoint=1.0 - x,
                offset=x,
                bound_sup=constant,
                constant=constant,
                contractive=True,
                tested=tested,
            )
    raise ContractionNotFound(f"no rho1 with offset down to {ONE_CANDIDATES[-1]:.1e} contracts for lambda={lam}")


def picard_phi1(
    lam,
    rho1: Optional[float] = None,
    tol: Optional[float] = None,
    config: PicardConfig = DEFAULT_PICARD,
    offset: Optional[float] = None,
    contraction: Optional[float] = None,
) -> PicardRun:
    """Fixed point of the rho = 1 map on [rho1, 1], started from u = 1.

    Give `offset` = 1 - rho1 directly when rho1 is within a few ulps of 1.
    """
    if complex(lam).real <= 0:
        raise DomainError(f"Re lambda must be > 0, got {lam}")
    if offset is None:
        if rho1 is None:
            raise DomainError("need rho1 or offset")
        offset = 1.0 - rho1
    if not 0 < offset < 1:
        raise DomainError(f"offset 1 - rho1 must lie in (0, 1), got {offset}")
    if tol is not None:
        config = _with_tol(config, tol)

    x_tail = min(config.one_tail, offset * 1e-6)
    grid, psi, d_psi, w1, w2 = _one_side_setup(lam, offset, x_tail, config)
    weight = _tail_weight(lam, absolute=False)
    slope_at_one = (2.0 - lam - lam * lam) / (2.0 * lam)
    size = len(grid) + 1
    dtype = complex if isinstance(lam, complex) else float

    def apply(u, du):
        inner = u[1:]
        a = _cumulative_from_one(grid, w1 * inner, weight)
        b = _cumulative_from_one(grid, w2 * inner, weight)
        ku = np.empty(size, dtype=dtype)
        dku = np.empty(size, dtype=dtype)
        ku[1:] = 1.0 + a - psi * b
        dku[1:] = -d_psi * b
        ku[0] = 1.0
        dku[0] = slope_at_one * u[0]
        return ku, dku

    label = f"picard phi1 lambda={lam} on [1-{offset:.3e}, 1]"
    start = np.ones(size, dtype=dtype)
    u, du, iterations, differences, residual, converged = _iterate(
        apply, start, np.zeros(size, dtype=dtype), _c0_norm, config, label
    )
    logger.info(f"{label}: {iterations} iterations, residual {residual:.2e}")
    offsets = np.concatenate(([0.0], grid.nodes))
    return PicardRun(
        lam=lam,
        side="one",
        interval=(1.0 - offset, 1.0),
        nodes=1.0 - offsets,
        u=u,
        du=du,
        iterations=iterations,
        differences=differences,
        residual=residual,
        converged=converged,
        contraction=contraction,
        offsets=offsets,
        grid=grid,
    )
