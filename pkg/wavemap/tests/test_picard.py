import numpy as np
import pytest

from wavemap.core.config import DEFAULT_PICARD, PicardConfig
from wavemap.core.errors import ContractionNotFound, DomainError, PicardDivergenceError
from wavemap.spectral import picard
from wavemap.spectral.connection import phi0_profile, phi1_profile
from wavemap.spectral.odecore import HomogeneousBasis

SLACK = 0.05


def test_candidate_sequences_decrease():
    assert picard.ZERO_CANDIDATES[0] == 0.9
    assert all(b < a for a, b in zip(picard.ZERO_CANDIDATES, picard.ZERO_CANDIDATES[1:]))
    assert picard.ONE_CANDIDATES[0] == 0.5
    assert all(b < a for a, b in zip(picard.ONE_CANDIDATES, picard.ONE_CANDIDATES[1:]))


def test_zero_side_bounds_vanish_at_origin():
    rho, alpha, beta = picard.zero_side_bounds(0.5, panels=50)
    assert alpha[0] == 0.0 and beta[0] == 0.0
    assert np.all(alpha >= 0) and np.all(beta >= 0)
    # alpha ~ 5 rho^2 / 12, beta ~ rho / 2 near the origin
    assert alpha[5] == pytest.approx(5.0 * rho[5] ** 2 / 12.0, rel=0.05)
    assert beta[5] == pytest.approx(rho[5] / 2.0, rel=0.05)


def test_gauge_value_contracts_on_largest_candidate():
    estimate = picard.contraction_radius_zero(1.0)
    assert estimate.endpoint == 0.9
    assert estimate.constant == 0.0
    assert estimate.tested == 1


def test_zero_side_radius_grows_toward_gauge():
    radii = [picard.contraction_radius_zero(lam).endpoint for lam in (0.25, 0.5, 0.75, 1.0)]
    assert radii == sorted(radii)
    assert radii[1] == pytest.approx(0.7, abs=0.051)
    for lam in (0.25, 0.5, 0.75):
        estimate = picard.contraction_radius_zero(lam)
        assert estimate.contractive and estimate.constant < DEFAULT_PICARD.safety


def test_no_contraction_for_huge_lambda():
    with pytest.raises(ContractionNotFound):
        picard.contraction_radius_zero(1000.0)


def test_gauge_fixed_point_is_theta():
    run = picard.picard_phi0(1.0, 0.9)
    assert run.converged
    assert run.iterations == 1
    assert np.allclose(run.u, HomogeneousBasis.theta(run.nodes), rtol=0, atol=1e-15)


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_zero_side_matches_shooting(lam):
    estimate = picard.contraction_radius_zero(lam)
    run = picard.picard_phi0(lam, estimate.endpoint, contraction=estimate.constant)
    assert run.converged
    assert run.u[0] == 0.0 and run.du[0] == 2.0
    shooting = phi0_profile(lam, run.nodes)
    assert np.max(np.abs(run.u - shooting.u)) < 1e-8
    assert all(ratio <= estimate.constant + SLACK for ratio in run.ratios(floor=1e-11))
    assert run.ode_residual() < 1e-6
    assert run.derivative_consistency() < 1e-6


@pytest.mark.parametrize("lam", [0.25, 0.5, 0.75])
def test_one_side_matches_shooting(lam):
    estimate = picard.contraction_radius_one(lam)
    assert estimate.offset in picard.ONE_CANDIDATES
    run = picard.picard_phi1(lam, offset=estimate.offset, contraction=estimate.constant)
    assert run.converged
    assert run.u[0] == 1.0
    assert run.du[0] == pytest.approx((2.0 - lam - lam * lam) / (2.0 * lam), rel=1e-12)
    shooting = phi1_profile(lam, offsets=run.offsets)
    assert np.max(np.abs(run.u - shooting.u)) < 1e-8
    assert all(ratio <= estimate.constant + SLACK for ratio in run.ratios(floor=1e-11))
    assert run.ode_residual() < 1e-6


def test_one_side_bound_starts_at_zero():
    offsets, alpha = picard.one_side_bound(0.5)
    assert offsets[0] == 0.0 and alpha[0] == 0.0
    assert np.all(np.diff(offsets) > 0)
    assert alpha[-1] > alpha[1] > 0


def test_extension_property_beyond_contraction_radius():
    assert picard.eq7_residual(0.5, a=0.9) < 1e-7


def test_run_converts_to_grid_function():
    run = picard.picard_phi0(0.5, 0.5)
    profile = run.as_grid_function()
    assert profile.lam == 0.5
    assert np.array_equal(profile.rho, run.nodes)


def test_iteration_cap_reports_nonconvergence():
    run = picard.picard_phi0(0.5, 0.7, config=PicardConfig(max_iter=2))
    assert not run.converged
    assert run.iterations == 2
    assert len(run.differences) == 2


def test_growing_differences_raise():
    def doubling(u, du):
        return 2.0 * u + 1.0, 2.0 * du + 1.0

    with pytest.raises(PicardDivergenceError):
        picard._iterate(doubling, np.zeros(3), np.zeros(3), picard._c0_norm, DEFAULT_PICARD, "doubling")


def test_argument_errors():
    with pytest.raises(DomainError):
        picard.picard_phi0(0.5, 1.0)
    with pytest.raises(DomainError):
        picard.picard_phi1(-0.5, 0.9)
    with pytest.raises(DomainError):
        picard.picard_phi1(0.5)
    with pytest.raises(DomainError):
        picard.one_side_bound(0.0)
