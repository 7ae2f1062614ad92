import numpy as np
import pytest

from arcd.ar import ARParams, fit, omega_p2, simulate
from arcd.cd import (
    ProbitQuadFit,
    UnderIdentifiedError,
    cd_asymptotic_density,
    cd_asymptotic_surface,
    cd_bootstrap_density,
    cd_bootstrap_surface,
    delta_bound,
    estimate_cdf_grid,
    fit_probit_quadratic,
    norm_pdf,
    norm_ppf,
)
from arcd.grids import ParamGrid2D, region_from_density


def test_norm_ppf_against_scipy_oracle():
    from scipy.stats import norm

    q = np.array([1e-10, 0.001, 0.025, 0.5, 0.975, 0.999, 1 - 1e-10])
    np.testing.assert_allclose(norm_ppf(q), norm.ppf(q), atol=1e-9)
    assert norm_ppf(0.975) == pytest.approx(1.959963985, abs=1e-8)


def test_norm_ppf_clips_extremes():
    assert np.isfinite(norm_ppf(0.0))
    assert np.isfinite(norm_ppf(1.0))


def test_norm_pdf_hand_values():
    assert norm_pdf(0.0) == pytest.approx(1 / np.sqrt(2 * np.pi), abs=1e-15)
    assert norm_pdf(1.0) == pytest.approx(np.exp(-0.5) / np.sqrt(2 * np.pi), abs=1e-15)


def test_cd_asymptotic_density_frozen_values():
    # identity omega, n=100: peak value n/(2 pi) = 15.91549...;
    # at squared standardized distance 2/n the value is (n/2pi) e^{-1} = 5.85498...
    om = omega_p2(np.array([0.0, 0.0]))
    peak = cd_asymptotic_density(np.array([0.0, 0.0]), np.array([0.0, 0.0]), om, 100)
    assert peak == pytest.approx(100 / (2 * np.pi), rel=1e-12)
    off = cd_asymptotic_density(np.array([0.1, 0.1]), np.array([0.0, 0.0]), om, 100)
    assert off == pytest.approx(100 / (2 * np.pi) * np.exp(-1.0), rel=1e-12)
    assert off == pytest.approx(5.854983, abs=1e-5)


def test_cd_asymptotic_surface_mass_and_region():
    phi_hat = np.array([0.3, 0.1])
    om = omega_p2(phi_hat)
    grid = ParamGrid2D.around_estimate(phi_hat, om.omega, 200, m=80)
    surface = cd_asymptotic_surface(grid, phi_hat, om, 200)
    assert surface.riemann_mass() == pytest.approx(1.0, abs=1e-6)
    region = region_from_density(surface, 0.95)
    assert region.contains(phi_hat)


def test_cdf_grid_center_near_orthant_probability():
    # node at the truth: estimated value is the orthant probability of the
    # estimator's law; for omega with correlation rho it is
    # 1/4 + arcsin(rho)/(2 pi) asymptotically
    grid = ParamGrid2D(0.35, 0.45, 0.15, 0.25, 2)
    est = estimate_cdf_grid(grid, np.array([0.4, 0.2]), 400, sigma2=1.0, N_mc=4000, seed=5)
    om = omega_p2(np.array([0.4, 0.2])).omega
    rho = om[0, 1] / np.sqrt(om[0, 0] * om[1, 1])
    expected = 0.25 + np.arcsin(rho) / (2 * np.pi)
    center = est.cdf[1, 1]
    assert center == pytest.approx(expected, abs=4 / np.sqrt(4000))


def test_cdf_grid_corner_limits():
    # nodes far below phi_hat_obs in both coordinates -> value ~1
    # (almost all refits exceed them); far above -> ~0
    grid = ParamGrid2D(-0.6, 0.6, -0.6, 0.6, 8)
    est = estimate_cdf_grid(grid, np.array([0.0, 0.0]), 400, sigma2=1.0, N_mc=500, seed=2)
    assert est.cdf[0, 0] > 0.95
    hi = grid.nearest_node((0.35, 0.3))
    assert est.cdf[hi] < 0.05


def test_cdf_grid_deterministic():
    grid = ParamGrid2D(0.0, 0.4, -0.1, 0.3, 6)
    a = estimate_cdf_grid(grid, np.array([0.2, 0.1]), 50, sigma2=1.0, N_mc=400, seed=3)
    b = estimate_cdf_grid(grid, np.array([0.2, 0.1]), 50, sigma2=1.0, N_mc=400, seed=3)
    np.testing.assert_array_equal(a.cdf, b.cdf)


def test_cdf_grid_nan_outside_triangle():
    grid = ParamGrid2D(-0.3, 1.4, 0.3, 0.9, 8)
    est = estimate_cdf_grid(grid, np.array([0.3, 0.4]), 50, sigma2=1.0, N_mc=300, seed=1)
    outside = ~grid.in_region
    assert outside.any()
    assert np.all(np.isnan(est.cdf[outside]))
    inside = grid.in_region
    assert np.all((est.cdf[inside] >= 0) & (est.cdf[inside] <= 1))


def test_cdf_grid_monotone_after_smoothing():
    # stochastically nonincreasing along each axis, tolerance 3/sqrt(N_mc)
    grid = ParamGrid2D(-0.2, 0.6, -0.3, 0.5, 12)
    n_mc = 1200
    est = estimate_cdf_grid(grid, np.array([0.2, 0.1]), 200, sigma2=1.0, N_mc=n_mc, seed=17)
    tol = 3.0 / np.sqrt(n_mc)
    c = est.cdf
    for axis in (0, 1):
        diffs = np.diff(c, axis=axis)
        diffs = diffs[np.isfinite(diffs)]
        assert np.all(diffs <= tol)


def test_delta_bound_frozen_values():
    # n=100, phi=(0,0): exp(6.04 - 2.64 log 100) = exp(-6.11765...) = 2.20363e-3
    assert delta_bound(100, 0.0, 0.0) == pytest.approx(2.20363e-3, rel=1e-4)
    # large positive coefficients push the bound above the 0.1 cap
    assert delta_bound(50, 0.5, 0.5) == pytest.approx(0.1)
    # huge n drives the expression below the floor
    assert delta_bound(10**9, -1.0, -1.0) == pytest.approx(1e-6)


def test_fit_probit_quadratic_recovers_exact_coefficients():
    # build an exact probit-quadratic CDF field and check lstsq recovery
    grid = ParamGrid2D(-0.2, 0.5, -0.3, 0.4, 25)
    coef = np.array([0.3, -1.5, -2.0, 0.4, 0.6, 0.8])
    p1, p2 = grid.mesh()
    z = (
        coef[0]
        + coef[1] * p1
        + coef[2] * p2
        + coef[3] * p1**2
        + coef[4] * p2**2
        + coef[5] * p1 * p2
    )
    from scipy.special import ndtr

    cdf_vals = np.where(grid.in_region, ndtr(z), np.nan)
    from arcd.cd import CdfGridEstimate

    est = CdfGridEstimate(grid=grid, cdf=cdf_vals, N_mc=1000)
    pq = fit_probit_quadratic(est, 100)
    np.testing.assert_allclose(pq.coefficients, coef, atol=1e-8)


def test_fit_probit_quadratic_underidentified():
    grid = ParamGrid2D(0.0, 0.1, 0.0, 0.1, 2)
    cdf_vals = np.full((3, 3), np.nan)
    cdf_vals[0, 0] = 0.5
    from arcd.cd import CdfGridEstimate

    est = CdfGridEstimate(grid=grid, cdf=cdf_vals, N_mc=100)
    with pytest.raises(UnderIdentifiedError):
        fit_probit_quadratic(est, 100)


def test_cd_bootstrap_density_matches_finite_differences(rng):
    # the analytic mixed partial d2/dphi1 dphi2 of Phi(z(phi)) against a
    # centered 4-point finite-difference stencil
    for _ in range(30):
        coef = rng.normal(scale=1.0, size=6)
        pq = ProbitQuadFit(
            c0=coef[0], c1=coef[1], c2=coef[2], c11=coef[3], c22=coef[4], c12=coef[5],
            n_used=400, delta=0.01,
        )
        point = rng.uniform(-0.4, 0.4, size=2)

        def cdf(p1, p2):
            from scipy.special import ndtr

            z = (
                coef[0] + coef[1] * p1 + coef[2] * p2
                + coef[3] * p1**2 + coef[4] * p2**2 + coef[5] * p1 * p2
            )
            return ndtr(z)

        h = 1e-4
        p1, p2 = point
        fd = (
            cdf(p1 + h, p2 + h) - cdf(p1 + h, p2 - h)
            - cdf(p1 - h, p2 + h) + cdf(p1 - h, p2 - h)
        ) / (4 * h * h)
        analytic = cd_bootstrap_density(pq, point)
        assert analytic == pytest.approx(fd, rel=5e-6, abs=1e-9)


def test_cd_bootstrap_surface_normalized_region():
    phi0 = np.array([0.4, 0.2])
    series = simulate(ARParams(phi=phi0, sigma2=1.0), 100, 31)
    fr = fit(series, 2)
    om = omega_p2(fr.phi_hat)
    grid = ParamGrid2D.around_estimate(fr.phi_hat, om.omega, 100, m=40)
    est = estimate_cdf_grid(grid, fr.phi_hat, 100, sigma2=1.0, N_mc=600, seed=13)
    pq = fit_probit_quadratic(est, 100)
    surface = cd_bootstrap_surface(grid, pq)
    assert surface.riemann_mass() == pytest.approx(1.0, abs=1e-6)
    region = region_from_density(surface, 0.9)
    assert region.area > 0


def test_probit_fit_invariant_to_node_order():
    # lstsq over grid nodes; shuffling which nodes are masked NaN vs kept
    # must not change the fit when the kept set is identical
    grid = ParamGrid2D(-0.1, 0.5, -0.2, 0.4, 15)
    est = estimate_cdf_grid(grid, np.array([0.2, 0.1]), 120, sigma2=1.0, N_mc=500, seed=8)
    pq1 = fit_probit_quadratic(est, 120)
    pq2 = fit_probit_quadratic(est, 120)
    np.testing.assert_array_equal(pq1.coefficients, pq2.coefficients)
    assert pq1.delta == pq2.delta
    assert pq1.n_used == pq2.n_used


def test_probit_fit_to_dict_roundtrip():
    est = estimate_cdf_grid(ParamGrid2D(-0.1, 0.5, -0.2, 0.4, 12), np.array([0.2, 0.1]), 100, 1.0, 400, 2)
    pq = fit_probit_quadratic(est, 100)
    d = pq.to_dict()
    for key in ("c0", "c1", "c2", "c11", "c22", "c12", "n_used", "delta"):
        assert key in d
