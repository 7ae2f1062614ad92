import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from arcd.ar import (
    ARParams,
    DegenerateDesignError,
    InvalidParameterError,
    NearSingularWarning,
    SeriesSample,
    companion_matrix,
    fit,
    fit_batch,
    is_causal,
    is_stationary_p2,
    lagged_design,
    log_likelihood,
    omega_general,
    omega_p2,
    omega_p2_batch,
    quadratic_form_a,
    quadratic_form_a_from_fit,
    simulate,
    simulate_from_innovations,
    stationary_triangle_mask,
)
from arcd.rng import derive_rng


def test_simulate_from_innovations_hand_recursion():
    # phi=0.5, eps=(1,-1,2) with zero pre-sample:
    # y1=1, y2=0.5*1-1=-0.5, y3=0.5*(-0.5)+2=1.75
    y = simulate_from_innovations(np.array([0.5]), np.array([1.0, -1.0, 2.0]))
    np.testing.assert_allclose(y, [1.0, -0.5, 1.75], rtol=0, atol=1e-15)


def test_simulate_from_innovations_p2_hand_recursion():
    # phi=(0.4,0.2), eps=(1,0,0): y1=1, y2=0.4, y3=0.4*0.4+0.2*1=0.36
    y = simulate_from_innovations(np.array([0.4, 0.2]), np.array([1.0, 0.0, 0.0]))
    np.testing.assert_allclose(y, [1.0, 0.4, 0.36], atol=1e-15)


def test_simulate_deterministic_in_seed():
    params = ARParams(phi=np.array([0.4, 0.2]), sigma2=1.0)
    a = simulate(params, 50, 123).values
    b = simulate(params, 50, 123).values
    c = simulate(params, 50, 124).values
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, c)


def test_lagged_design_zero_presample():
    x = lagged_design(np.array([1.0, 2.0, 3.0, 4.0]), 2)
    expected = np.array([[0.0, 0.0], [1.0, 0.0], [2.0, 1.0], [3.0, 2.0]])
    np.testing.assert_array_equal(x, expected)


def test_fit_hand_normal_equations():
    # y=(1,-0.5,1.75), p=1: XtX=1.25, Xty=-1.375, phi_hat=-1.1,
    # residuals=(1,0.6,1.2), sigma2_hat=2.8/3.
    fr = fit(SeriesSample(np.array([1.0, -0.5, 1.75])), 1)
    np.testing.assert_allclose(fr.phi_hat, [-1.1], atol=1e-12)
    np.testing.assert_allclose(fr.sigma2_hat, 2.8 / 3.0, atol=1e-12)
    np.testing.assert_allclose(fr.residuals, [1.0, 0.6, 1.2], atol=1e-12)


def test_fit_normal_equation_residual_invariant():
    # X'(y - X phi_hat) = 0 to 1e-9 for typical simulated data.
    for seed in range(5):
        series = simulate(ARParams(phi=np.array([0.4, 0.2]), sigma2=1.0), 200, seed)
        fr = fit(series, 2)
        x = lagged_design(series.values, 2)
        grad = x.T @ (series.values - x @ fr.phi_hat)
        assert np.max(np.abs(grad)) <= 1e-9 * max(1.0, np.abs(fr.xty).max())


def test_fit_rejects_short_series():
    with pytest.raises(InvalidParameterError):
        fit(SeriesSample(np.array([1.0, 2.0])), 2)


def test_fit_degenerate_design():
    with pytest.raises(DegenerateDesignError):
        fit(SeriesSample(np.zeros(20)), 2)


def test_fit_batch_matches_fit():
    rng = derive_rng(7)
    y = rng.normal(size=(6, 80))
    batch = fit_batch(y, 2)
    for i in range(6):
        np.testing.assert_allclose(batch[i], fit(SeriesSample(y[i]), 2).phi_hat, atol=1e-10)


def test_fit_batch_nan_for_singular_entry():
    y = np.zeros((3, 30))
    y[0] = derive_rng(1).normal(size=30)
    out = fit_batch(y, 2)
    assert np.all(np.isfinite(out[0]))
    assert np.all(np.isnan(out[1:]))


def test_quadratic_form_hand_value():
    # A(0.5) for y=(1,-0.5,1.75): residuals (1,-1,2), sum of squares 6.
    series = SeriesSample(np.array([1.0, -0.5, 1.75]))
    assert quadratic_form_a(np.array([0.5]), series) == pytest.approx(6.0, abs=1e-12)


@given(
    st.lists(st.floats(-3, 3), min_size=8, max_size=30),
    st.floats(-0.9, 0.9),
    st.floats(-0.9, 0.9),
)
@settings(max_examples=50, deadline=None)
def test_quadratic_form_identity(values, phi1, phi2):
    # A(phi) computed from residuals equals the expansion
    # total_ss - phi' XtX (2 phi_hat - phi), to 1e-9 relative.
    series = SeriesSample(np.array(values))
    try:
        fr = fit(series, 2)
    except DegenerateDesignError:
        return
    phi = np.array([phi1, phi2])
    direct = quadratic_form_a(phi, series)
    total_ss = float(series.values @ series.values)
    expanded = quadratic_form_a_from_fit(phi, fr, total_ss)
    assert expanded == pytest.approx(direct, rel=1e-9, abs=1e-9)


def test_log_likelihood_matches_quadratic_form():
    series = simulate(ARParams(phi=np.array([0.4, 0.2]), sigma2=1.0), 60, 3)
    phi = np.array([0.3, 0.1])
    sigma2 = 1.3
    ll = log_likelihood(ARParams(phi=phi, sigma2=sigma2), series)
    a = quadratic_form_a(phi, series)
    expected = -0.5 * series.n * np.log(2 * np.pi * sigma2) - a / (2 * sigma2)
    assert ll == pytest.approx(expected, rel=1e-12)


def test_companion_matrix_layout():
    c = companion_matrix(np.array([0.4, 0.2, -0.1]))
    expected = np.array([[0.4, 0.2, -0.1], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]])
    np.testing.assert_array_equal(c, expected)


def test_stationarity_triangle_vertices():
    # Interior points are stationary; points on/over each edge are not.
    assert is_stationary_p2(np.array([0.4, 0.2]))
    assert is_stationary_p2(np.array([0.0, 0.0]))
    assert not is_stationary_p2(np.array([0.8, 0.2]))  # phi1+phi2=1
    assert not is_stationary_p2(np.array([-1.2, 0.2]))  # phi2-phi1=1.4
    assert not is_stationary_p2(np.array([0.0, -1.0]))  # phi2=-1
    assert not is_stationary_p2(np.array([0.0, 1.2]))


def test_triangle_mask_matches_scalar():
    p1, p2 = np.meshgrid(np.linspace(-2.2, 2.2, 23), np.linspace(-1.2, 1.2, 13), indexing="ij")
    mask = stationary_triangle_mask(p1, p2)
    for i in range(p1.shape[0]):
        for j in range(p1.shape[1]):
            assert mask[i, j] == is_stationary_p2(np.array([p1[i, j], p2[i, j]]))


def test_is_causal_agrees_with_triangle_p2():
    rng = derive_rng(11)
    for _ in range(200):
        phi = rng.uniform([-2.1, -1.1], [2.1, 1.1])
        # skip a thin margin around the boundary where the eigenvalue
        # tolerance and the exact triangle legitimately disagree
        margin = min(1 - phi[0] - phi[1], 1 + phi[0] - phi[1], 1 + phi[1])
        if abs(margin) < 1e-6:
            continue
        assert is_causal(phi) == is_stationary_p2(phi)


def test_is_causal_p1():
    assert is_causal(np.array([0.99]))
    assert not is_causal(np.array([1.0]))
    assert not is_causal(np.array([-1.01]))


def test_omega_p2_frozen_value():
    # closed form at (0.4, 0.2): diag 1-0.04=0.96, off-diag -0.4*1.2=-0.48
    om = omega_p2(np.array([0.4, 0.2]))
    np.testing.assert_allclose(om.omega, [[0.96, -0.48], [-0.48, 0.96]], atol=1e-15)


def test_omega_p2_warns_outside_triangle():
    with pytest.warns(NearSingularWarning):
        omega_p2(np.array([0.9, 0.2]))


def test_omega_p2_batch_matches_scalar():
    p1 = np.array([0.4, -0.3, 0.0])
    p2 = np.array([0.2, 0.5, 0.0])
    batch = omega_p2_batch(p1, p2)
    for k in range(3):
        np.testing.assert_allclose(batch[k], omega_p2(np.array([p1[k], p2[k]])).omega, atol=1e-15)


def test_omega_general_p1_frozen():
    # AR(1): avar of sqrt(n)(phi_hat - phi) is 1 - phi^2 = 0.75 at phi=0.5
    om = omega_general(np.array([0.5]))
    np.testing.assert_allclose(om.omega, [[0.75]], atol=1e-12)


def test_omega_general_p3_against_simulation_oracle():
    # independent oracle: long stationary simulation via scipy.signal.lfilter,
    # sample autocovariance matrix Gamma_3, omega = sigma^2 * Gamma_3^{-1}
    from scipy.signal import lfilter

    phi = np.array([0.3, -0.2, 0.1])
    rng = np.random.default_rng(99)
    eps = rng.normal(size=1_200_000)
    y = lfilter([1.0], np.concatenate([[1.0], -phi]), eps)[200_000:]
    n = y.size
    gamma = np.array([y[: n - k] @ y[k:] / n for k in range(3)])
    from scipy.linalg import toeplitz

    g3 = toeplitz(gamma)
    oracle = np.linalg.inv(g3)
    om = omega_general(phi)
    np.testing.assert_allclose(om.omega, oracle, rtol=0.02, atol=0.02)


def test_omega_general_rejects_non_causal():
    with pytest.raises(InvalidParameterError):
        omega_general(np.array([1.1]))


def test_estimator_consistency_shrinks_with_n():
    # median |phi_hat - phi0| at n=400 is smaller than at n=100
    phi0 = np.array([0.4, 0.2])
    errs = {}
    for n in (100, 400):
        devs = []
        for rep in range(60):
            series = simulate(ARParams(phi=phi0, sigma2=1.0), n, 1000 * n + rep)
            devs.append(np.abs(fit(series, 2).phi_hat - phi0).max())
        errs[n] = np.median(devs)
    assert errs[400] < errs[100]
