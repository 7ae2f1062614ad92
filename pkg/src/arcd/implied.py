"""Log implied prior n^{-1} log{c~(phi)/L(phi, sigma2)}, the residual after
removing the flat-prior main term, and the order-1 rest-term reference
function."""

from __future__ import annotations

import math

import numpy as np

from arcd.ar import CovMatrix, InvalidParameterError, SeriesSample, lagged_design

__all__ = [
    "log_implied_prior",
    "proposition1_residual",
    "rest_term_h_p1",
    "b_statistic",
]

#: Density floor applied to the confidence density before taking logs.
DENSITY_FLOOR = 1e-323
LOG_DENSITY_FLOOR = math.log(DENSITY_FLOOR)


def _quad_form(phi, phi_hat_obs, omega_hat: CovMatrix):
    d = np.asarray(phi_hat_obs, dtype=float) - np.asarray(phi, dtype=float)
    inv = omega_hat.inverse()
    return np.einsum("...k,kl,...l->...", d, inv, d)


def _prediction_ss(phi, series: SeriesSample, p: int):
    """A(phi) = sum of squared one-step errors, batched over the leading axes of phi."""
    phi = np.asarray(phi, dtype=float)
    x = lagged_design(series.values, p)
    resid = series.values - np.einsum("tk,...k->...t", x, phi)
    return np.einsum("...t,...t->...", resid, resid)


def log_implied_prior(phi, series: SeriesSample, phi_hat_obs, omega_hat: CovMatrix, sigma2: float):
    """n^{-1}[log c~(phi) - log L(phi, sigma2)], kept in log space throughout.

    c~ is the Gaussian asymptotic confidence density, floored at 1e-323
    before logging; the likelihood is evaluated exactly in log space.
    ``phi`` may be batched with the coefficient axis last.
    """
    if sigma2 <= 0:
        raise InvalidParameterError(f"sigma2 must be positive, got {sigma2}")
    phi = np.asarray(phi, dtype=float)
    phi_hat_obs = np.asarray(phi_hat_obs, dtype=float)
    p = phi_hat_obs.size
    n = series.n
    det = omega_hat.det
    if det <= 0:
        raise InvalidParameterError(f"covariance determinant {det:.3g} is not positive")
    log_cd = (
        0.5 * p * np.log(n)
        - 0.5 * p * np.log(2.0 * np.pi)
        - 0.5 * np.log(det)
        - 0.5 * n * _quad_form(phi, phi_hat_obs, omega_hat)
    )
    log_cd = np.maximum(log_cd, LOG_DENSITY_FLOOR)
    log_lik = -0.5 * n * np.log(2.0 * np.pi * sigma2) - _prediction_ss(phi, series, p) / (
        2.0 * sigma2
    )
    out = (log_cd - log_lik) / n
    return float(out) if out.ndim == 0 else out


def proposition1_residual(
    phi, series: SeriesSample, phi_hat_obs, omega_hat: CovMatrix, sigma2: float
):
    """Log implied prior minus its deterministic limit terms
    (log(2 pi sigma2) + 1)/2 and (p/2)(log n)/n."""
    phi_hat_obs = np.asarray(phi_hat_obs, dtype=float)
    p = phi_hat_obs.size
    n = series.n
    main = 0.5 * (np.log(2.0 * np.pi * sigma2) + 1.0)
    lognn = 0.5 * p * np.log(n) / n
    return log_implied_prior(phi, series, phi_hat_obs, omega_hat, sigma2) - main - lognn


def b_statistic(phi, series: SeriesSample, phi_hat_obs, omega_hat: CovMatrix, sigma2: float):
    """B = n sigma2 (phi_hat_obs - phi)' Omega^{-1} (phi_hat_obs - phi) - A(phi).

    B/(n sigma2) concentrates at -1 for causal truth as n grows.
    """
    phi_hat_obs = np.asarray(phi_hat_obs, dtype=float)
    n = series.n
    quad = _quad_form(phi, phi_hat_obs, omega_hat)
    a_val = _prediction_ss(phi, series, phi_hat_obs.size)
    out = n * sigma2 * quad - a_val
    return float(out) if np.ndim(out) == 0 else out


def rest_term_h_p1(phi0: float, phi: float) -> float:
    """Rest-term coefficient -phi0 (1 - 2 phi0 phi + phi^2) / (1 - phi0^2)^{3/2}
    for the order-1 model; requires |phi0| < 1."""
    if abs(phi0) >= 1.0:
        raise InvalidParameterError(f"|phi0| must be < 1, got {phi0}")
    return -phi0 * (1.0 - 2.0 * phi0 * phi + phi**2) / (1.0 - phi0**2) ** 1.5
