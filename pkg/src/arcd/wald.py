"""Wald statistic, chi-square reference law, residual-bootstrap null
distribution and grid confidence curves."""

from __future__ import annotations

import numpy as np
from scipy import special

from arcd.ar import (
    CovMatrix,
    DegenerateDesignError,
    FitResult,
    InvalidParameterError,
    SeriesSample,
    SingularMatrixError,
    fit,
    fit_batch,
    omega_p2,
    omega_general,
    omega_p2_batch,
    simulate_from_innovations,
)
from arcd.grids import ConfidenceSurface, ParamGrid2D, RegionResult, region_from_curve
from arcd.rng import derive_rng

__all__ = [
    "wald_statistic",
    "chi2_cdf",
    "bootstrap_wald_distribution",
    "confidence_curve",
    "region_from_curve",
]


def wald_statistic(phi0: np.ndarray, phi_hat: np.ndarray, omega: CovMatrix, n: int) -> float:
    """Scaled quadratic form n (phi_hat - phi0)' Omega^{-1} (phi_hat - phi0).

    The factor n standardizes the statistic so its large-sample null law is
    chi-square with p degrees of freedom.
    """
    diff = np.asarray(phi_hat, dtype=float) - np.asarray(phi0, dtype=float)
    inv = omega.inverse()
    return float(n * diff @ inv @ diff)


def chi2_cdf(x, dof: int):
    """Chi-square CDF with ``dof`` degrees of freedom (regularized lower
    incomplete gamma P(dof/2, x/2)); accepts array arguments."""
    if dof < 1:
        raise InvalidParameterError(f"dof must be >= 1, got {dof}")
    x = np.asarray(x, dtype=float)
    out = special.gammainc(dof / 2.0, np.clip(x, 0.0, None) / 2.0)
    return float(out) if out.ndim == 0 else out


def _omega_for(phi_hat: np.ndarray) -> CovMatrix:
    phi_hat = np.asarray(phi_hat, dtype=float)
    if phi_hat.size == 2:
        import warnings

        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            return omega_p2(phi_hat)
    return omega_general(phi_hat)


def _batch_wald(phi_ref: np.ndarray, phi_hats: np.ndarray, n: int) -> np.ndarray:
    """Q_k for a batch of estimates, each standardized by its own covariance.

    NaN marks replicates whose covariance was not invertible.
    """
    p = phi_ref.size
    diffs = phi_hats - phi_ref
    if p == 2:
        omegas = omega_p2_batch(phi_hats[:, 0], phi_hats[:, 1])
        det = omegas[:, 0, 0] * omegas[:, 1, 1] - omegas[:, 0, 1] * omegas[:, 1, 0]
        with np.errstate(divide="ignore", invalid="ignore"):
            q = (
                n
                * (
                    omegas[:, 1, 1] * diffs[:, 0] ** 2
                    - 2.0 * omegas[:, 0, 1] * diffs[:, 0] * diffs[:, 1]
                    + omegas[:, 0, 0] * diffs[:, 1] ** 2
                )
                / det
            )
        q = np.where(np.abs(det) < 1e-300, np.nan, q)
        return q
    q = np.empty(phi_hats.shape[0])
    for k in range(phi_hats.shape[0]):
        try:
            q[k] = wald_statistic(phi_ref, phi_hats[k], _omega_for(phi_hats[k]), n)
        except (SingularMatrixError, InvalidParameterError):
            q[k] = np.nan
    return q


def bootstrap_wald_distribution(
    series: SeriesSample, p: int, N: int, seed: int, fit_result: FitResult | None = None
) -> np.ndarray:
    """Residual-bootstrap null distribution of the Wald statistic.

    Fitted residuals are recentred, resampled with replacement to length n,
    run through the AR recursion with phi = phi_hat_obs and zero pre-sample
    values, and each regenerated series is refitted.  Q_k standardizes the
    refit estimate by its own covariance.  Returns the N values sorted
    ascending; failed replicates are redrawn, with a hard cap of N redraws.
    """
    if N < 100:
        raise InvalidParameterError(f"need N >= 100 bootstrap replicates, got {N}")
    fr = fit_result if fit_result is not None else fit(series, p)
    n = series.n
    centred = fr.residuals - fr.residuals.mean()
    rng = seed if isinstance(seed, np.random.Generator) else derive_rng(seed)

    q_out = np.full(N, np.nan)
    redraws = 0
    pending = N
    while pending > 0:
        eps = rng.choice(centred, size=(pending, n), replace=True)
        y_boot = simulate_from_innovations(fr.phi_hat, eps)
        phi_hats = fit_batch(y_boot, p)
        q = _batch_wald(fr.phi_hat, phi_hats, n)
        good = np.isfinite(q) & (q >= 0.0)
        slots = np.nonzero(np.isnan(q_out))[0]
        q_out[slots[: good.sum()]] = q[good]
        failed = pending - int(good.sum())
        redraws += failed
        if redraws > N:
            raise DegenerateDesignError(
                f"bootstrap exceeded {N} redraws ({redraws} failed refits)"
            )
        pending = failed
    return np.sort(q_out)


def wald_statistic_grid(grid: ParamGrid2D, phi_hat: np.ndarray, omega: CovMatrix, n: int) -> np.ndarray:
    """Q evaluated at every grid node against a fixed estimate and covariance."""
    p1, p2 = grid.mesh()
    d1 = phi_hat[0] - p1
    d2 = phi_hat[1] - p2
    inv = omega.inverse()
    return n * (inv[0, 0] * d1**2 + 2.0 * inv[0, 1] * d1 * d2 + inv[1, 1] * d2**2)


def confidence_curve(
    series: SeriesSample,
    p: int,
    grid: ParamGrid2D,
    method: str,
    N: int = 1000,
    seed: int = 0,
    fit_result: FitResult | None = None,
    bootstrap_q: np.ndarray | None = None,
) -> ConfidenceSurface:
    """Wald confidence curve over the grid.

    Node value is F(Q_obs) under the chi-square reference law
    (``wald_asymptotic``) or the proportion of bootstrap Q_k below Q_obs
    (``wald_bootstrap``).  Nodes outside the stationarity triangle carry 1:
    the curve rises immediately to full confidence at the boundary.
    """
    if method not in ("wald_asymptotic", "wald_bootstrap"):
        raise InvalidParameterError(f"unknown wald curve method {method!r}")
    if p != 2:
        raise InvalidParameterError("grid confidence curves are 2-D only (p=2)")
    fr = fit_result if fit_result is not None else fit(series, p)
    omega = _omega_for(fr.phi_hat)
    q_obs = wald_statistic_grid(grid, fr.phi_hat, omega, series.n)
    if method == "wald_asymptotic":
        values = chi2_cdf(q_obs, p)
    else:
        if bootstrap_q is None:
            bootstrap_q = bootstrap_wald_distribution(series, p, N, seed, fit_result=fr)
        values = np.searchsorted(bootstrap_q, q_obs, side="left") / bootstrap_q.size
    values = np.where(grid.in_region, values, 1.0)
    return ConfidenceSurface(grid=grid, values=values, kind="confidence_curve", method=method)
