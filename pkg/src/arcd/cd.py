"""Confidence densities for (phi1, phi2): the closed-form Gaussian
approximation, the Monte Carlo orthant-probability CDF on a grid, the
probit-quadratic smoother with analytic mixed derivative, and
volume-threshold regions."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import special

from arcd.ar import (
    CovMatrix,
    DegenerateDesignError,
    InvalidParameterError,
    SingularMatrixError,
)
from arcd.grids import (
    ConfidenceSurface,
    ParamGrid2D,
    RegionResult,
    normalize_density,
    region_from_density,
)
from arcd.rng import derive_rng

__all__ = [
    "CdfGridEstimate",
    "ProbitQuadFit",
    "cd_asymptotic_density",
    "cd_asymptotic_surface",
    "estimate_cdf_grid",
    "fit_probit_quadratic",
    "cd_bootstrap_density",
    "cd_bootstrap_surface",
    "norm_ppf",
    "region_from_density",
]

#: norm_ppf inputs are clipped to [PPF_CLIP, 1 - PPF_CLIP].
PPF_CLIP = 1e-12

#: Per-node delta truncation bounds never drop below this.
DELTA_FLOOR = 1e-6


def norm_ppf(q):
    """Inverse standard normal CDF, clipped away from 0 and 1.

    Backed by a rational-approximation implementation accurate well below
    1e-9 absolute over the clipped domain.
    """
    q = np.clip(np.asarray(q, dtype=float), PPF_CLIP, 1.0 - PPF_CLIP)
    out = special.ndtri(q)
    return float(out) if out.ndim == 0 else out


def norm_pdf(z):
    z = np.asarray(z, dtype=float)
    out = np.exp(-0.5 * z**2) / np.sqrt(2.0 * np.pi)
    return float(out) if out.ndim == 0 else out


def cd_asymptotic_density(phi, phi_hat_obs, omega_hat: CovMatrix, n: int):
    """Gaussian confidence density centred at the observed estimate.

    ``phi`` may be a single 2-vector or an array with the coefficient axis
    last.  Value n (2 pi)^{-1} |Omega|^{-1/2} exp{-(n/2) d' Omega^{-1} d}
    with d = phi_hat_obs - phi.
    """
    phi = np.asarray(phi, dtype=float)
    phi_hat_obs = np.asarray(phi_hat_obs, dtype=float)
    p = phi_hat_obs.size
    det = omega_hat.det
    if det <= 0:
        raise SingularMatrixError(f"covariance determinant {det:.3g} is not positive")
    inv = omega_hat.inverse()
    d = phi_hat_obs - phi
    quad = np.einsum("...k,kl,...l->...", d, inv, d)
    norm_const = n ** (p / 2.0) / ((2.0 * np.pi) ** (p / 2.0) * np.sqrt(det))
    out = norm_const * np.exp(-0.5 * n * quad)
    return float(out) if out.ndim == 0 else out


def cd_asymptotic_surface(
    grid: ParamGrid2D, phi_hat_obs, omega_hat: CovMatrix, n: int, normalized: bool = True
) -> ConfidenceSurface:
    """Asymptotic confidence density over the grid.

    The raw Gaussian values over the full window are kept as the surface's
    extension (the spike correction integrates the un-truncated density);
    the surface itself is triangle-restricted and, by default, renormalized.
    """
    p1, p2 = grid.mesh()
    raw = cd_asymptotic_density(np.stack([p1, p2], axis=-1), phi_hat_obs, omega_hat, n)
    values = np.where(grid.in_region, raw, 0.0)
    surface = ConfidenceSurface(
        grid=grid, values=values, kind="density", method="cd_asymptotic", extension=raw
    )
    return normalize_density(surface) if normalized else surface


@dataclass(frozen=True)
class CdfGridEstimate:
    """Monte Carlo estimate of the orthant-probability CDF on a grid.

    ``cdf[i, j]`` is a proportion with denominator N_mc; NaN outside the
    stationarity triangle.
    """

    grid: ParamGrid2D
    cdf: np.ndarray
    N_mc: int


def _simulate_fit_p2(phi1, phi2, eps):
    """AR(2) recursion at per-node coefficients followed by a vectorized refit.

    phi1, phi2: shape (c,); eps: shape (c, N, n).  Returns (phi1_hat,
    phi2_hat, det) arrays of shape (c, N).
    """
    c, N, n = eps.shape
    y = np.empty_like(eps)
    a = phi1[:, None]
    b = phi2[:, None]
    y[:, :, 0] = eps[:, :, 0]
    if n > 1:
        y[:, :, 1] = a * y[:, :, 0] + eps[:, :, 1]
    for t in range(2, n):
        y[:, :, t] = a * y[:, :, t - 1] + b * y[:, :, t - 2] + eps[:, :, t]
    lag1 = np.concatenate([np.zeros((c, N, 1)), y[:, :, :-1]], axis=2)
    lag2 = np.concatenate([np.zeros((c, N, 2)), y[:, :, :-2]], axis=2)
    s11 = np.einsum("cnt,cnt->cn", lag1, lag1)
    s12 = np.einsum("cnt,cnt->cn", lag1, lag2)
    s22 = np.einsum("cnt,cnt->cn", lag2, lag2)
    b1 = np.einsum("cnt,cnt->cn", lag1, y)
    b2 = np.einsum("cnt,cnt->cn", lag2, y)
    det = s11 * s22 - s12**2
    with np.errstate(divide="ignore", invalid="ignore"):
        phi1_hat = (s22 * b1 - s12 * b2) / det
        phi2_hat = (s11 * b2 - s12 * b1) / det
    return phi1_hat, phi2_hat, det


def estimate_cdf_grid(
    grid: ParamGrid2D,
    phi_hat_obs,
    n: int,
    sigma2: float = 1.0,
    N_mc: int = 1000,
    seed: int = 0,
) -> CdfGridEstimate:
    """Per-node Monte Carlo CDF of the bootstrap law: simulate N_mc series
    with phi_hat_obs as truth, refit, and record the proportion of refits
    exceeding the node in both coordinates.

    The resulting surface is ~1 at nodes far below phi_hat_obs, ~0 far
    above, and nonincreasing along each axis up to Monte Carlo noise.
    Failed refits (degenerate normal equations) are redrawn one at a time.
    """
    if N_mc < 100:
        raise InvalidParameterError(f"need N_mc >= 100, got {N_mc}")
    if sigma2 <= 0:
        raise InvalidParameterError(f"sigma2 must be positive, got {sigma2}")
    phi_hat_obs = np.asarray(phi_hat_obs, dtype=float)
    if phi_hat_obs.shape != (2,):
        raise InvalidParameterError("phi_hat_obs must be a 2-vector")
    rng = seed if isinstance(seed, np.random.Generator) else derive_rng(seed)
    mask = grid.in_region
    p1_mesh, p2_mesh = grid.mesh()
    nodes1 = p1_mesh[mask]
    nodes2 = p2_mesh[mask]
    counts = np.empty(nodes1.size)
    sd = float(np.sqrt(sigma2))

    chunk = max(1, int(1.5e7 / max(1, N_mc * n)))
    for start in range(0, nodes1.size, chunk):
        sl = slice(start, min(start + chunk, nodes1.size))
        c1 = nodes1[sl]
        c2 = nodes2[sl]
        t1 = np.full(c1.size, phi_hat_obs[0])
        t2 = np.full(c1.size, phi_hat_obs[1])
        eps = rng.normal(0.0, sd, size=(c1.size, N_mc, n))
        phi1_hat, phi2_hat, det = _simulate_fit_p2(t1, t2, eps)
        bad = ~np.isfinite(phi1_hat) | ~np.isfinite(phi2_hat) | (np.abs(det) < 1e-300)
        redraws = 0
        while bad.any():
            ii, jj = np.nonzero(bad)
            redraws += ii.size
            if redraws > N_mc:
                raise DegenerateDesignError(
                    f"cdf Monte Carlo exceeded {N_mc} redraws in one chunk"
                )
            eps_new = rng.normal(0.0, sd, size=(ii.size, 1, n))
            r1, r2, rdet = _simulate_fit_p2(t1[ii], t2[ii], eps_new)
            phi1_hat[ii, jj] = r1[:, 0]
            phi2_hat[ii, jj] = r2[:, 0]
            det[ii, jj] = rdet[:, 0]
            bad = ~np.isfinite(phi1_hat) | ~np.isfinite(phi2_hat) | (np.abs(det) < 1e-300)
        exceed = (phi1_hat > c1[:, None]) & (phi2_hat > c2[:, None])
        counts[sl] = exceed.sum(axis=1)

    cdf = np.full(mask.shape, np.nan)
    cdf[mask] = counts / N_mc
    return CdfGridEstimate(grid=grid, cdf=cdf, N_mc=N_mc)


@dataclass(frozen=True)
class ProbitQuadFit:
    """OLS fit of the probit-transformed CDF on a full quadratic in (phi1, phi2)."""

    c0: float
    c1: float
    c2: float
    c11: float
    c22: float
    c12: float
    n_used: int
    delta: float

    @property
    def coefficients(self) -> np.ndarray:
        return np.array([self.c0, self.c1, self.c2, self.c11, self.c22, self.c12])

    def to_dict(self) -> dict:
        return {
            "c0": self.c0,
            "c1": self.c1,
            "c2": self.c2,
            "c11": self.c11,
            "c22": self.c22,
            "c12": self.c12,
            "n_used": self.n_used,
            "delta": self.delta,
        }


def delta_bound(n: int, phi1, phi2):
    """Node-wise truncation bound min{0.1, exp(6.04 - 2.64 log n + 4.39 phi1
    + 9.92 phi2)}, floored at DELTA_FLOOR."""
    raw = np.exp(6.04 - 2.64 * np.log(n) + 4.39 * np.asarray(phi1) + 9.92 * np.asarray(phi2))
    return np.clip(np.minimum(0.1, raw), DELTA_FLOOR, None)


class UnderIdentifiedError(RuntimeError):
    """Too few usable grid nodes to identify the quadratic regression."""

    def __init__(self, n_usable: int):
        super().__init__(
            f"only {n_usable} grid nodes survive the delta truncation; need at least 6"
        )
        self.n_usable = n_usable


def fit_probit_quadratic(estimate: CdfGridEstimate, n: int) -> ProbitQuadFit:
    """Regress the probit of the CDF estimate on (1, phi1, phi2, phi1^2,
    phi2^2, phi1 phi2) over nodes passing the delta truncation.

    Exact-0 and exact-1 proportions are always excluded; remaining values
    must satisfy delta < C < 1 - delta with the node-wise bound.
    """
    grid = estimate.grid
    mask = grid.in_region
    p1_mesh, p2_mesh = grid.mesh()
    cdf = estimate.cdf
    delta = delta_bound(n, p1_mesh, p2_mesh)
    usable = mask & np.isfinite(cdf) & (cdf > delta) & (cdf < 1.0 - delta)
    usable &= (cdf > 0.0) & (cdf < 1.0)
    n_used = int(usable.sum())
    if n_used < 6:
        raise UnderIdentifiedError(n_used)
    x1 = p1_mesh[usable]
    x2 = p2_mesh[usable]
    target = norm_ppf(cdf[usable])
    design = np.column_stack([np.ones_like(x1), x1, x2, x1**2, x2**2, x1 * x2])
    coef, *_ = np.linalg.lstsq(design, target, rcond=None)
    if not np.all(np.isfinite(coef)):
        raise UnderIdentifiedError(n_used)
    return ProbitQuadFit(
        c0=float(coef[0]),
        c1=float(coef[1]),
        c2=float(coef[2]),
        c11=float(coef[3]),
        c22=float(coef[4]),
        c12=float(coef[5]),
        n_used=n_used,
        delta=float(delta[usable].max()),
    )


def cd_bootstrap_density(fit: ProbitQuadFit, phi):
    """Analytic mixed derivative of Phi(z) under the quadratic probit fit.

    z = c0 + c1 phi1 + c2 phi2 + c11 phi1^2 + c22 phi2^2 + c12 phi1 phi2 and
    the value is {c12 - (c1 + 2 c11 phi1 + c12 phi2)(c2 + 2 c22 phi2
    + c12 phi1) z} pdf(z).  May be negative; clipping happens only at
    normalization/region time.
    """
    phi = np.asarray(phi, dtype=float)
    phi1 = phi[..., 0]
    phi2 = phi[..., 1]
    z = (
        fit.c0
        + fit.c1 * phi1
        + fit.c2 * phi2
        + fit.c11 * phi1**2
        + fit.c22 * phi2**2
        + fit.c12 * phi1 * phi2
    )
    g1 = fit.c1 + 2.0 * fit.c11 * phi1 + fit.c12 * phi2
    g2 = fit.c2 + 2.0 * fit.c22 * phi2 + fit.c12 * phi1
    out = (fit.c12 - g1 * g2 * z) * norm_pdf(z)
    return float(out) if out.ndim == 0 else out


def cd_bootstrap_surface(
    grid: ParamGrid2D, fit: ProbitQuadFit, normalized: bool = True
) -> ConfidenceSurface:
    """Smoothed finite-sample confidence density over the grid.

    The raw mixed derivative (negatives included) is kept as the extension;
    the returned surface is triangle-restricted and by default normalized
    over its positive part.
    """
    p1, p2 = grid.mesh()
    raw = cd_bootstrap_density(fit, np.stack([p1, p2], axis=-1))
    values = np.where(grid.in_region, raw, 0.0)
    surface = ConfidenceSurface(
        grid=grid, values=values, kind="density", method="cd_bootstrap", extension=raw
    )
    return normalize_density(surface) if normalized else surface
