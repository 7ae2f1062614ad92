"""Zero-mean AR(p) core: simulation, least-squares/ML fitting, likelihood,
causality checks and asymptotic covariance matrices.

Conventions used throughout: pre-sample values are zero (the first p
regressor rows are truncated accordingly), the innovation variance
estimate divides by n, and all n squared prediction errors enter the
likelihood.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from arcd.rng import derive_rng

#: Margin on the companion spectral radius; parameter vectors within this
#: distance of the unit circle count as non-causal.
TOL_EIG = 1e-8

#: Condition-number cutoff above which a normal-equation system is treated
#: as degenerate.
COND_LIMIT = 1e12


class InvalidParameterError(ValueError):
    """Raised for parameter values outside the model's domain."""


class DegenerateDesignError(RuntimeError):
    """Raised when the lagged design matrix is numerically singular."""

    def __init__(self, message: str, condition: float = np.inf):
        super().__init__(message)
        self.condition = condition


class SingularMatrixError(RuntimeError):
    """Raised when a required matrix inverse does not exist."""


class NearSingularWarning(UserWarning):
    """Covariance evaluated at or outside the stationarity boundary."""


@dataclass(frozen=True)
class ARParams:
    """AR(p) coefficient vector and innovation variance."""

    phi: np.ndarray
    sigma2: float = 1.0

    def __post_init__(self):
        phi = np.atleast_1d(np.asarray(self.phi, dtype=float))
        if phi.ndim != 1 or phi.size < 1:
            raise InvalidParameterError("phi must be a vector with p >= 1")
        if not np.isfinite(self.sigma2) or self.sigma2 <= 0:
            raise InvalidParameterError(f"sigma2 must be positive, got {self.sigma2}")
        object.__setattr__(self, "phi", phi)

    @property
    def p(self) -> int:
        return self.phi.size


@dataclass(frozen=True)
class SeriesSample:
    """Observed or simulated series y_1..y_n.

    Pre-sample values y_0 = y_{-1} = ... = 0 are implicit and never stored.
    """

    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float).ravel()
        object.__setattr__(self, "values", values)

    @property
    def n(self) -> int:
        return self.values.size


@dataclass(frozen=True)
class FitResult:
    """Least-squares (= ML) fit of an AR(p) model."""

    phi_hat: np.ndarray
    sigma2_hat: float
    residuals: np.ndarray
    xtx: np.ndarray
    xty: np.ndarray

    @property
    def p(self) -> int:
        return self.phi_hat.size


@dataclass(frozen=True)
class CovMatrix:
    """Asymptotic covariance of sqrt(n)(phi_hat - phi)."""

    omega: np.ndarray
    near_singular: bool = field(default=False, compare=False)

    def inverse(self) -> np.ndarray:
        try:
            return np.linalg.inv(self.omega)
        except np.linalg.LinAlgError as exc:
            raise SingularMatrixError("covariance matrix is singular") from exc

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.omega))


def companion_matrix(phi: np.ndarray) -> np.ndarray:
    """p x p companion matrix: coefficients on the first row, shifted identity below."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    p = phi.size
    mat = np.zeros((p, p))
    mat[0, :] = phi
    if p > 1:
        mat[1:, :-1] = np.eye(p - 1)
    return mat


def simulate_from_innovations(phi: np.ndarray, eps: np.ndarray) -> np.ndarray:
    """Run the AR recursion y_t = phi'y_{t-} + eps_t with zero pre-sample values.

    ``eps`` may be a vector or a batch with time on the last axis.
    """
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    eps = np.asarray(eps, dtype=float)
    p = phi.size
    n = eps.shape[-1]
    y = np.zeros_like(eps)
    for t in range(n):
        acc = eps[..., t].copy()
        for k in range(min(p, t)):
            acc += phi[k] * y[..., t - 1 - k]
        y[..., t] = acc
    return y


def simulate(params: ARParams, n: int, seed: int) -> SeriesSample:
    """Simulate n observations from the AR(p) model, deterministically in seed."""
    if n < 1:
        raise InvalidParameterError(f"n must be >= 1, got {n}")
    rng = derive_rng(seed)
    eps = rng.normal(0.0, np.sqrt(params.sigma2), size=n)
    return SeriesSample(simulate_from_innovations(params.phi, eps))


def lagged_design(values: np.ndarray, p: int) -> np.ndarray:
    """Design matrix X with X[t, k] = y_{t-k} (zero for pre-sample indices).

    ``values`` may be batched with time on the last axis; the design gains a
    trailing lag axis.
    """
    values = np.asarray(values, dtype=float)
    n = values.shape[-1]
    x = np.zeros(values.shape + (p,))
    for k in range(p):
        lag = k + 1
        x[..., lag:, k] = values[..., : n - lag]
    return x


def fit(series: SeriesSample, p: int) -> FitResult:
    """Least-squares / ML estimates via the normal equations.

    sigma2_hat divides the residual sum of squares by n.
    """
    y = series.values
    n = y.size
    if n <= p:
        raise InvalidParameterError(f"need n > p, got n={n}, p={p}")
    x = lagged_design(y, p)
    xtx = x.T @ x
    xty = x.T @ y
    cond = np.linalg.cond(xtx)
    if not np.isfinite(cond) or cond > COND_LIMIT:
        raise DegenerateDesignError(
            f"singular normal equations (condition estimate {cond:.3g})", condition=cond
        )
    phi_hat = np.linalg.solve(xtx, xty)
    residuals = y - x @ phi_hat
    sigma2_hat = float(residuals @ residuals) / n
    return FitResult(phi_hat=phi_hat, sigma2_hat=sigma2_hat, residuals=residuals, xtx=xtx, xty=xty)


def fit_batch(y: np.ndarray, p: int) -> np.ndarray:
    """Coefficient estimates for a batch of series, shape (..., n) -> (..., p).

    Entries whose normal equations cannot be solved come back as NaN.
    """
    x = lagged_design(y, p)
    xtx = np.einsum("...tk,...tl->...kl", x, x)
    xty = np.einsum("...tk,...t->...k", x, y)
    try:
        return np.linalg.solve(xtx, xty[..., None])[..., 0]
    except np.linalg.LinAlgError:
        out = np.full(y.shape[:-1] + (p,), np.nan)
        flat_xtx = xtx.reshape(-1, p, p)
        flat_xty = xty.reshape(-1, p)
        flat_out = out.reshape(-1, p)
        for i in range(flat_xtx.shape[0]):
            try:
                flat_out[i] = np.linalg.solve(flat_xtx[i], flat_xty[i])
            except np.linalg.LinAlgError:
                pass
        return out


def quadratic_form_a(phi: np.ndarray, series: SeriesSample) -> float:
    """Sum of squared one-step prediction errors A(phi), zero pre-sample values."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    x = lagged_design(series.values, phi.size)
    resid = series.values - x @ phi
    return float(resid @ resid)


def quadratic_form_a_from_fit(phi: np.ndarray, fit_result: FitResult, total_ss: float):
    """A(phi) rewritten around the MLE: sum y^2 - phi' XtX (2 phi_hat - phi).

    ``phi`` may be batched with the coefficient axis last.
    """
    phi = np.asarray(phi, dtype=float)
    two_hat = 2.0 * fit_result.phi_hat - phi
    return total_ss - np.einsum("...k,kl,...l->...", phi, fit_result.xtx, two_hat)


def log_likelihood(params: ARParams, series: SeriesSample) -> float:
    """Gaussian log likelihood with all n terms and zero pre-sample values."""
    n = series.n
    a = quadratic_form_a(params.phi, series)
    return -0.5 * n * np.log(2.0 * np.pi * params.sigma2) - a / (2.0 * params.sigma2)


def is_stationary_p2(phi: np.ndarray) -> bool:
    """Strict stationarity-triangle test for p=2."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (2,):
        raise InvalidParameterError("is_stationary_p2 expects a 2-vector")
    p1, p2 = phi
    return bool(p1 + p2 < 1.0 and p2 - p1 < 1.0 and p2 > -1.0)


def stationary_triangle_mask(phi1: np.ndarray, phi2: np.ndarray) -> np.ndarray:
    """Vectorized strict triangle membership for broadcastable phi1, phi2."""
    return (phi1 + phi2 < 1.0) & (phi2 - phi1 < 1.0) & (phi2 > -1.0)


def is_causal(phi: np.ndarray, tol: float = TOL_EIG) -> bool:
    """True iff the companion spectral radius is below 1 - tol."""
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    p = phi.size
    if p <= 3:
        # char poly of the companion: z^p - phi_1 z^{p-1} - ... - phi_p
        roots = np.roots(np.concatenate(([1.0], -phi)))
        radius = np.max(np.abs(roots)) if roots.size else 0.0
    else:
        radius = np.max(np.abs(np.linalg.eigvals(companion_matrix(phi))))
    return bool(radius < 1.0 - tol)


def omega_p2(phi: np.ndarray) -> CovMatrix:
    """Closed-form asymptotic covariance for p=2.

    Outside the open triangle the formula value is still returned, flagged
    and warned as near-singular.
    """
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (2,):
        raise InvalidParameterError("omega_p2 expects a 2-vector")
    p1, p2 = phi
    omega = np.array(
        [
            [1.0 - p2**2, -p1 * (1.0 + p2)],
            [-p1 * (1.0 + p2), 1.0 - p2**2],
        ]
    )
    near = not is_stationary_p2(phi)
    if near:
        warnings.warn(
            f"omega_p2 evaluated at phi={tuple(phi)} on or outside the stationarity "
            "triangle; matrix may be singular or indefinite",
            NearSingularWarning,
            stacklevel=2,
        )
    return CovMatrix(omega=omega, near_singular=near)


def omega_p2_batch(phi1: np.ndarray, phi2: np.ndarray) -> np.ndarray:
    """Closed-form p=2 covariance for broadcastable arrays, shape (..., 2, 2)."""
    p1 = np.asarray(phi1, dtype=float)
    p2 = np.asarray(phi2, dtype=float)
    out = np.empty(np.broadcast(p1, p2).shape + (2, 2))
    diag = 1.0 - p2**2
    off = -p1 * (1.0 + p2)
    out[..., 0, 0] = diag
    out[..., 1, 1] = diag
    out[..., 0, 1] = off
    out[..., 1, 0] = off
    return out


def omega_general(phi: np.ndarray) -> CovMatrix:
    """Asymptotic covariance for general p via the stationary state covariance.

    Solves (I - Phi0 (x) Phi0) vec(R) = vec(e1 e1') for the scaled state
    covariance R and returns its inverse.
    """
    phi = np.atleast_1d(np.asarray(phi, dtype=float))
    p = phi.size
    if not is_causal(phi):
        raise InvalidParameterError(f"omega_general requires a causal phi, got {tuple(phi)}")
    comp = companion_matrix(phi)
    big = np.kron(comp, comp)
    m = np.zeros((p, p))
    m[0, 0] = 1.0
    lhs = np.eye(p * p) - big
    try:
        vec_r = np.linalg.solve(lhs, m.reshape(-1, order="F"))
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("I - Phi0 (x) Phi0 is singular (unit root)") from exc
    r = vec_r.reshape(p, p, order="F")
    asym = np.max(np.abs(r - r.T))
    if asym > 1e-9 * max(1.0, np.max(np.abs(r))):
        raise SingularMatrixError(f"state covariance not symmetric (max gap {asym:.3g})")
    r = 0.5 * (r + r.T)
    try:
        omega = np.linalg.inv(r)
    except np.linalg.LinAlgError as exc:
        raise SingularMatrixError("state covariance is singular") from exc
    return CovMatrix(omega=0.5 * (omega + omega.T))
