"""Batch harness: coverage/mean-area study across methods, sample sizes and
levels, and mean implied-prior residual surfaces over replications."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from joblib import Parallel, delayed

from arcd import bayes  # noqa: F401  (kept importable alongside the study methods)
from arcd.ar import (
    DegenerateDesignError,
    FitResult,
    InvalidParameterError,
    SeriesSample,
    SingularMatrixError,
    fit,
    is_stationary_p2,
    omega_p2,
    simulate_from_innovations,
)
from arcd.cd import (
    UnderIdentifiedError,
    cd_asymptotic_surface,
    cd_bootstrap_surface,
    estimate_cdf_grid,
    fit_probit_quadratic,
)
from arcd.grids import ConfidenceSurface, ParamGrid2D, region_from_density
from arcd.implied import proposition1_residual
from arcd.rng import derive_rng
from arcd.wald import bootstrap_wald_distribution, confidence_curve, region_from_curve

__all__ = ["ExperimentConfig", "CoverageRow", "run_coverage_study", "run_implied_prior_study"]

STUDY_METHODS = ("cd_bootstrap", "cd_asymptotic", "wald_asymptotic", "wald_bootstrap")

_REPLICATE_FAILURES = (DegenerateDesignError, SingularMatrixError, UnderIdentifiedError, InvalidParameterError)


@dataclass(frozen=True)
class ExperimentConfig:
    """Desk-scale coverage study configuration.

    Defaults are scaled down from the full-size study (10000/5000 replicates,
    1000 inner draws); every knob is settable.
    """

    phi0: tuple[float, float]
    n_values: tuple[int, ...] = (50, 100, 200, 400)
    levels: tuple[float, ...] = (0.90, 0.95)
    methods: tuple[str, ...] = STUDY_METHODS
    replicates: int = 2000
    N_bootstrap: int = 500
    N_mc: int = 500
    grid_m: int = 100
    grid_halfwidth_se: float = 5.0
    sigma2: float = 1.0
    root_seed: int = 0

    def __post_init__(self):
        phi0 = tuple(float(v) for v in self.phi0)
        if len(phi0) != 2 or not is_stationary_p2(np.array(phi0)):
            raise InvalidParameterError(f"phi0 must lie inside the stationarity triangle, got {phi0}")
        object.__setattr__(self, "phi0", phi0)
        object.__setattr__(self, "n_values", tuple(int(n) for n in self.n_values))
        object.__setattr__(self, "levels", tuple(float(v) for v in self.levels))
        object.__setattr__(self, "methods", tuple(self.methods))
        for method in self.methods:
            if method not in STUDY_METHODS:
                raise InvalidParameterError(f"unknown study method {method!r}")
        for level in self.levels:
            if not (0.0 < level < 1.0):
                raise InvalidParameterError(f"level {level} outside (0, 1)")
        if self.replicates < 1:
            raise InvalidParameterError("need replicates >= 1")

    @staticmethod
    def from_dict(data: dict) -> "ExperimentConfig":
        return ExperimentConfig(**data)


@dataclass(frozen=True)
class CoverageRow:
    """One (n, method, level) cell of the study output."""

    n: int
    method: str
    level: float
    coverage: float
    mean_area: float
    replicates: int
    failures: int

    @property
    def mc_se(self) -> float:
        if self.replicates == 0 or not np.isfinite(self.coverage):
            return float("nan")
        return float(np.sqrt(self.coverage * (1.0 - self.coverage) / self.replicates))


def _coverage_replicate(config: ExperimentConfig, n: int, rep: int):
    """One simulate/fit/region pass.

    Returns {(method, level): (covered, area)} or None when the replicate
    failed for every requested method.
    """
    phi0 = np.asarray(config.phi0)
    rng_sim = derive_rng(config.root_seed, n, rep, 0)
    eps = rng_sim.normal(0.0, np.sqrt(config.sigma2), size=n)
    series = SeriesSample(simulate_from_innovations(phi0, eps))
    try:
        fr = fit(series, 2)
    except DegenerateDesignError:
        return None
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        omega = omega_p2(fr.phi_hat)
    grid = ParamGrid2D.around_estimate(
        fr.phi_hat, omega.omega, n, half_widths_se=config.grid_halfwidth_se, m=config.grid_m
    )
    if not grid.in_region.any():
        return None

    out = {}
    try:
        for method in config.methods:
            if method in ("wald_asymptotic", "wald_bootstrap"):
                boot_q = None
                if method == "wald_bootstrap":
                    boot_q = bootstrap_wald_distribution(
                        series,
                        2,
                        config.N_bootstrap,
                        derive_rng(config.root_seed, n, rep, 1),
                        fit_result=fr,
                    )
                surface = confidence_curve(
                    series, 2, grid, method, fit_result=fr, bootstrap_q=boot_q
                )
                regions = {lvl: region_from_curve(surface, lvl) for lvl in config.levels}
            elif method == "cd_asymptotic":
                surface = cd_asymptotic_surface(grid, fr.phi_hat, omega, n)
                regions = {lvl: region_from_density(surface, lvl) for lvl in config.levels}
            else:  # cd_bootstrap
                estimate = estimate_cdf_grid(
                    grid,
                    fr.phi_hat,
                    n,
                    sigma2=1.0,
                    N_mc=config.N_mc,
                    seed=derive_rng(config.root_seed, n, rep, 2),
                )
                pq = fit_probit_quadratic(estimate, n)
                surface = cd_bootstrap_surface(grid, pq)
                regions = {lvl: region_from_density(surface, lvl) for lvl in config.levels}
            for lvl, region in regions.items():
                out[(method, lvl)] = (region.contains(phi0), region.area)
    except _REPLICATE_FAILURES:
        return None
    return out


def run_coverage_study(config: ExperimentConfig, n_jobs: int = 1) -> list[CoverageRow]:
    """Coverage and mean area per (n, method, level), deterministic in
    config.root_seed and independent of n_jobs.

    A row aborts (error) if more than 1% of its replicates fail.
    """
    rows: list[CoverageRow] = []
    for n in config.n_values:
        reps = range(config.replicates)
        if n_jobs == 1:
            results = [_coverage_replicate(config, n, r) for r in reps]
        else:
            results = Parallel(n_jobs=n_jobs)(
                delayed(_coverage_replicate)(config, n, r) for r in reps
            )
        failures = sum(1 for r in results if r is None)
        if failures > 0.01 * config.replicates:
            raise DegenerateDesignError(
                f"{failures}/{config.replicates} replicates failed at n={n}"
            )
        good = [r for r in results if r is not None]
        for method in config.methods:
            for level in config.levels:
                covered = np.array([r[(method, level)][0] for r in good], dtype=float)
                areas = np.array([r[(method, level)][1] for r in good], dtype=float)
                rows.append(
                    CoverageRow(
                        n=n,
                        method=method,
                        level=level,
                        coverage=float(covered.mean()),
                        mean_area=float(areas.mean()),
                        replicates=len(good),
                        failures=failures,
                    )
                )
    return rows


def _implied_prior_replicate(phi0, n, grid, sigma2, root_seed, rep):
    phi0 = np.asarray(phi0, dtype=float)
    rng = derive_rng(root_seed, n, rep)
    eps = rng.normal(0.0, np.sqrt(sigma2), size=n)
    series = SeriesSample(simulate_from_innovations(phi0, eps))
    fr = fit(series, 2)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        omega = omega_p2(fr.phi_hat)
    p1, p2 = grid.mesh()
    nodes = np.stack([p1, p2], axis=-1)
    return proposition1_residual(nodes, series, fr.phi_hat, omega, sigma2)


def run_implied_prior_study(
    phi0,
    n: int,
    replications: int,
    grid: ParamGrid2D,
    seed: int = 0,
    sigma2: float = 1.0,
    n_jobs: int = 1,
) -> ConfidenceSurface:
    """Mean over replications of the implied-prior residual at every node.

    Out-of-triangle nodes carry NaN.  Nodewise averaging uses a fixed
    summation order, so the result does not depend on n_jobs.
    """
    if replications < 1:
        raise InvalidParameterError("need replications >= 1")
    if not grid.in_region.any():
        raise InvalidParameterError("grid does not intersect the stationarity triangle")
    reps = range(replications)
    if n_jobs == 1:
        surfaces = [_implied_prior_replicate(phi0, n, grid, sigma2, seed, r) for r in reps]
    else:
        surfaces = Parallel(n_jobs=n_jobs)(
            delayed(_implied_prior_replicate)(phi0, n, grid, sigma2, seed, r) for r in reps
        )
    acc = np.zeros_like(surfaces[0])
    for s in surfaces:
        acc += s
    mean = acc / replications
    values = np.where(grid.in_region, mean, np.nan)
    return ConfidenceSurface(
        grid=grid, values=values, kind="log_implied_prior", method="cd_asymptotic"
    )
