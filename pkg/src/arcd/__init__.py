"""Confidence distributions and confidence regions for zero-mean AR(p) processes."""

from arcd.ar import (
    ARParams,
    CovMatrix,
    DegenerateDesignError,
    FitResult,
    InvalidParameterError,
    SeriesSample,
    SingularMatrixError,
    fit,
    is_causal,
    is_stationary_p2,
    log_likelihood,
    omega_general,
    omega_p2,
    simulate,
)
from arcd.grids import ConfidenceSurface, ParamGrid2D, RegionResult
from arcd.wald import (
    bootstrap_wald_distribution,
    chi2_cdf,
    confidence_curve,
    region_from_curve,
    wald_statistic,
)
from arcd.cd import (
    CdfGridEstimate,
    ProbitQuadFit,
    cd_asymptotic_density,
    cd_asymptotic_surface,
    cd_bootstrap_density,
    cd_bootstrap_surface,
    estimate_cdf_grid,
    fit_probit_quadratic,
    region_from_density,
)
from arcd.bayes import SpikeCorrection, corrected_region, flat_prior_posterior, spike_correction
from arcd.implied import log_implied_prior, proposition1_residual, rest_term_h_p1
from arcd.experiments import (
    CoverageRow,
    ExperimentConfig,
    run_coverage_study,
    run_implied_prior_study,
)

__all__ = [name for name in dir() if not name.startswith("_")]
__version__ = "0.1.0"
