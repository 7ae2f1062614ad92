"""Flat-prior posterior over the stationarity triangle, credibility regions
and the boundary-spike correction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from arcd.ar import FitResult, InvalidParameterError, SeriesSample, fit, quadratic_form_a_from_fit
from arcd.grids import (
    ConfidenceSurface,
    ParamGrid2D,
    RegionResult,
    normalize_density,
    region_from_density,
    region_from_density_mass,
)

__all__ = ["SpikeCorrection", "flat_prior_posterior", "spike_correction", "corrected_region"]


class DegenerateSpikeError(RuntimeError):
    """Boundary band swallows (almost) all mass; correction undefined."""


@dataclass(frozen=True)
class SpikeCorrection:
    """Correction factor a = (1-b)/(1-k) reconciling boundary mass between a
    reference confidence density (b) and the flat-prior posterior (k)."""

    b: float
    k: float
    band: float

    @property
    def a(self) -> float:
        return (1.0 - self.b) / (1.0 - self.k)

    def to_dict(self) -> dict:
        return {"b": self.b, "k": self.k, "a": self.a, "band": self.band}


def flat_prior_posterior(
    series: SeriesSample,
    grid: ParamGrid2D,
    sigma2: float | None = None,
    fit_result: FitResult | None = None,
) -> ConfidenceSurface:
    """Posterior proportional to the likelihood under a flat prior supported
    on the stationarity triangle.

    sigma2 defaults to the ML estimate from the AR(2) fit.  The surface's
    extension keeps the likelihood over the full window without the triangle
    restriction (required by the spike correction, where the non-stationary
    side must be allowed to carry mass).
    """
    fr = fit_result if fit_result is not None else fit(series, 2)
    if sigma2 is None:
        sigma2 = fr.sigma2_hat
    if sigma2 <= 0:
        raise InvalidParameterError(f"sigma2 must be positive, got {sigma2}")
    total_ss = float(series.values @ series.values)
    p1, p2 = grid.mesh()
    phi_nodes = np.stack([p1, p2], axis=-1)
    a_vals = quadratic_form_a_from_fit(phi_nodes, fr, total_ss)
    loglik = -a_vals / (2.0 * sigma2)  # common -(n/2)log(2 pi sigma2) term cancels below
    raw = np.exp(loglik - loglik.max())
    values = np.where(grid.in_region, raw, 0.0)
    if values.sum() <= 0.0:
        raise InvalidParameterError(
            "posterior underflows everywhere in the triangle; use a tighter grid window"
        )
    surface = ConfidenceSurface(
        grid=grid, values=values, kind="posterior", method="bayes_flat", extension=raw
    )
    return normalize_density(surface)


def boundary_band_mask(grid: ParamGrid2D, band: float) -> np.ndarray:
    """Window nodes within ``band`` of the phi1 + phi2 = 1 boundary (either side)."""
    p1, p2 = grid.mesh()
    return p1 + p2 >= 1.0 - band


def _band_mass(surface: ConfidenceSurface, band: float) -> float:
    if surface.extension is None:
        raise InvalidParameterError(
            "surface lacks the unrestricted extension needed for boundary mass"
        )
    mask = boundary_band_mask(surface.grid, band)
    return float(surface.extension[mask].sum() * surface.grid.cell_area)


def spike_correction(
    posterior: ConfidenceSurface,
    reference_cd: ConfidenceSurface,
    boundary_band: float | None = None,
) -> SpikeCorrection:
    """Boundary masses k (posterior side) and b (reference side) in a band
    around phi1 + phi2 = 1, and the factor a = (1-b)/(1-k).

    Both masses come from the surfaces' full-window extensions so the
    non-stationary side of the boundary can carry mass; the band defaults
    to one grid cell's diagonal width.
    """
    if posterior.grid != reference_cd.grid:
        raise InvalidParameterError("posterior and reference must share one grid")
    grid = posterior.grid
    band = boundary_band if boundary_band is not None else float(np.hypot(grid.h1, grid.h2))
    k = _band_mass(posterior, band)
    b = _band_mass(reference_cd, band)
    if k >= 1.0 - 1e-9 or b >= 1.0 - 1e-9:
        raise DegenerateSpikeError(f"boundary band holds all mass (b={b:.4f}, k={k:.4f})")
    return SpikeCorrection(b=b, k=k, band=band)


def corrected_region(
    posterior: ConfidenceSurface, correction: SpikeCorrection, level: float
) -> RegionResult:
    """Spike-corrected credibility region {h > K/a} targeting mass (1-alpha)/a."""
    if not (0.0 <= level < 1.0):
        raise InvalidParameterError(f"level must lie in [0, 1), got {level}")
    target = level / correction.a
    if target > 1.0 + 1e-12:
        raise InvalidParameterError(
            f"(1-alpha)/a = {target:.6g} exceeds the total posterior mass"
        )
    return region_from_density_mass(posterior, min(target, 1.0), level)
