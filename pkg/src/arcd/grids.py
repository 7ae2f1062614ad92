"""Rectangular (phi1, phi2) grids clipped to the stationarity triangle,
scalar surfaces over them, and level/threshold region extraction."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from arcd.ar import InvalidParameterError, stationary_triangle_mask

#: Bounding box of the stationarity triangle; default windows never exceed it.
TRIANGLE_BOX = (-2.0, 2.0, -1.0, 1.0)

SURFACE_KINDS = ("confidence_curve", "density", "posterior", "log_implied_prior")
SURFACE_METHODS = (
    "wald_asymptotic",
    "wald_bootstrap",
    "cd_asymptotic",
    "cd_bootstrap",
    "bayes_flat",
    "bayes_corrected",
)


class EmptyRegionWarning(UserWarning):
    """A requested region came out empty."""


@dataclass(frozen=True)
class ParamGrid2D:
    """Regular grid over (phi1, phi2) with m subdivisions per axis.

    Axis j holds m+1 nodes phi_{j,min}, phi_{j,min}+h_j, ..., phi_{j,max}
    with h_j = (phi_{j,max} - phi_{j,min}) / m.  ``in_region[i, j]`` marks
    nodes strictly inside the stationarity triangle; Riemann sums weight
    each node by cell_area = h_1 h_2.
    """

    phi1_min: float
    phi1_max: float
    phi2_min: float
    phi2_max: float
    m: int

    def __post_init__(self):
        if self.m < 1:
            raise InvalidParameterError("grid needs m >= 1 subdivisions")
        if not (self.phi1_max > self.phi1_min and self.phi2_max > self.phi2_min):
            raise InvalidParameterError("grid window must have positive extent")

    @property
    def h1(self) -> float:
        return (self.phi1_max - self.phi1_min) / self.m

    @property
    def h2(self) -> float:
        return (self.phi2_max - self.phi2_min) / self.m

    @property
    def cell_area(self) -> float:
        return self.h1 * self.h2

    @property
    def phi1_axis(self) -> np.ndarray:
        return self.phi1_min + self.h1 * np.arange(self.m + 1)

    @property
    def phi2_axis(self) -> np.ndarray:
        return self.phi2_min + self.h2 * np.arange(self.m + 1)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        """(phi1, phi2) node coordinate arrays of shape (m+1, m+1)."""
        return np.meshgrid(self.phi1_axis, self.phi2_axis, indexing="ij")

    @property
    def in_region(self) -> np.ndarray:
        p1, p2 = self.mesh()
        return stationary_triangle_mask(p1, p2)

    def nearest_node(self, point) -> tuple[int, int] | None:
        """Indices of the closest node, or None if the point leaves the window."""
        x, y = float(point[0]), float(point[1])
        half1, half2 = 0.5 * self.h1, 0.5 * self.h2
        if not (self.phi1_min - half1 <= x <= self.phi1_max + half1):
            return None
        if not (self.phi2_min - half2 <= y <= self.phi2_max + half2):
            return None
        i = int(np.clip(round((x - self.phi1_min) / self.h1), 0, self.m))
        j = int(np.clip(round((y - self.phi2_min) / self.h2), 0, self.m))
        return i, j

    @staticmethod
    def around_estimate(phi_hat, omega, n, half_widths_se: float = 5.0, m: int = 100) -> "ParamGrid2D":
        """Window phi_hat +- half_widths_se standard errors per axis, clipped
        to the triangle's bounding box."""
        phi_hat = np.asarray(phi_hat, dtype=float)
        se = np.sqrt(np.abs(np.diag(omega)) / n)
        lo1 = max(phi_hat[0] - half_widths_se * se[0], TRIANGLE_BOX[0])
        hi1 = min(phi_hat[0] + half_widths_se * se[0], TRIANGLE_BOX[1])
        lo2 = max(phi_hat[1] - half_widths_se * se[1], TRIANGLE_BOX[2])
        hi2 = min(phi_hat[1] + half_widths_se * se[1], TRIANGLE_BOX[3])
        return ParamGrid2D(lo1, hi1, lo2, hi2, m)


@dataclass(frozen=True)
class ConfidenceSurface:
    """Per-node scalar field over a grid.

    ``values`` has shape (m+1, m+1) aligned with the grid mesh.  For
    confidence curves, out-of-triangle nodes inside the window carry 1;
    for densities and posteriors they carry 0.  ``extension`` optionally
    keeps the same field evaluated without the triangle restriction
    (needed by the boundary-spike correction).
    """

    grid: ParamGrid2D
    values: np.ndarray
    kind: str
    method: str
    extension: np.ndarray | None = field(default=None, compare=False)

    def __post_init__(self):
        if self.kind not in SURFACE_KINDS:
            raise InvalidParameterError(f"unknown surface kind {self.kind!r}")
        if self.method not in SURFACE_METHODS:
            raise InvalidParameterError(f"unknown surface method {self.method!r}")
        values = np.asarray(self.values, dtype=float)
        expected = (self.grid.m + 1, self.grid.m + 1)
        if values.shape != expected:
            raise InvalidParameterError(f"values shape {values.shape} != grid shape {expected}")
        object.__setattr__(self, "values", values)

    def riemann_mass(self) -> float:
        """Riemann sum of the positive part over in-region cells."""
        vals = np.where(self.grid.in_region, np.clip(self.values, 0.0, None), 0.0)
        return float(vals.sum() * self.grid.cell_area)


def normalize_density(surface: ConfidenceSurface) -> ConfidenceSurface:
    """Scale the positive part restricted to the triangle to unit Riemann mass.

    Negative values (possible for the raw smoothed confidence density) and
    out-of-triangle nodes are zeroed.  The unrestricted extension, when
    present, is rescaled by its own full-window mass.
    """
    mask = surface.grid.in_region
    vals = np.where(mask, np.clip(surface.values, 0.0, None), 0.0)
    mass = vals.sum() * surface.grid.cell_area
    if mass <= 0.0:
        raise InvalidParameterError("surface has no positive mass inside the triangle")
    ext = surface.extension
    if ext is not None:
        ext_pos = np.clip(ext, 0.0, None)
        ext_mass = ext_pos.sum() * surface.grid.cell_area
        ext = ext_pos / ext_mass if ext_mass > 0 else None
    return ConfidenceSurface(
        grid=surface.grid, values=vals / mass, kind=surface.kind, method=surface.method, extension=ext
    )


@dataclass(frozen=True)
class RegionResult:
    """One (1-alpha) region: member cell mask, threshold and area."""

    grid: ParamGrid2D
    level: float
    threshold: float
    member: np.ndarray

    @property
    def area(self) -> float:
        return float(self.member.sum()) * self.grid.cell_area

    @property
    def member_nodes(self) -> list[tuple[int, int]]:
        ii, jj = np.nonzero(self.member)
        return list(zip(ii.tolist(), jj.tolist()))

    def contains(self, point) -> bool:
        idx = self.grid.nearest_node(point)
        if idx is None:
            return False
        return bool(self.member[idx])


def _check_level(level: float) -> None:
    if not (0.0 <= level < 1.0):
        raise InvalidParameterError(f"confidence level must lie in [0, 1), got {level}")


def region_from_curve(surface: ConfidenceSurface, level: float) -> RegionResult:
    """Sublevel set {curve <= level} of a confidence curve, triangle-clipped."""
    if surface.kind != "confidence_curve":
        raise InvalidParameterError("region_from_curve needs a confidence_curve surface")
    _check_level(level)
    member = surface.grid.in_region & (surface.values <= level)
    if not member.any():
        warnings.warn(f"{level:.3f} region from curve is empty", EmptyRegionWarning, stacklevel=2)
    return RegionResult(grid=surface.grid, level=level, threshold=level, member=member)


def threshold_for_mass(surface: ConfidenceSurface, target_mass: float) -> float:
    """Largest K whose superlevel set {value > K} holds at least target_mass.

    Solves sum_{value > K} value * cell_area = target_mass on the discrete
    grid; exact within one cell's mass (the grid analogue of root-finding
    on the continuous threshold equation).
    """
    mask = surface.grid.in_region
    vals = surface.values[mask]
    vals = vals[vals > 0.0]
    if vals.size == 0:
        raise InvalidParameterError("no positive density cells")
    total = vals.sum() * surface.grid.cell_area
    if target_mass > total * (1.0 + 1e-12):
        raise InvalidParameterError(
            f"target mass {target_mass:.6g} exceeds available mass {total:.6g}"
        )
    order = np.sort(vals)[::-1]
    cum = np.cumsum(order) * surface.grid.cell_area
    idx = int(np.searchsorted(cum, target_mass * (1.0 - 1e-12)))
    idx = min(idx, order.size - 1)
    # K strictly below the last included value so that {value > K} covers it
    k_hi = order[idx]
    k_lo = order[idx + 1] if idx + 1 < order.size else 0.0
    return float(0.5 * (k_hi + k_lo))


def region_from_density_mass(surface: ConfidenceSurface, target_mass: float, level: float) -> RegionResult:
    """Superlevel region of a normalized density holding ``target_mass``."""
    k = threshold_for_mass(surface, target_mass)
    member = surface.grid.in_region & (surface.values > k)
    return RegionResult(grid=surface.grid, level=level, threshold=k, member=member)


def region_from_density(surface: ConfidenceSurface, level: float) -> RegionResult:
    """Highest-density region with Riemann mass 1 - alpha = level.

    The surface must already be normalized (unit positive mass over the
    triangle-restricted window).
    """
    if surface.kind not in ("density", "posterior"):
        raise InvalidParameterError("region_from_density needs a density or posterior surface")
    _check_level(level)
    mass = surface.riemann_mass()
    if abs(mass - 1.0) > 1e-6:
        raise InvalidParameterError(
            f"surface is not normalized (mass {mass:.8f}); call normalize_density first"
        )
    return region_from_density_mass(surface, level, level)
