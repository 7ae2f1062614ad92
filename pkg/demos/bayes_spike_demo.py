# Flat-prior Bayes credibility region and the boundary-spike correction,
# on a series whose estimate sits close to the phi1 + phi2 = 1 line.

import numpy as np

from arcd.ar import ARParams, fit, omega_p2, simulate
from arcd.bayes import boundary_band_mask, corrected_region, flat_prior_posterior, spike_correction
from arcd.cd import cd_asymptotic_surface
from arcd.grids import ParamGrid2D, region_from_density

series = simulate(ARParams(phi=np.array([0.55, 0.35]), sigma2=1.0), 80, 11)
fr = fit(series, 2)
omega = omega_p2(fr.phi_hat)
print(f"phi_hat = ({fr.phi_hat[0]:.4f}, {fr.phi_hat[1]:.4f}), "
      f"phi1+phi2 = {fr.phi_hat.sum():.4f}")

grid = ParamGrid2D.around_estimate(fr.phi_hat, omega.omega, series.n, m=100)
posterior = flat_prior_posterior(series, grid, fit_result=fr)
reference = cd_asymptotic_surface(grid, fr.phi_hat, omega, series.n)

plain = region_from_density(posterior, 0.95)
sc = spike_correction(posterior, reference)
print(f"band mass: posterior k={sc.k:.4f}, reference b={sc.b:.4f}, a={sc.a:.4f}")

band = boundary_band_mask(grid, sc.band)
if (plain.member & band).any():
    corrected = corrected_region(posterior, sc, 0.95)
    print(f"region touches the boundary band; plain area {plain.area:.4f} "
          f"-> corrected area {corrected.area:.4f}")
else:
    print(f"region stays clear of the boundary band; area {plain.area:.4f}")
