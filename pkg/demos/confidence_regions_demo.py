# Build and compare all four 95% confidence regions on one simulated AR(2)
# dataset, mirroring the package's core workflow:
#   simulate -> fit -> grid -> surfaces -> regions -> exported artifacts

import numpy as np

from arcd.ar import ARParams, fit, omega_p2, simulate
from arcd.cd import cd_asymptotic_surface, cd_bootstrap_surface, estimate_cdf_grid, fit_probit_quadratic
from arcd.grids import ParamGrid2D, region_from_density
from arcd.io import region_to_json, surface_to_csv
from arcd.wald import bootstrap_wald_distribution, confidence_curve, region_from_curve

PHI0 = np.array([0.4, 0.2])
N = 100
SEED = 2024

series = simulate(ARParams(phi=PHI0, sigma2=1.0), N, SEED)
fr = fit(series, 2)
omega = omega_p2(fr.phi_hat)
print(f"phi_hat = ({fr.phi_hat[0]:.4f}, {fr.phi_hat[1]:.4f}), "
      f"sigma2_hat = {fr.sigma2_hat:.4f}")

grid = ParamGrid2D.around_estimate(fr.phi_hat, omega.omega, N, m=100)

# Wald curves: asymptotic chi-square reference vs bootstrapped null law
wald_asym = confidence_curve(series, 2, grid, "wald_asymptotic", fit_result=fr)
boot_q = bootstrap_wald_distribution(series, 2, 1000, SEED, fit_result=fr)
wald_boot = confidence_curve(series, 2, grid, "wald_bootstrap",
                             fit_result=fr, bootstrap_q=boot_q)

# Confidence densities: closed-form Gaussian vs the Monte Carlo / probit fit
cd_asym = cd_asymptotic_surface(grid, fr.phi_hat, omega, N)
cdf_est = estimate_cdf_grid(grid, fr.phi_hat, N, sigma2=1.0, N_mc=1000, seed=SEED)
pq = fit_probit_quadratic(cdf_est, N)
cd_boot = cd_bootstrap_surface(grid, pq)

regions = {
    "wald_asymptotic": region_from_curve(wald_asym, 0.95),
    "wald_bootstrap": region_from_curve(wald_boot, 0.95),
    "cd_asymptotic": region_from_density(cd_asym, 0.95),
    "cd_bootstrap": region_from_density(cd_boot, 0.95),
}
for name, region in regions.items():
    covers = region.contains(PHI0)
    print(f"{name:17s} area={region.area:.4f}  covers truth: {covers}")
    region_to_json(f"{name}_region.json", region)

surface_to_csv("cd_asymptotic_surface.csv", cd_asym)
print("wrote *_region.json and cd_asymptotic_surface.csv")
