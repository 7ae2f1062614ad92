# The prior implied by treating the asymptotic confidence density as a
# posterior: residual surfaces shrink roughly like 1/n, visualized here as
# summary numbers for two sample sizes.

import numpy as np

from arcd.experiments import run_implied_prior_study
from arcd.grids import ParamGrid2D
from arcd.io import contours_to_json, surface_to_csv

grid = ParamGrid2D(-0.4, 0.4, -0.4, 0.4, 50)

for n in (200, 800):
    surface = run_implied_prior_study((0.0, 0.0), n, 100, grid, seed=7)
    finite = surface.values[np.isfinite(surface.values)]
    print(f"n={n}: mean residual in [{finite.min():+.5f}, {finite.max():+.5f}], "
          f"mean |residual| = {np.abs(finite).mean():.5f}")
    surface_to_csv(f"residual_surface_n{n}.csv", surface)

surface = run_implied_prior_study((0.0, 0.0), 400, 100, grid, seed=7)
levels = [-0.01, -0.005, 0.0, 0.005, 0.01]
contours_to_json("residual_contours_n400.json", surface, levels)
print("wrote residual_surface_n{200,800}.csv and residual_contours_n400.json")
