"""
Observed orders of accuracy
===========================

The elliptic solve and the discrete Laplacian are second order in space; the
semi-implicit stepper is first order in time. Each study halves the mesh or
step size and reports ``log2`` of successive error ratios.
"""
import numpy as np

from chemoflux import Grid, ModelParams
from chemoflux.studies import elliptic_study, spatial_study, time_study

for study in (elliptic_study(4, alpha=2.0, beta=0.5), spatial_study(4)):
    print(f"{study.name:>9}: cells {study.resolutions}")
    print(f"{'':>9}  orders {np.round(study.orders, 3)}")

grid = Grid((1.0,), (64,))
params = ModelParams(m=2, p=2, q=2, chi=1, xi=1, alpha=1, beta=1, gamma=1, delta=1)
u0 = 1.0 + 0.3 * np.cos(np.pi * grid.centers()[0])
study = time_study(4, u0, grid, params, dt0=0.01)
print(f"{'time':>9}: dt {study.resolutions}")
print(f"{'':>9}  orders {np.round(study.orders, 3)}")
