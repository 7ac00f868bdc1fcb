"""
Checking the stabilization hypotheses
=====================================

The hypotheses combine inequalities between the exponents with a small-mass
condition that involves a Poincare-Sobolev constant. For ``p = m`` this
constant is ``1 / sqrt(lambda_1)``, the first nonzero Neumann eigenvalue.
Other exponents use a sampled estimate that is flagged as uncertified.
"""
import math

import numpy as np

from chemoflux import Grid, ModelParams, estimate_ps_constant, evaluate_conditions, neumann_lambda1
from chemoflux.conditions import lambda1_closed_form_1d, sample_ps_ratios

grid = Grid((1.0,), (256,))
lam = neumann_lambda1(grid)
print(f"lambda_1: inverse iteration {lam.discrete:.10f}, closed form "
      f"{lambda1_closed_form_1d(1.0, 256):.10f}, continuum {lam.continuum:.10f}")

rect = Grid((2.0, 1.0), (64, 32))
print(f"rectangle 2 x 1: lambda_1 = {neumann_lambda1(rect).discrete:.6f} ~ (pi/2)^2 = {(math.pi / 2) ** 2:.6f}")

# No sampled ratio exceeds the eigenvalue bound.
ratios = sample_ps_ratios(grid, 0.0, 500, np.random.default_rng(0))
print(f"largest sampled ratio {ratios.max():.5f} vs 1/sqrt(lambda_1) = {1 / math.sqrt(lam.discrete):.5f}")

c, provenance = estimate_ps_constant(grid, 0.5, 200, np.random.default_rng(0))
print(f"theta = 0.5: C = {c:.4f} ({provenance})")

u0 = 1.0 + 0.5 * np.cos(np.pi * grid.centers()[0])
cases = {
    "weak attraction": ModelParams(m=1, p=1, q=2, chi=0.1, xi=1, alpha=0.1, beta=1, gamma=1, delta=1),
    "strong attraction": ModelParams(m=1, p=1, q=2, chi=5, xi=1, alpha=1, beta=1, gamma=1, delta=1),
    "repulsion too weak": ModelParams(m=1, p=2, q=1.5, chi=0.1, xi=1, alpha=0.1, beta=1, gamma=1, delta=1),
}
for name, params in cases.items():
    r = evaluate_conditions(u0, grid, params)
    print(f"{name:>20}: condi1..4 = {r.condi1}, {r.condi2}, {r.condi3}, {r.condi4}"
          f" -> {'applies' if r.theorem_applies else 'does not apply'}")
