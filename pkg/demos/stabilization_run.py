"""
Small-mass stabilization
========================

With linear diffusion and a weak attraction coupling, the stabilization
hypotheses hold and every field relaxes to its spatial mean. We check the
hypotheses, run to equilibrium, and follow the energy and the decay of the
deviation from the mean.
"""
from pathlib import Path

import numpy as np

from chemoflux import EnergyMonitor, Grid, ModelParams, StepControl, evaluate_conditions, run
from chemoflux import stabilization_report

grid = Grid((1.0,), (256,))
params = ModelParams(m=1, p=1, q=2, chi=0.1, xi=1, alpha=0.1, beta=1, gamma=1, delta=1)
u0 = 1.0 + 0.5 * np.cos(np.pi * grid.centers()[0])

report = evaluate_conditions(u0, grid, params, convention="squared")
print("hypotheses hold:", report.theorem_applies)
print(f"  C_PW = {report.c_pw:.6f} (1/pi = {1 / np.pi:.6f}), decay margin {report.decay_margin:.3f}")

monitor = EnergyMonitor(grid, params, u0, decay_margin=report.decay_margin)
result = run(u0, grid, params, StepControl(), monitor=monitor)
summary = stabilization_report(result.reports)
print(f"{result.reason} at t = {result.state.t:.3f} after {result.steps} steps")
print(f"  sup deviations u, v, w: {summary.final_linf_dev_u:.1e}, "
      f"{summary.final_linf_dev_v:.1e}, {summary.final_linf_dev_w:.1e}")
print(f"  time integral of ||u - u_bar||^2 = {summary.cumulative_l2_time_integral:.4f}"
      f" <= {summary.integral_bound:.4f}")
print(f"  fitted decay rate {summary.decay_rate_fit:.2f}, energy increases: "
      f"{summary.phi_monotonicity_violations}")

t = np.array([r.t for r in result.reports])
energy = np.array([r.phi_energy for r in result.reports])
l2 = np.array([r.l2_dev for r in result.reports])

try:
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    plt = None

if plt is not None:
    out = Path(__file__).with_name("output")
    out.mkdir(exist_ok=True)
    fig, ax = plt.subplots(1, 2, figsize=(9, 3.5))
    ax[0].semilogy(t, energy, label="energy")
    ax[0].semilogy(t, l2, label="squared L2 deviation")
    ax[0].set_xlabel("t")
    ax[0].legend()
    x = grid.centers()[0]
    ax[1].plot(x, u0, label="t = 0")
    ax[1].plot(x, result.state.u, label=f"t = {result.state.t:.2f}")
    ax[1].set_xlabel("x")
    ax[1].legend()
    fig.tight_layout()
    fig.savefig(out / "stabilization.png", dpi=120)
    print("figure written to", out / "stabilization.png")
