"""Energy bookkeeping along a trajectory.

For every sampled state we record the integrated energy ``int Phi(u)``, the
weighted dissipation ``int (u+1)^(m-p+1)/u |grad u|^2``, the squared L2
distance to the mean and the discrete counterparts of the identities and
bounds that drive the decay towards the constant steady state.
"""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass

import numpy as np

from .grid import Grid
from .model import ModelParams, PhiEvaluator

DISSIPATION_FLOOR = 1e-12
CONVENTIONS = ("squared", "paper_linear")


@dataclass(frozen=True)
class EnergyReport:
    t: float
    dt: float
    phi_energy: float
    dissipation: float
    floor_active: bool
    l2_dev: float
    rhs_bound: float
    lemma31_residual: float
    lemma32_v_ok: bool
    lemma32_w_ok: bool
    decay_margin: float
    linf_dev_u: float
    linf_dev_v: float
    linf_dev_w: float
    mass_drift: float

    def as_dict(self):
        return asdict(self)


@dataclass(frozen=True)
class AuxFields:
    V: np.ndarray
    W: np.ndarray


def aux_fields(u, v, w, grid: Grid, params: ModelParams) -> AuxFields:
    u_bar = grid.mean(u)
    return AuxFields(
        np.asarray(v) - params.alpha / params.beta * u_bar,
        np.asarray(w) - params.gamma / params.delta * u_bar,
    )


def dissipation_integral(u, grid: Grid, params: ModelParams):
    """Face quadrature of ``(u+1)^(m-p+1) / u * |grad u|^2``.

    Returns ``(value, floor_active)``; the face density is the mean of the
    two neighbouring cells and is floored at ``DISSIPATION_FLOOR``.
    """
    u = grid.check(u)
    if np.min(u) < 0:
        raise ValueError("dissipation requires u >= 0")
    exponent = params.m - params.p + 1.0
    total = 0.0
    floor_active = False
    for grad, u_face in zip(grid.face_gradient(u), grid.face_average(u)):
        active = grad != 0.0
        if not np.any(active):
            continue
        s = u_face[active]
        floor_active |= bool(np.any(s < DISSIPATION_FLOOR))
        g = np.exp(exponent * np.log1p(s)) / np.maximum(s, DISSIPATION_FLOOR)
        total += float(np.sum(g * grad[active] ** 2))
    return total * grid.cell_volume, floor_active


def lemma31_residual(u, v, grid: Grid, params: ModelParams) -> float:
    """``sum grad u . grad v - alpha int (u-u_bar)^2 + beta int (u-u_bar) V``."""
    u = grid.check(u)
    dev = u - grid.mean(u)
    V = np.asarray(v) - params.alpha / params.beta * grid.mean(u)
    cross = grid.face_inner(grid.face_gradient(u), grid.face_gradient(v))
    return cross - params.alpha * grid.integral(dev**2) + params.beta * grid.integral(dev * V)


def lemma32_check(X, u, grid: Grid, ratio: float, slack: float = 1e-6) -> bool:
    """``int X^2 <= ratio^2 int (u - u_bar)^2`` with relative slack."""
    lhs = grid.integral(np.asarray(X) ** 2)
    rhs = ratio**2 * grid.l2_dist_sq_to_mean(u)
    return bool(lhs <= rhs * (1.0 + slack) + 1e-300)


def _dissipation_constant(c_const, convention):
    if convention not in CONVENTIONS:
        raise ValueError(f"constant convention must be one of {CONVENTIONS}")
    return c_const**2 if convention == "squared" else c_const


def decay_margin(c_const, mass, params: ModelParams, convention="squared") -> float:
    """``1/(K mass^(p-m)) - 2 chi alpha`` with ``K = C^2`` or ``K = C``."""
    K = _dissipation_constant(c_const, convention)
    return 1.0 / (K * mass ** (params.p - params.m)) - 2.0 * params.chi * params.alpha


def lemma34_bound_check(report: EnergyReport, c_const, mass, params: ModelParams,
                        convention="squared", slack=1e-3) -> bool:
    """Dissipation bounded below by ``l2_dev / (K mass^(p-m))``."""
    if not c_const > 0:
        raise ValueError("c_const must be > 0")
    K = _dissipation_constant(c_const, convention)
    bound = report.l2_dev / (K * mass ** (params.p - params.m))
    return bool(report.dissipation >= bound * (1.0 - slack))


def energy_inequality_residual(first: EnergyReport, second: EnergyReport) -> float:
    """Forward-difference residual of ``d/dt int Phi + dissipation <= 2 chi alpha l2_dev``.

    Non-positive values mean the inequality holds between the two samples.
    """
    if not second.t > first.t:
        raise ValueError("reports must be in increasing time order")
    rate = (second.phi_energy - first.phi_energy) / (second.t - first.t)
    return rate + first.dissipation - first.rhs_bound


class EnergyMonitor:
    """Turns state snapshots into ``EnergyReport`` rows."""

    def __init__(self, grid: Grid, params: ModelParams, u0, decay_margin=math.nan,
                 quad_tol=1e-10):
        self.grid = grid
        self.params = params
        self.mass0 = grid.integral(u0)
        self.u_bar = self.mass0 / grid.volume
        self.decay_margin = decay_margin
        self.phi = PhiEvaluator(params.p, quad_tol)

    def __call__(self, state, dt=0.0) -> EnergyReport:
        grid, params = self.grid, self.params
        u, v, w = state.u, state.v, state.w
        u_bar = grid.mean(u)
        aux = aux_fields(u, v, w, grid, params)
        l2 = grid.l2_dist_sq_to_mean(u)
        diss, floored = dissipation_integral(u, grid, params)
        return EnergyReport(
            t=state.t,
            dt=dt,
            phi_energy=grid.integral(self.phi(u)),
            dissipation=diss,
            floor_active=floored,
            l2_dev=l2,
            rhs_bound=2.0 * params.chi * params.alpha * l2,
            lemma31_residual=lemma31_residual(u, v, grid, params),
            lemma32_v_ok=lemma32_check(aux.V, u, grid, params.alpha / params.beta),
            lemma32_w_ok=lemma32_check(aux.W, u, grid, params.gamma / params.delta),
            decay_margin=self.decay_margin,
            linf_dev_u=float(np.max(np.abs(u - u_bar))),
            linf_dev_v=float(np.max(np.abs(aux.V))),
            linf_dev_w=float(np.max(np.abs(aux.W))),
            mass_drift=(grid.integral(u) - self.mass0) / max(1.0, self.mass0),
        )


@dataclass
class StabilizationSummary:
    final_linf_dev_u: float
    final_linf_dev_v: float
    final_linf_dev_w: float
    cumulative_l2_time_integral: float
    decay_rate_fit: float
    phi_energy_initial: float
    phi_energy_final: float
    phi_monotonicity_violations: int
    integral_bound: float
    integral_bound_ok: bool

    def as_dict(self):
        return asdict(self)


def exponential_rate(times, values) -> float:
    """Least-squares slope of ``-log(values)`` over the tail half of the series."""
    times = np.asarray(times, dtype=float)
    values = np.asarray(values, dtype=float)
    tail = slice(len(times) // 2, None)
    t, y = times[tail], values[tail]
    keep = y > 0
    if np.count_nonzero(keep) < 2 or np.ptp(t[keep]) == 0:
        return math.nan
    slope = np.polyfit(t[keep], np.log(y[keep]), 1)[0]
    return float(-slope)


def stabilization_report(reports, jitter=1e-8, integral_slack=1e-2) -> StabilizationSummary:
    """Summarise a run: final deviations, the time integral of the L2 deviation
    (left Riemann sum over samples), a tail decay-rate fit and monotonicity of
    the energy."""
    if not reports:
        raise ValueError("no reports")
    t = np.array([r.t for r in reports])
    l2 = np.array([r.l2_dev for r in reports])
    energy = np.array([r.phi_energy for r in reports])
    cumulative = float(np.sum(l2[:-1] * np.diff(t)))
    increases = np.diff(energy) > jitter * energy[0]
    margin = reports[0].decay_margin
    if margin > 0:
        bound = energy[0] / margin
        ok = cumulative <= bound * (1.0 + integral_slack)
    else:
        bound, ok = math.inf, False
    last = reports[-1]
    return StabilizationSummary(
        final_linf_dev_u=last.linf_dev_u,
        final_linf_dev_v=last.linf_dev_v,
        final_linf_dev_w=last.linf_dev_w,
        cumulative_l2_time_integral=cumulative,
        decay_rate_fit=exponential_rate(t, l2),
        phi_energy_initial=float(energy[0]),
        phi_energy_final=float(energy[-1]),
        phi_monotonicity_violations=int(np.count_nonzero(increases)),
        integral_bound=bound,
        integral_bound_ok=bool(ok),
    )
