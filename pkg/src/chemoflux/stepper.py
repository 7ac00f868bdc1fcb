"""Conservative transport of the cell density and the IMEX time loop.

Each step treats the quasilinear diffusion implicitly with the diffusivity
frozen at the old state, and the two taxis fluxes explicitly with first-order
upwinding, then re-solves the two elliptic equations for the new density.
"""
from __future__ import annotations

import logging
import math
import threading
from dataclasses import dataclass, field, replace
from typing import Callable, Sequence

import numpy as np

from . import elliptic
from .errors import ConvergenceError, NegativityError, StepFailure
from .grid import Grid
from .model import ModelParams, diffusivity

log = logging.getLogger(__name__)

NEGATIVITY_FLOOR = -1e-12
MAX_SAMPLES = 10_000


@dataclass
class SimState:
    grid: Grid
    t: float
    u: np.ndarray
    v: np.ndarray
    w: np.ndarray
    mass0: float
    steps: int = 0

    def copy(self) -> "SimState":
        return replace(self, u=self.u.copy(), v=self.v.copy(), w=self.w.copy())

    @property
    def mass(self) -> float:
        return self.grid.integral(self.u)

    @property
    def u_bar(self) -> float:
        return self.mass0 / self.grid.volume

    def linf_dev_u(self) -> float:
        return float(np.max(np.abs(self.u - self.grid.mean(self.u))))


@dataclass
class StepControl:
    dt_init: float = 1e-3
    dt_min: float = 1e-12
    dt_max: float = 1e-2
    cfl_safety: float = 0.4
    t_end: float = 10.0
    convergence_tol: float = 1e-6
    sample_every: int | None = None
    max_steps: int | None = None

    def __post_init__(self):
        problems = self.violations()
        if problems:
            raise ValueError("; ".join(problems))

    def violations(self) -> list[str]:
        problems = []
        for name in ("dt_init", "dt_min", "dt_max", "convergence_tol"):
            if not getattr(self, name) > 0:
                problems.append(f"{name} must be > 0")
        if not self.t_end >= 0:
            problems.append("t_end must be >= 0")
        if not self.dt_min <= self.dt_max:
            problems.append("dt_min must be <= dt_max")
        elif not self.dt_min <= self.dt_init <= self.dt_max:
            problems.append("dt_init must lie in [dt_min, dt_max]")
        if not 0 < self.cfl_safety < 1:
            problems.append("cfl_safety must lie in (0, 1)")
        if self.sample_every is not None and self.sample_every < 1:
            problems.append("sample_every must be >= 1")
        return problems

    def cadence(self) -> int:
        if self.sample_every is not None:
            return self.sample_every
        expected = self.t_end / self.dt_max if self.t_end > 0 else 0
        if self.max_steps is not None:
            expected = min(expected, self.max_steps)
        return max(1, math.ceil(expected / MAX_SAMPLES))


def solve_chemicals(grid, u, params, tol, v0=None, w0=None, preconditioner="factorized"):
    v = elliptic.solve_screened_poisson(
        elliptic.EllipticProblem(grid, u, params.alpha, params.beta), tol, x0=v0,
        preconditioner=preconditioner,
    )
    w = elliptic.solve_screened_poisson(
        elliptic.EllipticProblem(grid, u, params.gamma, params.delta), tol, x0=w0,
        preconditioner=preconditioner,
    )
    return v.field, w.field


def initial_state(u0, grid: Grid, params: ModelParams, elliptic_tol=elliptic.DEFAULT_TOL) -> SimState:
    u0 = grid.check(u0).copy()
    if np.min(u0) < 0:
        raise ValueError("initial density must be nonnegative")
    if not np.any(u0 > 0):
        raise ValueError("initial density must not vanish identically")
    v, w = solve_chemicals(grid, u0, params, elliptic_tol)
    return SimState(grid, 0.0, u0, v, w, grid.integral(u0))


def taxis_velocities(state: SimState, params: ModelParams):
    """Face drift velocities ``chi dv`` (towards higher v) and ``-xi dw``."""
    grid = state.grid
    attract = [params.chi * g for g in grid.face_gradient(state.v)]
    repel = [-params.xi * g for g in grid.face_gradient(state.w)]
    return attract, repel


def _sensitivity_factor(u, exponent):
    # u (u+1)^(exponent-2)
    return u * np.exp((exponent - 2.0) * np.log1p(u))


def drift_flux(state: SimState, params: ModelParams) -> list[np.ndarray]:
    """Physical taxis flux on faces, each term upwinded on its own velocity sign."""
    grid = state.grid
    attract, repel = taxis_velocities(state, params)
    s_p = _sensitivity_factor(state.u, params.p)
    s_q = _sensitivity_factor(state.u, params.q)
    up_p = grid.face_upwind(s_p, attract)
    up_q = grid.face_upwind(s_q, repel)
    return [a * sp_ + r * sq_ for a, sp_, r, sq_ in zip(attract, up_p, repel, up_q)]


def assemble_flux(state: SimState, params: ModelParams) -> list[np.ndarray]:
    """Total face flux ``F`` with ``u_t = div F``.

    Diffusive part: mean of the two cell diffusivities times the face
    gradient. Taxis part: minus the upwinded drift flux. Boundary faces are 0.
    """
    grid = state.grid
    D = grid.face_average(diffusivity(state.u, params))
    du = grid.face_gradient(state.u)
    J = drift_flux(state, params)
    return [d * g - j for d, g, j in zip(D, du, J)]


def max_face_speed(state: SimState, params: ModelParams) -> float:
    """Largest transport speed ``|c| (u_up+1)^(e-2)`` over faces and taxis terms."""
    grid = state.grid
    attract, repel = taxis_velocities(state, params)
    speed = 0.0
    for velocity, exponent in ((attract, params.p), (repel, params.q)):
        factor = np.exp((exponent - 2.0) * np.log1p(state.u))
        up = grid.face_upwind(factor, velocity)
        for c, f in zip(velocity, up):
            if c.size:
                speed = max(speed, float(np.max(np.abs(c) * f)))
    return speed


def adaptive_dt(state: SimState, params: ModelParams, control: StepControl) -> float:
    speed = max_face_speed(state, params)
    if speed == 0.0:
        return control.dt_max
    dt = control.cfl_safety * min(state.grid.h) / speed
    return float(min(max(dt, control.dt_min), control.dt_max))


# one cached factorization per thread; concurrent runs stay isolated
_factor_cache = threading.local()


def _implicit_diffusion_solver(grid, u, params, dt):
    """``I - dt div(D grad .)`` with its LU factor; the factor is reused while
    dt and the lagged diffusivity are unchanged (e.g. linear diffusion)."""
    D = grid.face_average(diffusivity(u, params))
    key = (grid, dt, b"".join(d.tobytes() for d in D))
    hit = getattr(_factor_cache, "last", None)
    if hit is not None and hit[0] == key:
        return hit[1], hit[2]
    M = grid.operator(1.0, -dt, D)
    solve = elliptic.factorized(M)
    _factor_cache.last = (key, M, solve)
    return M, solve


def step(state: SimState, params: ModelParams, dt: float, elliptic_tol=elliptic.DEFAULT_TOL) -> SimState:
    """One linearly implicit / explicit upwind step.

    Raises ``NegativityError`` if the new density dips below the roundoff
    allowance, and ``ConvergenceError`` if a linear solve fails.
    """
    if not dt > 0:
        raise ValueError("dt must be > 0")
    grid = state.grid
    rhs = state.u - dt * grid.divergence(drift_flux(state, params))
    if np.min(rhs) < NEGATIVITY_FLOOR:
        raise NegativityError(f"explicit taxis update gave min u = {np.min(rhs):.3e}", float(np.min(rhs)))
    M, solve = _implicit_diffusion_solver(grid, state.u, params, dt)
    # every column of M sums to 1, so the mass correction in pcg is exact
    u_new, _, _ = elliptic.pcg(M, rhs.ravel(), state.u.ravel(), elliptic_tol, column_sum=1.0, precond=solve)
    u_new = u_new.reshape(grid.shape)
    if np.min(u_new) < NEGATIVITY_FLOOR:
        raise NegativityError(f"step produced min u = {np.min(u_new):.3e}", float(np.min(u_new)))
    v, w = solve_chemicals(grid, u_new, params, elliptic_tol, state.v.ravel(), state.w.ravel())
    return SimState(grid, state.t + dt, u_new, v, w, state.mass0, state.steps + 1)


@dataclass
class RunResult:
    state: SimState
    reason: str
    reports: list = field(default_factory=list)
    initial: SimState | None = None
    min_u: float = math.inf
    max_u: float = -math.inf
    max_mass_drift: float = 0.0
    rejected_steps: int = 0

    @property
    def steps(self) -> int:
        return self.state.steps


Hook = Callable[[SimState], None]


def run(
    u0,
    grid: Grid,
    params: ModelParams,
    control: StepControl,
    hooks: Sequence[Hook] = (),
    monitor=None,
    elliptic_tol: float = elliptic.DEFAULT_TOL,
) -> RunResult:
    """Advance until ``t_end`` or until ``||u - u_bar||_inf < convergence_tol``.

    ``monitor`` maps a state snapshot (and the step size just taken) to an
    energy report; by default an ``EnergyMonitor`` without a decay margin is
    used. Hooks receive copies of the state at the sampling cadence.
    """
    from .diagnostics import EnergyMonitor

    state = initial_state(u0, grid, params, elliptic_tol)
    if monitor is None:
        monitor = EnergyMonitor(grid, params, state.u)
    result = RunResult(state, "", initial=state.copy(), min_u=float(np.min(state.u)),
                       max_u=float(np.max(state.u)))
    cadence = control.cadence()

    def sample(s, dt):
        snap = s.copy()
        result.reports.append(monitor(snap, dt))
        for hook in hooks:
            hook(snap)

    sample(state, 0.0)
    dt = control.dt_init
    last_dt = 0.0
    sampled_at = 0
    scale = max(1.0, state.mass0)
    while True:
        if state.linf_dev_u() < control.convergence_tol:
            result.reason = "converged"
            break
        if state.t >= control.t_end * (1 - 1e-14):
            result.reason = "t_end reached"
            break
        if control.max_steps is not None and state.steps >= control.max_steps:
            result.reason = "max steps reached"
            break
        dt = min(adaptive_dt(state, params, control), 2.0 * dt)
        dt = min(dt, control.t_end - state.t)
        while True:
            try:
                new = step(state, params, dt, elliptic_tol)
                break
            except (NegativityError, ConvergenceError) as exc:
                result.rejected_steps += 1
                dt *= 0.5
                log.info("step rejected at t=%.6g (%s); retrying with dt=%.3g", state.t, exc, dt)
                if dt < control.dt_min:
                    raise StepFailure(
                        f"dt fell below dt_min={control.dt_min:g} at t={state.t:.6g}",
                        dump={"t": state.t, "steps": state.steps, "dt": dt,
                              "min_u": float(np.min(state.u)), "max_u": float(np.max(state.u)),
                              "mass": state.mass, "cause": str(exc)},
                    ) from exc
        state = new
        last_dt = dt
        result.min_u = min(result.min_u, float(np.min(state.u)))
        result.max_u = max(result.max_u, float(np.max(state.u)))
        result.max_mass_drift = max(result.max_mass_drift, abs(state.mass - state.mass0) / scale)
        if state.steps % cadence == 0:
            sample(state, dt)
            sampled_at = state.steps
    if sampled_at != state.steps:
        sample(state, last_dt)
    result.state = state
    return result
