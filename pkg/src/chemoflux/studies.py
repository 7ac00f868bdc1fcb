"""Refinement studies: observed orders of the elliptic solve, the discrete
Laplacian and the time stepper."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .elliptic import EllipticProblem, solve_screened_poisson
from .grid import Grid
from .stepper import initial_state, step

ELLIPTIC_MIN_ORDER = 1.9
SPATIAL_MIN_ORDER = 1.9
TIME_MIN_ORDER = 0.9
BASE_CELLS = 32
TIME_BASE_STEPS = 10


def observed_orders(errors, ratio: float = 2.0) -> list[float]:
    errors = np.asarray(errors, dtype=float)
    return [float(math.log(a / b) / math.log(ratio)) for a, b in zip(errors[:-1], errors[1:])]


@dataclass
class OrderStudy:
    name: str
    resolutions: list
    errors: list
    orders: list
    threshold: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = bool(self.orders) and all(o >= self.threshold for o in self.orders)

    def as_dict(self):
        return asdict(self)


def thread_count() -> int:
    raw = os.environ.get("CHEMOFLUX_THREADS", "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise ValueError(f"CHEMOFLUX_THREADS must be a positive integer, got {raw!r}") from None


def _map(func, items, threads):
    if threads <= 1:
        return [func(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(func, items))


def elliptic_study(levels: int, length=1.0, alpha=1.0, beta=1.0, base_cells=BASE_CELLS,
                   tol=1e-10, threads=1) -> OrderStudy:
    """Max-norm error for the source ``1 + cos(pi x / L)``, whose solution is
    ``alpha/beta + alpha cos(pi x/L) / (beta + (pi/L)^2)``."""
    k2 = (math.pi / length) ** 2
    cells = [base_cells * 2**k for k in range(levels + 1)]

    def error(n):
        grid = Grid((length,), (n,))
        x = grid.centers()[0]
        u = 1.0 + np.cos(math.pi * x / length)
        exact = alpha / beta + alpha * np.cos(math.pi * x / length) / (beta + k2)
        v = solve_screened_poisson(EllipticProblem(grid, u, alpha, beta), tol).field
        return float(np.max(np.abs(v - exact)))

    errors = _map(error, cells, threads)
    return OrderStudy("elliptic", cells, errors, observed_orders(errors), ELLIPTIC_MIN_ORDER)


def spatial_study(levels: int, length=1.0, base_cells=BASE_CELLS) -> OrderStudy:
    """Max-norm error of the discrete Laplacian of ``cos(pi x / L)``."""
    cells = [base_cells * 2**k for k in range(levels + 1)]
    errors = []
    for n in cells:
        grid = Grid((length,), (n,))
        x = grid.centers()[0]
        f = np.cos(math.pi * x / length)
        exact = -((math.pi / length) ** 2) * f
        errors.append(float(np.max(np.abs(grid.laplacian_apply(f) - exact))))
    return OrderStudy("spatial", cells, errors, observed_orders(errors), SPATIAL_MIN_ORDER)


def fixed_step_run(u0, grid, params, dt, n_steps, elliptic_tol=1e-10):
    state = initial_state(u0, grid, params, elliptic_tol)
    for _ in range(n_steps):
        state = step(state, params, dt, elliptic_tol)
    return state.u


def time_study(levels: int, u0, grid, params, dt0, base_steps=TIME_BASE_STEPS,
               elliptic_tol=1e-10, threads=1) -> OrderStudy:
    """Self-convergence: runs to ``T = base_steps * dt0`` with ``dt0 / 2^k``;
    errors are max-norm differences of consecutive levels."""
    runs = [(dt0 / 2**k, base_steps * 2**k) for k in range(levels + 1)]
    finals = _map(lambda r: fixed_step_run(u0, grid, params, r[0], r[1], elliptic_tol), runs, threads)
    errors = [float(np.max(np.abs(a - b))) for a, b in zip(finals[:-1], finals[1:])]
    return OrderStudy("time", [r[0] for r in runs], errors, observed_orders(errors), TIME_MIN_ORDER)


def convergence_study(config, levels: int, threads=None) -> list[OrderStudy]:
    if levels < 2:
        raise ValueError("convergence study needs at least 2 levels")
    threads = thread_count() if threads is None else threads
    params, grid = config.params, config.grid
    length = grid.extent[0]
    tol = config.elliptic_tol
    return [
        elliptic_study(levels, length, params.alpha, params.beta, tol=tol, threads=threads),
        spatial_study(levels, length),
        time_study(levels, config.initial_density(), grid, params, config.control.dt_init,
                   elliptic_tol=tol, threads=threads),
    ]
