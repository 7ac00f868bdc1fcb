"""Screened Poisson solves ``(screen I - Lap_h) f = source_coeff * u`` with
no-flux boundaries, by preconditioned conjugate gradients (Jacobi by
default, or a cached sparse LU for repeated solves), plus a dense direct
oracle for small grids."""
from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .errors import ConvergenceError
from .grid import Grid

log = logging.getLogger(__name__)

DEFAULT_TOL = 1e-10
DENSE_LIMIT = 4096


@dataclass(frozen=True, eq=False)
class EllipticProblem:
    grid: Grid
    source: np.ndarray
    coeff_source: float
    coeff_screen: float

    def __post_init__(self):
        if not self.coeff_screen > 0:
            raise ValueError("coeff_screen must be > 0")
        if not self.coeff_source > 0:
            raise ValueError("coeff_source must be > 0")
        object.__setattr__(self, "source", self.grid.check(self.source))

    def rhs(self) -> np.ndarray:
        return self.coeff_source * self.source.ravel()


@dataclass
class EllipticSolution:
    field: np.ndarray
    residual_norm: float
    iterations: int


@lru_cache(maxsize=32)
def screened_operator(grid: Grid, coeff_screen: float) -> sp.csr_matrix:
    """``coeff_screen * I - Lap_h`` as a CSR matrix (symmetric positive definite)."""
    return grid.operator(coeff_screen, -1.0)


def factorized(A):
    """Sparse LU solve of ``A``, usable as an exact preconditioner for ``pcg``."""
    return spla.factorized(sp.csc_matrix(A))


@lru_cache(maxsize=32)
def _screened_factor(grid: Grid, coeff_screen: float):
    return factorized(screened_operator(grid, coeff_screen))


def _residual_floor(A, b, x):
    # rounding bound for fl(b - A x): a few ulps of |b| + |A||x| per row
    return 8.0 * np.finfo(float).eps * float(np.linalg.norm(np.abs(b) + abs(A) @ np.abs(x)))


def pcg(A, b, x0=None, tol=DEFAULT_TOL, max_iter=None, column_sum=None, precond=None):
    """Preconditioned conjugate gradients for SPD ``A``.

    ``precond`` maps a residual to a preconditioned residual; the default is
    Jacobi (inverse diagonal).

    Stops when ``||b - A x||_2 <= tol * ||b||_2`` (true residual), or when the
    true residual is at the rounding level of ``b - A x`` itself, which on fine
    grids can exceed ``tol * ||b||``; the returned residual is the achieved
    one. When every column of ``A`` sums to ``column_sum`` the final iterate
    is shifted by a constant so that the residual has zero sum; for the
    operators used here this makes the discrete mean (mass) identity hold to
    roundoff.

    Returns ``(x, relative_residual, iterations)``.
    """
    n = b.size
    max_iter = 10 * n + 100 if max_iter is None else max_iter
    bnorm = np.linalg.norm(b)
    if bnorm == 0.0:
        return np.zeros(n), 0.0, 0
    if precond is None:
        inv_diag = 1.0 / A.diagonal()

        def precond(r):
            return inv_diag * r

    x = np.zeros(n) if x0 is None else np.array(x0, dtype=float).ravel()
    r = b - A @ x
    it = 0
    target = tol * bnorm
    while True:
        rnorm = np.linalg.norm(r)
        if rnorm <= target:
            break
        # the computed residual cannot drop below its own rounding error
        if it > 0 and rnorm <= _residual_floor(A, b, x):
            log.debug("CG stopped at the roundoff floor (relative residual %.3e)", rnorm / bnorm)
            break
        z = precond(r)
        d = z.copy()
        rz = r @ z
        while it < max_iter and np.linalg.norm(r) > target:
            Ad = A @ d
            step = rz / (d @ Ad)
            x += step * d
            r -= step * Ad
            z = precond(r)
            rz_new = r @ z
            d = z + (rz_new / rz) * d
            rz = rz_new
            it += 1
        # the recursive residual drifts from the true one; verify and restart
        r = b - A @ x
        if it >= max_iter and np.linalg.norm(r) > max(target, _residual_floor(A, b, x)):
            raise ConvergenceError(
                f"CG did not converge in {max_iter} iterations "
                f"(relative residual {np.linalg.norm(r) / bnorm:.3e}, tol {tol:.1e})",
                residual=float(np.linalg.norm(r) / bnorm),
                iterations=it,
            )
    if column_sum is not None:
        x += np.sum(r) / (column_sum * n)
        r = b - A @ x
    return x, float(np.linalg.norm(r) / bnorm), it


def _mean_guess(problem: EllipticProblem) -> np.ndarray:
    # exact for constant sources; integrating the equation fixes the mean
    level = problem.coeff_source * float(np.mean(problem.source)) / problem.coeff_screen
    return np.full(problem.grid.size, level)


def _check_solution(problem, field):
    if np.min(problem.source) >= 0:
        floor = -1e-12 * max(1.0, float(np.max(np.abs(field))))
        if np.min(field) < floor:
            raise ConvergenceError(
                f"discrete maximum principle violated: min field {np.min(field):.3e}"
            )


def solve_screened_poisson(
    problem: EllipticProblem,
    tol: float = DEFAULT_TOL,
    max_iter: int | None = None,
    x0=None,
    preconditioner: str = "jacobi",
) -> EllipticSolution:
    """Iterative solve; ``x0`` warm-starts from a previous solution.

    ``preconditioner="factorized"`` preconditions with a cached sparse LU of
    the (time-independent) operator, which turns repeated solves on the same
    grid into one or two CG iterations.
    """
    if not tol > 0:
        raise ValueError("tol must be > 0")
    coeff = float(problem.coeff_screen)
    A = screened_operator(problem.grid, coeff)
    if preconditioner == "jacobi":
        precond = None
    elif preconditioner == "factorized":
        precond = _screened_factor(problem.grid, coeff)
    else:
        raise ValueError(f"unknown preconditioner {preconditioner!r}")
    guess = _mean_guess(problem) if x0 is None else x0
    x, res, it = pcg(A, problem.rhs(), guess, tol, max_iter, column_sum=coeff, precond=precond)
    field = x.reshape(problem.grid.shape)
    _check_solution(problem, field)
    return EllipticSolution(field, res, it)


def solve_screened_poisson_dense(problem: EllipticProblem) -> EllipticSolution:
    """Direct LU solve of the same discrete system (oracle for small grids)."""
    if problem.grid.size > DENSE_LIMIT:
        raise ValueError(f"dense solve limited to {DENSE_LIMIT} cells, got {problem.grid.size}")
    A = screened_operator(problem.grid, float(problem.coeff_screen)).toarray()
    b = problem.rhs()
    x = np.linalg.solve(A, b)
    bnorm = np.linalg.norm(b)
    res = float(np.linalg.norm(b - A @ x) / bnorm) if bnorm > 0 else 0.0
    return EllipticSolution(x.reshape(problem.grid.shape), res, 0)


def shifted_repulsion_bound_check(w, u, grid: Grid, params, r_exp=None, slack=1e-6) -> bool:
    """Check ``||w + gamma/delta||_r <= (gamma/delta) ||u + 1||_r`` with ``r = q - p + 2``."""
    r = params.q - params.p + 2.0 if r_exp is None else r_exp
    if r < 1:
        raise ValueError(f"exponent q-p+2 = {r} must be >= 1")
    ratio = params.gamma / params.delta
    lhs = grid.lp_norm(np.asarray(w) + ratio, r)
    rhs = ratio * grid.lp_norm(np.asarray(u) + 1.0, r)
    ok = lhs <= rhs * (1.0 + slack)
    log.debug("shifted repulsion bound: lhs=%.6e rhs=%.6e ok=%s", lhs, rhs, ok)
    return bool(ok)
