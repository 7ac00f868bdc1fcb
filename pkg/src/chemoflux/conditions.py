"""Hypotheses of the stabilization result for a concrete configuration, and
the functional-inequality constants they depend on."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from decimal import Decimal

import numpy as np
import scipy.sparse.linalg as spla

from .diagnostics import CONVENTIONS
from .errors import ConvergenceError
from .grid import Grid
from .model import ModelParams

EXACT = "exact_rectangle"
DISCRETE = "discrete_eigen"
HEURISTIC = "heuristic_sampling"
PS_SAFETY = 1.5


def same_decimal(a, b) -> bool:
    """Compare two user-supplied exponents as decimals, not as float arithmetic."""
    return Decimal(str(a)).normalize() == Decimal(str(b)).normalize()


def theta_range(n: int) -> tuple[float, float]:
    return (0.0, 1.0) if n == 1 else (0.0, 2.0 / n)


def check_exponents(params: ModelParams) -> tuple[bool, bool, bool]:
    """``(p < q, p == q and chi alpha < xi gamma, p - m in admissible range)``."""
    equal = same_decimal(params.p, params.q)
    condi1 = params.p < params.q and not equal
    condi2 = equal and params.chi * params.alpha - params.xi * params.gamma < 0
    lo, hi = theta_range(params.n)
    diff = Decimal(str(params.p)) - Decimal(str(params.m))
    condi3 = Decimal(lo) <= diff <= Decimal(str(hi)) if params.n <= 2 else False
    return condi1, bool(condi2), bool(condi3)


@dataclass
class Lambda1:
    discrete: float
    continuum: float
    iterations: int


def neumann_lambda1(grid: Grid, tol: float = 1e-12, max_iter: int = 500) -> Lambda1:
    """Smallest nonzero eigenvalue of ``-Lap_h`` by inverse iteration.

    The constant mode is deflated by pinning the first unknown: for a
    mean-zero right-hand side the remaining rows determine the solution up to
    a constant, which is then projected out.
    """
    A = (-grid.laplacian()).tocsc()
    lu = spla.splu(A[1:, 1:])
    # low-frequency start vector: sum of the coordinates
    x = sum(c for c in grid.mesh()).ravel().astype(float)
    x -= x.mean()
    x /= np.linalg.norm(x)
    lam = float(x @ (A @ x))
    for it in range(1, max_iter + 1):
        y = np.empty_like(x)
        y[0] = 0.0
        y[1:] = lu.solve(x[1:])
        y -= y.mean()
        y /= np.linalg.norm(y)
        new = float(y @ (A @ y))
        x = y
        if abs(new - lam) <= tol * abs(new):
            lam = new
            break
        lam = new
    else:
        raise ConvergenceError(f"inverse iteration did not converge in {max_iter} steps", iterations=max_iter)
    continuum = (math.pi / max(grid.extent)) ** 2
    return Lambda1(lam, continuum, it)


def lambda1_closed_form_1d(length: float, cells: int) -> float:
    h = length / cells
    return 2.0 / h**2 * (1.0 - math.cos(math.pi * h / length))


def _gradient_magnitude(grid: Grid, phi):
    """Cell-centred |grad phi| from averaged face differences."""
    comps = []
    for axis, g in enumerate(grid.face_gradient(phi)):
        lo = [slice(None)] * grid.n
        hi = [slice(None)] * grid.n
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        comps.append(0.5 * (g[tuple(lo)] + g[tuple(hi)]))
    return np.sqrt(sum(c**2 for c in comps))


def gradient_norm(grid: Grid, phi, sigma: float) -> float:
    """Discrete ``||grad phi||_{L^sigma}``.

    In 1D (and for ``sigma = 2``) face differences are used directly, which
    makes the ``sigma = 2`` case the exact Rayleigh quotient of ``-Lap_h``.
    """
    if grid.n == 1 or sigma == 2.0:
        total = sum(np.sum(np.abs(g) ** sigma) for g in grid.face_gradient(phi))
        return float((total * grid.cell_volume) ** (1.0 / sigma))
    return grid.lp_norm(_gradient_magnitude(grid, phi), sigma)


def random_trial_function(grid: Grid, rng: np.random.Generator, modes: int = 6) -> np.ndarray:
    """Random combination of low-frequency Neumann cosines."""
    coords = grid.mesh()
    out = np.zeros(grid.shape)
    ks = np.array(np.meshgrid(*[np.arange(modes)] * grid.n, indexing="ij")).reshape(grid.n, -1).T
    for k in ks:
        if not np.any(k):
            continue
        amp = rng.standard_normal() / (1.0 + float(np.sum(k)))
        term = np.ones(grid.shape)
        for axis, kk in enumerate(k):
            term = term * np.cos(kk * np.pi * coords[axis] / grid.extent[axis])
        out += amp * term
    return out + rng.standard_normal()


def sample_ps_ratios(grid: Grid, theta: float, trials: int, rng=None) -> np.ndarray:
    """Ratios ``||phi - mean||_2 / ||grad phi||_{2/(theta+1)}`` over random trials.

    Trial functions with vanishing gradient are skipped.
    """
    rng = np.random.default_rng(rng)
    sigma = 2.0 / (theta + 1.0)
    ratios = []
    for _ in range(trials):
        phi = random_trial_function(grid, rng)
        g = gradient_norm(grid, phi, sigma)
        if g <= 0.0:
            continue
        ratios.append(math.sqrt(grid.l2_dist_sq_to_mean(phi)) / g)
    return np.array(ratios)


def _check_theta(theta, n):
    lo, hi = theta_range(n)
    if not (-1.0 < theta <= hi):
        raise ValueError(f"theta must lie in (-1, {hi:g}] for n = {n}, got {theta}")


def estimate_ps_constant(grid: Grid, theta: float, trials: int = 200, rng=None,
                         provenance: str = DISCRETE) -> tuple[float, str]:
    """Poincare-Sobolev constant for ``||phi - mean||_2 <= C ||grad phi||_{2/(theta+1)}``.

    ``theta = 0`` is the Poincare-Wirtinger case ``C = 1/sqrt(lambda_1)``,
    taken from the continuum eigenvalue of the rectangle (``exact_rectangle``)
    or from the discrete operator (``discrete_eigen``). Otherwise the
    constant is a sampled lower estimate inflated by ``PS_SAFETY``; it is not
    certified.
    """
    _check_theta(theta, grid.n)
    if theta == 0.0:
        lam = neumann_lambda1(grid)
        if provenance == EXACT:
            return 1.0 / math.sqrt(lam.continuum), EXACT
        if provenance == DISCRETE:
            return 1.0 / math.sqrt(lam.discrete), DISCRETE
        raise ValueError(f"unknown provenance {provenance!r} for theta = 0")
    ratios = sample_ps_ratios(grid, theta, trials, rng)
    if ratios.size == 0:
        raise ValueError("no admissible trial functions sampled")
    return PS_SAFETY * float(np.max(ratios)), HEURISTIC


def _constant_power(c, convention):
    if convention not in CONVENTIONS:
        raise ValueError(f"constant convention must be one of {CONVENTIONS}")
    return c**2 if convention == "squared" else c


def check_small_mass(u0, grid: Grid, params: ModelParams, c_ps: float, convention="squared"):
    """``chi alpha ||u0||_1^(p-m) <= 1 / (2K)``; returns ``(ok, lhs, rhs)``."""
    if not c_ps > 0:
        raise ValueError("c_ps must be > 0")
    mass = grid.integral(np.abs(u0))
    lhs = params.chi * params.alpha * mass ** (params.p - params.m)
    rhs = 1.0 / (2.0 * _constant_power(c_ps, convention))
    return bool(lhs <= rhs), lhs, rhs


def check_remark_linf(u0, params: ModelParams, c_pw: float):
    """Alternative sup-norm smallness test, with ``||u0||_inf`` standing in for
    the a-priori bound of the density along the trajectory.

    Returns ``(ok, margin)`` where ``margin = 1/(C^2 u_max^(p-m)) - 2 chi alpha``
    (or ``1 - 2 chi alpha C^2`` scaled form when ``p = m``).
    """
    diff = params.p - params.m
    if diff < 0:
        raise ValueError("the sup-norm alternative requires p - m >= 0")
    chi_alpha = params.chi * params.alpha
    if same_decimal(params.p, params.m):
        margin = 1.0 - 2.0 * chi_alpha * c_pw**2
        return bool(margin >= 0), margin
    u_max = float(np.max(u0))
    if u_max == 0.0:
        return True, math.inf
    margin = 1.0 / (c_pw**2 * u_max**diff) - 2.0 * chi_alpha
    return bool(margin >= 0), margin


@dataclass
class ConditionReport:
    condi1: bool
    condi2: bool
    condi3: bool
    condi4: bool
    remark_linf: bool | None
    c_ps: float
    c_pw: float
    lambda1: float
    lambda1_discrete: float
    lambda1_continuum: float
    u0_l1: float
    u0_linf: float
    constant_provenance: str
    constant_convention: str
    small_mass_lhs: float
    small_mass_rhs: float
    decay_margin: float
    notes: list

    @property
    def theorem_applies(self) -> bool:
        return (self.condi1 or self.condi2) and self.condi3 and self.condi4

    def as_dict(self):
        out = asdict(self)
        out["theorem_applies"] = self.theorem_applies
        return out


def evaluate_conditions(u0, grid: Grid, params: ModelParams, convention="squared",
                        provenance=EXACT, trials=200, rng=None) -> ConditionReport:
    from .diagnostics import decay_margin

    condi1, condi2, condi3 = check_exponents(params)
    lam = neumann_lambda1(grid)
    lambda1 = lam.continuum if provenance == EXACT else lam.discrete
    c_pw = 1.0 / math.sqrt(lambda1)
    theta = params.p - params.m
    notes = []
    lo, hi = theta_range(params.n)
    if -1.0 < theta <= hi:
        c_ps, prov = estimate_ps_constant(grid, theta, trials, rng, provenance)
        if prov == HEURISTIC:
            notes.append("Poincare-Sobolev constant is a sampled estimate, not certified")
    else:
        c_ps, prov = math.nan, "unavailable"
        notes.append(f"p - m = {theta:g} outside the Poincare-Sobolev range; constant unavailable")
    mass = grid.integral(u0)
    if math.isnan(c_ps):
        condi4, lhs, rhs, margin = False, math.nan, math.nan, math.nan
    else:
        condi4, lhs, rhs = check_small_mass(u0, grid, params, c_ps, convention)
        margin = decay_margin(c_ps, mass, params, convention)
    if theta >= 0:
        remark, _ = check_remark_linf(u0, params, c_pw)
        notes.append("sup-norm check uses ||u0||_inf in place of the trajectory bound")
    else:
        remark = None
    return ConditionReport(
        condi1=condi1, condi2=condi2, condi3=condi3, condi4=condi4, remark_linf=remark,
        c_ps=c_ps, c_pw=c_pw, lambda1=lambda1, lambda1_discrete=lam.discrete, lambda1_continuum=lam.continuum,
        u0_l1=mass, u0_linf=float(np.max(u0)), constant_provenance=prov,
        constant_convention=convention, small_mass_lhs=lhs, small_mass_rhs=rhs,
        decay_margin=margin, notes=notes,
    )
