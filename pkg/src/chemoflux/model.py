"""Model parameters, the nonlinear coefficients of the cell equation and the
convex energy density ``Phi`` used by the Lyapunov diagnostics.

The cell density obeys

    u_t = div( (u+1)^(m-1) grad u - chi u (u+1)^(p-2) grad v + xi u (u+1)^(q-2) grad w )

and the energy density is the doubly integrated reciprocal of the attraction
sensitivity,

    Phi(s) = int_1^s int_1^sigma 1 / (eta (eta+1)^(p-2)) d eta d sigma.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import integrate

from .errors import QuadratureError

_POSITIVE = ("chi", "xi", "alpha", "beta", "gamma", "delta")


@dataclass(frozen=True)
class ModelParams:
    m: float
    p: float
    q: float
    chi: float
    xi: float
    alpha: float
    beta: float
    gamma: float
    delta: float
    n: int = 1

    def __post_init__(self):
        errors = self.violations()
        if errors:
            raise ValueError("; ".join(errors))

    def violations(self) -> list[str]:
        errors = []
        for name in _POSITIVE:
            value = getattr(self, name)
            if not (math.isfinite(value) and value > 0):
                errors.append(f"{name} must be > 0")
        for name in ("m", "p", "q"):
            if not math.isfinite(getattr(self, name)):
                errors.append(f"{name} must be finite")
        if self.n not in (1, 2):
            errors.append("n must be 1 or 2")
        return errors

    def replace(self, **changes) -> "ModelParams":
        fields = {k: getattr(self, k) for k in self.__dataclass_fields__}
        fields.update(changes)
        return ModelParams(**fields)

    def without_taxis(self) -> "ModelParams":
        """Copy with ``chi = xi = 0``: the pure diffusion reference model.

        Zero sensitivities lie outside the admissible parameter set, so this
        copy bypasses validation; use it for reference runs only.
        """
        out = ModelParams(**{k: getattr(self, k) for k in self.__dataclass_fields__})
        object.__setattr__(out, "chi", 0.0)
        object.__setattr__(out, "xi", 0.0)
        return out


def _power_of_shift(u, exponent):
    # (u+1)^e written as exp(e*log1p(u)); u+1 >= 1 so the log is always defined
    return np.exp(exponent * np.log1p(u))


def diffusivity(u_val, params: ModelParams):
    """``(u+1)^(m-1)``; works elementwise on arrays."""
    return _power_of_shift(u_val, params.m - 1.0)


def sensitivity(u_val, exponent):
    """Density factor ``u (u+1)^(exponent-2)`` shared by both taxis terms."""
    return u_val * _power_of_shift(u_val, exponent - 2.0)


def attract_sensitivity(u_val, params: ModelParams):
    return params.chi * sensitivity(u_val, params.p)


def repel_sensitivity(u_val, params: ModelParams):
    return params.xi * sensitivity(u_val, params.q)


def phi_second(s, p):
    """``Phi''(s) = 1 / (s (s+1)^(p-2))`` for ``s > 0``."""
    s = np.asarray(s, dtype=float)
    if np.any(s <= 0):
        raise ValueError("phi_second is only defined for s > 0")
    out = 1.0 / (s * _power_of_shift(s, p - 2.0))
    return out if out.ndim else float(out)


def _closed_form_order(p):
    """Return k = 2-p when it is a nonnegative integer, else None.

    For such p the integrand (eta+1)^k / eta expands binomially and both
    antiderivatives are elementary.
    """
    k = 2.0 - p
    if k >= 0 and float(k).is_integer() and k <= 16:
        return int(k)
    return None


def _xlogx(s):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        return np.where(s > 0, s * np.log(np.where(s > 0, s, 1.0)), 0.0)


def _phi_closed(s, k):
    s = np.asarray(s, dtype=float)
    # int_1^s (s - eta) / eta d eta
    out = _xlogx(s) - s + 1.0
    for j in range(1, k + 1):
        c = math.comb(k, j)
        # int_1^s (s - eta) eta^(j-1) d eta
        out = out + c * (s * (s**j - 1.0) / j - (s ** (j + 1) - 1.0) / (j + 1))
    return out


def _phi_prime_closed(s, k):
    s = np.asarray(s, dtype=float)
    with np.errstate(divide="ignore"):
        out = np.log(s)
    for j in range(1, k + 1):
        out = out + math.comb(k, j) * (s**j - 1.0) / j
    return out


def _quad(func, a, b, tol, what):
    value, abserr, info = integrate.quad(
        func, a, b, epsabs=tol, epsrel=1e-13, limit=500, full_output=True
    )[:3]
    if abserr > tol and abserr > 1e-13 * abs(value):
        raise QuadratureError(f"{what}: error estimate {abserr:.3e} exceeds tolerance {tol:.1e}")
    return value


def phi_scalar_quad(s: float, p: float, quad_tol: float = 1e-10) -> float:
    """Adaptive-quadrature value of ``Phi(s)``.

    The nested integral is rewritten with the repeated-integration formula
    ``Phi(s) = int_1^s (s - eta) Phi''(eta) d eta``; the factor ``(s - eta)``
    cancels the ``1/eta`` singularity at ``s = 0`` and keeps it integrable
    for ``0 < s < 1``.
    """
    s = float(s)
    if s < 0:
        raise ValueError("phi requires s >= 0")
    if s == 1.0:
        return 0.0
    if s == 0.0:
        return _quad(lambda e: _power_of_shift(e, 2.0 - p), 0.0, 1.0, quad_tol, "phi(0)")

    def integrand(e):
        return (e - s) / (e * _power_of_shift(e, p - 2.0))

    if s < 1.0:
        return _quad(integrand, s, 1.0, quad_tol, f"phi({s})")
    return -_quad(integrand, 1.0, s, quad_tol, f"phi({s})")


def phi_prime_scalar_quad(s: float, p: float, quad_tol: float = 1e-10) -> float:
    if s <= 0:
        raise ValueError("phi_prime requires s > 0")
    return _quad(lambda e: 1.0 / (e * _power_of_shift(e, p - 2.0)), 1.0, s, quad_tol, "phi'")


@dataclass(frozen=True)
class PhiEvaluator:
    """Vectorised evaluation of ``Phi`` for a fixed attraction exponent.

    ``method="auto"`` uses the elementary closed form whenever ``2 - p`` is a
    nonnegative integer (this includes ``p = 2`` where
    ``Phi(s) = s ln s - s + 1``) and adaptive quadrature otherwise;
    ``"quad"`` forces quadrature.
    """

    p: float
    quad_tol: float = 1e-10
    method: str = "auto"

    def __post_init__(self):
        if self.quad_tol <= 0:
            raise ValueError("quad_tol must be > 0")
        if self.method not in ("auto", "quad"):
            raise ValueError(f"unknown method {self.method!r}")

    @property
    def closed_form(self) -> bool:
        return self.method == "auto" and _closed_form_order(self.p) is not None

    def __call__(self, s):
        arr = np.asarray(s, dtype=float)
        if np.any(arr < 0) or not np.all(np.isfinite(arr)):
            raise ValueError("phi requires finite s >= 0")
        if self.closed_form:
            out = _phi_closed(arr, _closed_form_order(self.p))
            # exact zero at the minimum; guards against cancellation below 0
            out = np.maximum(out, 0.0)
        else:
            flat = [phi_scalar_quad(x, self.p, self.quad_tol) for x in arr.ravel()]
            out = np.maximum(np.array(flat).reshape(arr.shape), 0.0)
        return out if out.ndim else float(out)

    def prime(self, s):
        arr = np.asarray(s, dtype=float)
        if self.closed_form:
            out = _phi_prime_closed(arr, _closed_form_order(self.p))
        else:
            flat = [phi_prime_scalar_quad(x, self.p, self.quad_tol) for x in arr.ravel()]
            out = np.array(flat).reshape(arr.shape)
        return out if out.ndim else float(out)

    def second(self, s):
        return phi_second(s, self.p)


def phi(s, p, quad_tol: float = 1e-10):
    return PhiEvaluator(p, quad_tol)(s)
