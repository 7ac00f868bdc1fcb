import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from chemoflux.errors import QuadratureError
from chemoflux.model import (
    ModelParams,
    PhiEvaluator,
    attract_sensitivity,
    diffusivity,
    phi,
    phi_second,
    repel_sensitivity,
)

from conftest import make_params


def nested_phi(s, p):
    # independent oracle: the double integral evaluated directly
    inner = lambda sig: integrate.quad(lambda e: 1.0 / (e * (e + 1.0) ** (p - 2.0)), 1.0, sig,
                                       epsabs=1e-13, epsrel=1e-13, limit=200)[0]
    return integrate.quad(inner, 1.0, s, epsabs=1e-12, epsrel=1e-12, limit=200)[0]


class TestParams:
    def test_rejects_nonpositive_coefficients(self):
        with pytest.raises(ValueError, match="chi must be > 0"):
            make_params(chi=-1.0)

    def test_lists_every_violation(self):
        with pytest.raises(ValueError) as exc:
            make_params(alpha=0.0, delta=-2.0)
        assert "alpha must be > 0" in str(exc.value)
        assert "delta must be > 0" in str(exc.value)

    def test_rejects_bad_dimension(self):
        with pytest.raises(ValueError, match="n must be 1 or 2"):
            make_params(n=3)

    def test_replace_revalidates(self):
        p = make_params()
        assert p.replace(chi=2.0).chi == 2.0
        with pytest.raises(ValueError):
            p.replace(xi=0.0)

    def test_without_taxis(self):
        p = make_params(chi=3.0).without_taxis()
        assert p.chi == 0.0 and p.xi == 0.0 and p.alpha == 1.0


class TestCoefficients:
    def test_diffusivity_examples(self):
        assert diffusivity(0.0, make_params(m=1.0)) == 1.0
        assert diffusivity(1.0, make_params(m=2.0)) == pytest.approx(2.0, rel=1e-15)
        assert diffusivity(3.0, make_params(m=0.5)) == pytest.approx(0.5, rel=1e-15)

    def test_attract_examples(self):
        assert attract_sensitivity(0.0, make_params(p=5.0, chi=7.0)) == 0.0
        assert attract_sensitivity(1.0, make_params(p=2.0, chi=1.0)) == pytest.approx(1.0)
        assert attract_sensitivity(2.0, make_params(p=3.0, chi=0.5)) == pytest.approx(3.0, rel=1e-14)

    def test_repel_examples(self):
        assert repel_sensitivity(0.0, make_params(q=-1.0, xi=3.0)) == 0.0
        assert repel_sensitivity(1.0, make_params(q=2.0, xi=1.0)) == pytest.approx(1.0)
        assert repel_sensitivity(3.0, make_params(q=1.0, xi=2.0)) == pytest.approx(1.5, rel=1e-14)

    def test_arrays_match_scalars(self):
        params = make_params(m=1.7, p=2.5, q=0.3)
        u = np.linspace(0, 5, 11)
        np.testing.assert_allclose(diffusivity(u, params), (u + 1) ** 0.7, rtol=1e-14)
        np.testing.assert_allclose(attract_sensitivity(u, params), u * (u + 1) ** 0.5, rtol=1e-14)
        np.testing.assert_allclose(repel_sensitivity(u, params), u * (u + 1) ** -1.7, rtol=1e-14)

    @settings(max_examples=50, deadline=None)
    @given(u=st.floats(0, 100), e=st.floats(-3, 3))
    def test_continuity(self, u, e):
        params = make_params(m=e, p=e, q=e)
        h = 1e-9
        for f in (diffusivity, attract_sensitivity, repel_sensitivity):
            assert abs(f(u + h, params) - f(u, params)) < 1e-6

    @settings(max_examples=50, deadline=None)
    @given(u=st.floats(0, 1e3), m=st.floats(-3, 3))
    def test_diffusivity_positive(self, u, m):
        assert diffusivity(u, make_params(m=m)) > 0


class TestPhiSecond:
    def test_examples(self):
        assert phi_second(1.0, 2.0) == 1.0
        assert phi_second(1.0, 3.0) == pytest.approx(0.5)
        assert phi_second(2.0, 2.0) == pytest.approx(0.5)

    @pytest.mark.parametrize("s", [0.0, -1.0])
    def test_domain(self, s):
        with pytest.raises(ValueError):
            phi_second(s, 2.0)


class TestPhi:
    @pytest.mark.parametrize("p", [-1.0, 0.0, 0.5, 1.0, 2.0, 2.7, 3.0])
    def test_zero_at_one(self, p):
        assert phi(1.0, p) == 0.0

    def test_p2_examples(self):
        assert phi(2.0, 2.0) == pytest.approx(2 * math.log(2) - 1, abs=1e-12)
        assert phi(0.0, 2.0) == pytest.approx(1.0, abs=1e-12)

    def test_p2_zero_by_quadrature_limit(self):
        # the quadrature path near s = 0 approaches the continuous extension
        ev = PhiEvaluator(2.0, method="quad")
        assert ev(1e-12) == pytest.approx(1.0, abs=1e-10)
        assert ev(0.0) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("p", [0.0, 1.0, 1.5, 2.0, 2.5, 3.0])
    @pytest.mark.parametrize("s", [0.01, 0.5, 2.0, 7.0])
    def test_against_nested_integral(self, p, s):
        assert phi(s, p) == pytest.approx(nested_phi(s, p), rel=1e-8, abs=1e-10)

    def test_closed_form_matches_quadrature(self):
        s = np.geomspace(1e-3, 1e3, 25)
        for p in (2.0, 1.0, 0.0):
            closed = PhiEvaluator(p)
            assert closed.closed_form
            quad = PhiEvaluator(p, quad_tol=1e-10, method="quad")
            np.testing.assert_allclose(closed(s), quad(s), rtol=1e-10, atol=1e-10)

    def test_p2_closed_form_formula(self):
        s = np.geomspace(1e-3, 1e3, 40)
        np.testing.assert_allclose(phi(s, 2.0), s * np.log(s) - s + 1, rtol=1e-12, atol=1e-14)

    @pytest.mark.parametrize("p", [0.5, 1.0, 2.0, 2.5, 3.0])
    def test_nonnegative_on_log_grid(self, p):
        s = np.geomspace(1e-6, 1e3, 60)
        values = phi(s, p)
        assert np.all(values >= 0)
        assert np.all(values[np.abs(s - 1) > 1e-3] > 0)

    @pytest.mark.parametrize("p", [1.0, 2.0, 3.0])
    @pytest.mark.parametrize("s", [0.5, 1.0, 2.0, 10.0])
    def test_second_difference_matches_phi_second(self, p, s):
        h = 1e-4
        ev = PhiEvaluator(p, quad_tol=1e-13)
        d2 = (ev(s + h) - 2 * ev(s) + ev(s - h)) / h**2
        assert abs(d2 - phi_second(s, p)) <= 1e-4 * phi_second(s, p)

    def test_prime_matches_inner_integral(self):
        ev = PhiEvaluator(2.5)
        for s in (0.3, 1.0, 4.0):
            inner = integrate.quad(lambda e: 1.0 / (e * (e + 1.0) ** 0.5), 1.0, s, epsabs=1e-13)[0]
            assert ev.prime(s) == pytest.approx(inner, rel=1e-9, abs=1e-12)

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            phi(-0.1, 2.0)

    def test_quadrature_failure_is_reported(self, monkeypatch):
        import chemoflux.model as model

        monkeypatch.setattr(model.integrate, "quad", lambda *a, **k: (0.3, 1e-3, {}, "budget"))
        with pytest.raises(QuadratureError, match="exceeds tolerance"):
            PhiEvaluator(2.5, method="quad")(3.0)
