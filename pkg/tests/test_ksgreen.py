import math

import numpy as np
import pytest
import sympy as sy
from hypothesis import given, settings
from hypothesis import strategies as st
from numpy.polynomial import legendre as L
from scipy import integrate
from scipy import special as sp

from ispec.funcspace import GridFn, default_grid, integral
from ispec.ksgreen import (
    IllConditionedError,
    KSQuery,
    _green_coefficients,
    green_residual,
    green_sides,
    half_order_closed_form,
    ks_lhs,
    ks_residual,
    ks_rhs,
    ks_sweep,
    moment_functional,
    reduced_identity_limit,
    reduced_identity_residual,
    reduced_identity_sides,
)
from ispec.special import Order, bessel_zeros

G = default_grid()
X = G.nodes


def scipy_rhs(nu, x, Xc, z):
    return np.pi / (4 * sp.jv(nu, z)) * sp.jv(nu, x * z) * (sp.jv(nu, z) * sp.yv(nu, Xc * z) - sp.yv(nu, z) * sp.jv(nu, Xc * z))


def brute_half_order(x, Xc, z, n=2_000_000):
    """Direct sum of the nu = 1/2 series, which is sin(n pi x) sin(n pi X) / (sqrt(xX)(z² - n² pi²))."""
    k = np.arange(1, n + 1) * np.pi
    return np.sum(np.sin(k * x) * np.sin(k * Xc) / (z * z - k * k)) / math.sqrt(x * Xc)


class TestKneserSommerfeld:
    def test_half_order_example(self):
        q = KSQuery(0, 0.3, 0.7, 2.5)
        ref = half_order_closed_form(0.3, 0.7, 2.5)
        assert ks_residual(q) <= 1e-8
        assert abs(ks_lhs(q) - ref) <= 1e-8
        assert abs(brute_half_order(0.3, 0.7, 2.5) - ref) <= 1e-6

    @pytest.mark.parametrize("ell", [0, 1, 2])
    def test_rhs_matches_scipy(self, ell):
        for x, Xc, z in [(0.2, 0.9, 4.1), (0.5, 0.5, 1.7), (0.05, 0.3, 13.0)]:
            assert ks_rhs(ell, x, Xc, z) == pytest.approx(scipy_rhs(ell + 0.5, x, Xc, z), rel=1e-11)

    def test_x_zero(self):
        for ell in (0, 1, 2):
            q = KSQuery(ell, 0.0, 0.6, 3.3)
            assert ks_lhs(q) == 0.0 and ks_rhs(ell, 0.0, 0.6, 3.3) == 0.0

    def test_three_halves_self_convergence(self):
        a = ks_lhs(KSQuery(1, 0.5, 0.5, 1.7, n_terms=800))
        b = ks_lhs(KSQuery(1, 0.5, 0.5, 1.7, n_terms=1600))
        assert abs(a - b) < 1e-9
        assert ks_residual(KSQuery(1, 0.5, 0.5, 1.7, n_terms=800)) <= 1e-7

    @pytest.mark.parametrize("x,Xc,z,ell", [(0.1, 0.4, 6.0, 2), (0.35, 0.95, 9.5, 1), (0.7, 0.8, 0.9, 0)])
    def test_doubling_changes_little(self, x, Xc, z, ell):
        a = ks_lhs(KSQuery(ell, x, Xc, z, n_terms=400))
        b = ks_lhs(KSQuery(ell, x, Xc, z, n_terms=800))
        assert abs(a - b) < 1e-9

    def test_raw_truncation_is_slow(self):
        # on the diagonal the terms do not cancel and decay like 1/n²
        raw = ks_residual(KSQuery(1, 0.5, 0.5, 1.7, tail_mode="none"))
        comp = ks_residual(KSQuery(1, 0.5, 0.5, 1.7))
        assert 1e-6 < raw < 1e-2
        assert comp < raw / 100

    def test_complex_half_order(self):
        for z in (2 + 1j, -1.5 + 0.7j):
            q = KSQuery(0, 0.25, 0.6, z)
            ref = half_order_closed_form(0.25, 0.6, z)
            assert abs(ks_lhs(q) - ref) <= 1e-8
            assert abs(ks_rhs(0, 0.25, 0.6, z) - ref) <= 1e-12

    def test_guard(self):
        j = bessel_zeros(1, 2)[1]
        with pytest.raises(IllConditionedError):
            KSQuery(1, 0.2, 0.4, j + 1e-4)
        with pytest.raises(ValueError):
            KSQuery(0, 0.6, 0.4, 1.0)

    def test_sweep(self):
        rows = ks_sweep(12, seed=3)
        assert max(r["residual"] for r in rows) <= 1e-7
        assert max(r["closed_form_gap"] for r in rows if r["ell"] == 0) <= 1e-10

    @given(st.floats(0.02, 0.98), st.floats(0.02, 0.98), st.floats(0.3, 25.0))
    @settings(max_examples=20, deadline=None)
    def test_half_order_closed_form_property(self, a, b, z):
        x, Xc = min(a, b), max(a, b)
        if abs(math.sin(z)) < 1e-2:
            return
        ref = scipy_rhs(0.5, x, Xc, z)
        assert abs(half_order_closed_form(x, Xc, z) - ref) <= 1e-10 * max(1.0, abs(ref))


def projected_zeta(ell, N):
    """A smooth function with vanishing first N Green coefficients and zero mean."""
    order = Order.coerce(ell)
    j = bessel_zeros(ell, N)
    z0 = np.exp(X) * np.sin(3 * X)
    B = np.stack([L.legval(2 * X - 1, np.eye(N + 1)[k]) for k in range(N + 1)], 1)
    C = np.array([_green_coefficients(order, GridFn(G, B[:, k]), j) for k in range(N + 1)]).T
    C = np.vstack([C, (G.weights @ B)[None, :]])
    rhs = np.concatenate([_green_coefficients(order, GridFn(G, z0), j), [G.weights @ z0]])
    return GridFn(G, z0 - B @ np.linalg.solve(C, rhs))


class TestGreen:
    def test_coefficient_against_quad(self):
        zeta = G.function(lambda x: 1 + x**2)
        j = bessel_zeros(1, 3)
        c = _green_coefficients(Order.coerce(1), zeta, j)
        for n in range(3):
            ref = integrate.quad(lambda x: x * (1 + x**2) * sp.jv(1.5, j[n] * x) ** 2, 0, 1, epsabs=1e-14)[0]
            assert c[n] == pytest.approx(ref, rel=1e-11)

    @pytest.mark.parametrize("ell", [0, 1, 2])
    @pytest.mark.parametrize("z", [0.8, 2.3, 7.1])
    def test_residual(self, ell, z):
        zeta = G.function(lambda x: np.cos(2 * x) + x**3)
        assert green_residual(ell, zeta, z) <= 1e-7

    def test_rhs_against_quad(self):
        zeta = G.function(lambda x: np.cos(2 * x) + x**3)
        _, rhs = green_sides(1, zeta, 2.3)
        ref = integrate.quad(lambda x: x * (np.cos(2 * x) + x**3) * scipy_rhs(1.5, x, x, 2.3) * 1, 0, 1, epsabs=1e-13)[0]
        assert rhs == pytest.approx(ref, rel=1e-9)

    def test_complex_z(self):
        zeta = G.function(lambda x: 1 - x)
        assert green_residual(0, zeta, 2 + 1j) <= 1e-7

    @pytest.mark.parametrize("ell", [0, 1])
    def test_projection_example(self, ell):
        zeta = projected_zeta(ell, 20)
        lhs, rhs = green_sides(ell, zeta, 2.3)
        assert abs(lhs) <= 1e-6 and abs(rhs) <= 1e-6

    def test_zero(self):
        lhs, rhs = green_sides(0, G.function(0.0), 1.1)
        assert lhs == 0 and rhs == 0


class TestMoment:
    def test_constant_half_order(self):
        m, _ = moment_functional(0, G.function(1.0))
        assert m == pytest.approx(1 / 6, abs=1e-14)

    @pytest.mark.parametrize("ell", [0, 1, 2])
    def test_constructed_root(self, ell):
        t = sy.symbols("t")
        nu = sy.Rational(2 * ell + 1, 2)
        w = t * (1 - t ** (2 * nu))
        c = float(sy.integrate(w * t ** (2 * nu), (t, 0, 1)) / sy.integrate(w, (t, 0, 1)))
        m, _ = moment_functional(ell, G.function(lambda x: x ** (2 * ell + 1) - c))
        assert abs(m) <= 1e-12

    @pytest.mark.parametrize("seed", range(10))
    def test_small_z_limit(self, seed):
        rng = np.random.default_rng(seed)
        c = rng.normal(size=4)
        zeta = G.function(lambda x: 1.0 + 0.3 * (c[0] + c[1] * x + c[2] * np.cos(3 * x) + c[3] * x**4))
        ell = seed % 3
        m, g2 = moment_functional(ell, zeta, 1e-2)
        _, g3 = moment_functional(ell, zeta, 1e-3)
        assert abs(g2 / m - 1) < 1e-2
        assert abs(g3 / m - 1) < 1e-2
        # O(z²) approach: the gap shrinks by roughly 100 from 1e-2 to 1e-3
        assert abs(g3 - m) < abs(g2 - m) / 20 + 1e-12


class TestReducedIdentity:
    def test_ell1_example(self, rng):
        v = rng.normal(size=5)
        zeta = G.function(lambda x: sum(v[k] * np.cos((k + 1) * np.pi * x) for k in range(5)))
        assert abs(float(integral(zeta))) < 1e-12
        assert reduced_identity_residual(1, zeta, 3.2) <= 1e-8

    @pytest.mark.parametrize("ell", [2, 3])
    @pytest.mark.parametrize("z", [0.7, 5.5, 2 + 0.5j])
    def test_higher_orders(self, ell, z):
        zeta = G.function(lambda x: np.cos(np.pi * x) + 0.5 * np.cos(4 * np.pi * x) + x - 0.5)
        d, b = reduced_identity_sides(ell, zeta, z)
        assert abs(d - b) <= 1e-8 * max(1.0, abs(d))

    def test_ell0_reduces_to_cosine_transform(self):
        f = lambda x: np.cos(np.pi * x) + x**2 - 1 / 3
        zeta = G.function(f)
        d, b = reduced_identity_sides(0, zeta, 2.7)
        ref = integrate.quad(lambda x: f(x) * np.cos(2.7 * (2 * x - 1)), 0, 1, epsabs=1e-14)[0]
        assert d == pytest.approx(ref, abs=1e-13)
        assert abs(d - b) <= 1e-12

    @pytest.mark.parametrize("ell", [1, 2, 3])
    def test_small_z_limit(self, ell):
        zeta = G.function(lambda x: np.cos(np.pi * x) + 0.2 * np.cos(3 * np.pi * x))
        scaled, limit = reduced_identity_limit(ell, zeta, 1e-4)
        assert abs(limit) < 1e-10
        assert abs(scaled - limit) < 1e-3
