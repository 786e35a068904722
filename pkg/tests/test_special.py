from fractions import Fraction

import mpmath as mp
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import special as sp

from ispec.special import (
    Order,
    a_polynomial,
    a_tilde_polynomial,
    bessel_half,
    bessel_half_prime,
    bessel_y_half,
    bessel_zero,
    bessel_zeros,
    hankel_half,
    phi_psi,
    pq_polynomials,
)


def frac(*vals):
    return [Fraction(v) for v in vals]


class TestPolynomials:
    def test_p2_q1(self):
        p, q = pq_polynomials(2)
        assert list(p.coeffs) == frac(-1, 0, 3)
        assert list(q.coeffs) == frac(0, 3)

    def test_p0_q_minus1(self):
        p, q = pq_polynomials(0)
        assert list(p.coeffs) == frac(1)
        assert q.degree == -1
        assert q.index == -1

    def test_p3_q2(self):
        p, q = pq_polynomials(3)
        assert list(p.coeffs) == frac(0, -6, 0, 15)
        assert list(q.coeffs) == frac(-1, 0, 15)

    @pytest.mark.parametrize("ell", range(1, 11))
    def test_three_term_recursions(self, ell):
        t = np.linspace(-2, 2, 9)
        pm, _ = pq_polynomials(ell - 1)
        p, q = pq_polynomials(ell)
        pp, qp = pq_polynomials(ell + 1)
        np.testing.assert_allclose(pp(t), (2 * ell + 1) * t * p(t) - pm(t), atol=1e-9)
        # pq_polynomials(ell) carries Q_{ell-1}; the Q recursion in its own index k = ell - 1
        _, qm = pq_polynomials(ell - 1)
        k = ell - 1
        np.testing.assert_allclose(qp(t), (2 * k + 3) * t * q(t) - qm(t), atol=1e-9)

    @pytest.mark.parametrize("ell", range(0, 9))
    def test_parity_and_degree(self, ell):
        p, q = pq_polynomials(ell)
        assert p.degree == ell
        for k, c in enumerate(p.coeffs):
            if (k - ell) % 2:
                assert c == 0
        for k, c in enumerate(q.coeffs):
            if (k - (ell - 1)) % 2:
                assert c == 0

    def test_a_polynomials(self):
        assert list(a_polynomial(0).coeffs) == frac(1)
        assert list(a_polynomial(1).coeffs) == [Fraction(1), Fraction(-1, 2)]
        assert list(a_polynomial(2).coeffs) == [Fraction(3), Fraction(-3, 2), Fraction(1, 4)]
        assert list(a_polynomial(3).coeffs) == [Fraction(15), Fraction(-15, 2), Fraction(3, 2), Fraction(-1, 8)]

    @pytest.mark.parametrize("ell", range(1, 8))
    def test_a_recursion(self, ell):
        t = np.linspace(-3, 3, 7)
        lhs = a_polynomial(ell + 1)(t)
        rhs = (2 * ell + 1) * a_polynomial(ell)(t) + t**2 / 4 * a_polynomial(ell - 1)(t)
        np.testing.assert_allclose(lhs, rhs, rtol=1e-12, atol=1e-12)

    @pytest.mark.parametrize("ell", range(0, 8))
    def test_a_tilde_parity(self, ell):
        c = a_tilde_polynomial(ell).numeric()
        for k, v in enumerate(c):
            if k % 2:
                assert v.real == 0
            else:
                assert v.imag == 0


class TestBessel:
    def test_half_order_at_pi_over_2(self):
        z = np.pi / 2
        assert bessel_half(0, "plus_nu", z) == pytest.approx(np.sqrt(2 / (np.pi * z)), rel=1e-14)

    def test_three_halves_at_one_against_mpmath(self):
        with mp.workdps(50):
            ref = float(mp.besselj(mp.mpf(3) / 2, 1))
        assert ref == pytest.approx(0.240297, abs=1e-6)
        assert bessel_half(1, "plus_nu", 1.0) == pytest.approx(ref, rel=1e-13)

    def test_small_argument_limit(self):
        for z in (1e-3, 1e-6, 1e-9):
            assert bessel_half(0, "plus_nu", z) / np.sqrt(z) == pytest.approx(np.sqrt(2 / np.pi), rel=1e-6)

    def test_minus_branch_pole_at_zero(self):
        with pytest.raises((ValueError, ZeroDivisionError)):
            bessel_half(1, "minus_nu", 0.0)

    @pytest.mark.parametrize("ell", range(0, 9))
    def test_closed_forms_against_scipy(self, ell):
        z = np.linspace(0.3, 60, 200)
        nu = ell + 0.5
        for branch, mu in (("plus_nu", nu), ("minus_nu", -nu)):
            ref = sp.jv(mu, z)
            got = bessel_half(ell, branch, z)
            assert np.all(np.abs(got - ref) <= 1e-11 * (1 + np.abs(ref)))
        np.testing.assert_allclose(bessel_y_half(ell, z), sp.yv(nu, z), rtol=1e-10, atol=1e-11)

    def test_complex_argument(self):
        z = np.array([2 + 1j, -3 + 0.5j, 0.5j])
        for ell in range(4):
            np.testing.assert_allclose(bessel_half(ell, "plus_nu", z), sp.jv(ell + 0.5, z), rtol=1e-11)

    def test_hankel(self):
        z = np.linspace(0.5, 10, 20)
        np.testing.assert_allclose(hankel_half(2, 1, z), sp.hankel1(2.5, z), rtol=1e-11)
        np.testing.assert_allclose(hankel_half(2, 2, z), sp.hankel2(2.5, z), rtol=1e-11)

    @pytest.mark.parametrize("ell", range(0, 5))
    def test_wronskian(self, ell):
        x = np.linspace(0.5, 30, 50)
        j, y = bessel_half(ell, "plus_nu", x), bessel_y_half(ell, x)
        w = j * bessel_half_prime(ell, x, "Y") - bessel_half_prime(ell, x, "J") * y
        np.testing.assert_allclose(w, 2 / (np.pi * x), rtol=1e-11)

    @given(st.integers(0, 8), st.floats(1e-4, 50.0))
    @settings(max_examples=60, deadline=None)
    def test_series_switch_continuity(self, ell, z):
        ref = sp.jv(ell + 0.5, z)
        assert abs(bessel_half(ell, "plus_nu", z) - ref) <= 1e-11 * (1 + abs(ref)) + 1e-300


class TestKernels:
    def test_phi0_psi0(self):
        x = np.linspace(0, 20, 101)
        phi, psi = phi_psi(0, x)
        np.testing.assert_allclose(phi, (1 - np.cos(2 * x)) / 2, atol=1e-14)
        np.testing.assert_allclose(psi, np.sin(2 * x) / 2, atol=1e-14)

    def test_phi2_at_zero(self):
        assert phi_psi(2, 0.0)[0] == 0.0

    @pytest.mark.parametrize("ell", range(0, 6))
    def test_against_scipy_and_nonnegative(self, ell):
        x = np.linspace(0.01, 40, 300)
        phi, psi = phi_psi(ell, x)
        nu = ell + 0.5
        np.testing.assert_allclose(phi, np.pi * x / 2 * sp.jv(nu, x) ** 2, atol=1e-12)
        np.testing.assert_allclose(psi, -np.pi * x / 2 * sp.jv(nu, x) * sp.yv(nu, x), atol=1e-11)
        assert np.all(phi >= 0)

    def test_negative_argument_rejected(self):
        with pytest.raises(ValueError):
            phi_psi(1, -0.5)


class TestZeros:
    def test_half_order_zeros(self):
        np.testing.assert_allclose(bessel_zeros(0, 20), np.pi * np.arange(1, 21), rtol=1e-15)

    def test_first_zero_three_halves(self):
        with mp.workdps(30):
            ref = float(mp.besseljzero(mp.mpf(3) / 2, 1))
        assert bessel_zero(1, 1) == pytest.approx(ref, rel=1e-15)
        assert ref == pytest.approx(4.493409, abs=1e-6)

    def test_five_halves_interlaced(self):
        v = bessel_zero(2, 1)
        assert abs(bessel_half(2, "plus_nu", v)) <= 1e-13
        assert bessel_zero(1, 1) < v < bessel_zero(1, 2)

    @pytest.mark.parametrize("ell", range(0, 5))
    def test_interlacing_and_residuals(self, ell):
        a = bessel_zeros(ell, 21)
        b = bessel_zeros(ell + 1, 20)
        assert np.all(a[:20] < b) and np.all(b < a[1:21])
        assert np.all(np.diff(a) > 0)
        assert np.max(np.abs(bessel_half(ell, "plus_nu", a))) <= 1e-13

    @pytest.mark.parametrize("n", [1, 7, 60, 250])
    def test_against_mpmath(self, n):
        with mp.workdps(30):
            ref = float(mp.besseljzero(mp.mpf(7) / 2, n))
        assert bessel_zero(3, n) == pytest.approx(ref, rel=1e-14)

    def test_invalid_index(self):
        with pytest.raises(ValueError):
            bessel_zero(0, 0)

    def test_order_type(self):
        assert Order(3).nu == 3.5
        with pytest.raises(ValueError):
            Order(-1)
