import cmath
import json
import math

import numpy as np
import pytest
from scipy import special as sp

from ispec.special import bessel_zeros
from ispec.spectral import Potential, endpoint_value
from ispec.scatter import (
    WRONSKIAN,
    hadamard_check,
    jost_match,
    jost_solutions,
    matched_partner,
    phi0_reference,
    sigma_gap,
)

Q_SMOOTH = Potential.from_callable(lambda x: 0.3 * x * (1 - x) + 0.1 * np.cos(2 * np.pi * x))


class TestFreeRegularSolution:
    @pytest.mark.parametrize("lam", [0.3, 7.0, 120.0, -9.0, 4 + 3j, -0.5 + 0.2j])
    def test_half_order_sinc(self, lam):
        k = cmath.sqrt(lam)
        assert abs(phi0_reference(0, lam) - cmath.sin(k) / k) <= 1e-13 * max(1, abs(cmath.sin(k) / k))

    @pytest.mark.parametrize("ell", [1, 2, 4])
    def test_against_scipy(self, ell):
        nu = ell + 0.5
        for lam in (0.5, 3.0, 40.0, -6.0 + 1j):
            k = np.sqrt(complex(lam))
            ref = 2**nu * sp.gamma(nu + 1) * k ** (-nu) * sp.jv(nu, k)
            assert abs(phi0_reference(ell, lam) - ref) <= 1e-12 * max(1.0, abs(ref))

    @pytest.mark.parametrize("ell", [0, 1, 3])
    def test_vanishes_at_eigenvalues(self, ell):
        for j in bessel_zeros(ell, 6):
            assert abs(phi0_reference(ell, j * j)) <= 1e-10

    def test_origin(self):
        assert phi0_reference(0, 0.0) == 1.0
        assert abs(phi0_reference(0, 1e-8) - 1) < 1e-8
        # the series and the closed form agree across |lambda| = 1
        assert abs(phi0_reference(2, 1.0) - phi0_reference(2, 1.0 + 1e-12)) < 1e-11

    def test_matches_solver(self):
        for lam in (2.0, 55.0):
            assert endpoint_value(1, lam)[0] == pytest.approx(phi0_reference(1, lam).real, rel=1e-9)


class TestHadamard:
    def test_sine_product(self):
        ev = (np.arange(1, 501) * np.pi) ** 2
        assert hadamard_check(0, None, lam=-4.0, N_prod=500, eigenvalues=ev) <= 1e-6
        assert hadamard_check(0, None, lam=30.0, N_prod=500, eigenvalues=ev) <= 1e-6

    def test_three_halves_with_solver(self):
        assert hadamard_check(1, None, lam=-4.0, N_prod=200) <= 1e-4

    def test_potential(self):
        assert hadamard_check(0, Q_SMOOTH, lam=-4.0, N_prod=200) <= 1e-4

    def test_calibration_insensitive(self):
        ev = bessel_zeros(1, 200) ** 2
        res = [hadamard_check(1, None, lam=5.0, N_prod=200, lam_ref=r, tail=False, eigenvalues=ev) for r in (-1.0, -2.0, -5.0)]
        assert max(res) < 2 * min(res)
        assert hadamard_check(1, None, lam=5.0, N_prod=200, eigenvalues=ev) < min(res) / 100

    def test_tail_compensation_helps(self):
        ev = (np.arange(1, 51) * np.pi) ** 2
        raw = hadamard_check(0, None, -4.0, 50, tail=False, eigenvalues=ev)
        comp = hadamard_check(0, None, -4.0, 50, eigenvalues=ev)
        assert comp < raw / 1000

    def test_near_eigenvalue(self):
        ev = (np.arange(1, 21) * np.pi) ** 2
        with pytest.raises(ValueError):
            hadamard_check(0, None, lam=np.pi**2 * (1 + 1e-9), N_prod=20, eigenvalues=ev)

    def test_matched_partner_ratios(self):
        # two potentials sharing the first N eigenvalues give nearly the same calibrated ratio
        def ratio(q):
            return endpoint_value(0, -4.0, q)[0] / endpoint_value(0, -1.0, q)[0]

        gaps = [abs(ratio(matched_partner(Q_SMOOTH, N)) - ratio(Q_SMOOTH)) for N in (3, 8)]
        assert gaps[1] < gaps[0] and gaps[1] < 1e-4


class TestJost:
    @pytest.mark.parametrize("ell", [0, 1, 2, 5])
    def test_solutions_against_scipy(self, ell):
        nu = ell + 0.5
        fp, dfp, fm, dfm = jost_solutions(ell, 1.7)
        th = (nu + 0.5) * np.pi / 2
        ref = np.exp(1j * th) * np.sqrt(np.pi * 1.7 / 2) * sp.hankel1(nu, 1.7)
        assert abs(fp - ref) <= 1e-12 * abs(ref)
        assert abs(fm - np.conj(ref)) <= 1e-12 * abs(ref)
        h = 1e-6
        num = (jost_solutions(ell, 1.7 + h)[0] - jost_solutions(ell, 1.7 - h)[0]) / (2 * h)
        assert abs(dfp - num) <= 1e-7 * abs(dfp)

    def test_plane_wave_asymptotics(self):
        fp, _, fm, _ = jost_solutions(2, 400.0)
        assert abs(fp - cmath.exp(400j)) < 1e-2
        assert abs(fm - cmath.exp(-400j)) < 1e-2

    @pytest.mark.parametrize("ell", [0, 1, 2, 3])
    def test_wronskian(self, ell):
        for r in (0.5, 1.0, 3.0):
            fp, dfp, fm, dfm = jost_solutions(ell, r)
            assert abs(fp * dfm - dfp * fm - WRONSKIAN) <= 1e-12
        assert jost_match(ell).wronskian_check <= 1e-12

    @pytest.mark.parametrize("ell", [0, 1, 2])
    def test_free_sigma(self, ell):
        d = jost_match(ell)
        assert abs(d.sigma - 1) <= 1e-10
        # phi = c sqrt(r) J_nu(r) with J = (H1 + H2)/2 gives alpha = c exp(-i theta) / (2 sqrt(pi/2))
        nu = ell + 0.5
        c = 2**nu * math.gamma(nu + 1)
        th = (nu + 0.5) * np.pi / 2
        assert abs(d.alpha - c * np.exp(-1j * th) / (2 * math.sqrt(np.pi / 2))) <= 1e-10 * abs(d.alpha)

    @pytest.mark.parametrize("seed", range(10))
    def test_unimodular_and_conjugate(self, seed):
        rng = np.random.default_rng(seed)
        a = rng.normal(size=3)
        q = Potential.from_callable(lambda x: a[0] + 2 * a[1] * np.cos(np.pi * x) + a[2] * x**2)
        d = jost_match(seed % 3, q)
        assert abs(abs(d.sigma) - 1) <= 1e-8
        assert abs(d.beta - np.conj(d.alpha)) <= 1e-10 * abs(d.alpha)
        assert abs(d.alpha) > 0

    def test_json(self):
        doc = jost_match(1, Q_SMOOTH).to_json()
        json.dumps(doc)
        assert set(doc) == {"ell", "alpha_re", "alpha_im", "sigma_re", "sigma_im", "wronskian_check"}

    def test_sigma_gap_decreases(self):
        rows = sigma_gap(Q_SMOOTH, Ns=(3, 5, 10))
        gaps = [r[1] for r in rows]
        assert gaps[0] > gaps[1] > gaps[2]
        assert gaps[2] < 1e-3
        assert rows[2][2] < rows[0][2]


class TestMatchedPartner:
    def test_shares_eigenvalues(self):
        from ispec.spectral import dirichlet_spectrum

        p = matched_partner(Q_SMOOTH, 6)
        np.testing.assert_allclose(
            dirichlet_spectrum(0, p, 6).eigenvalues, dirichlet_spectrum(0, Q_SMOOTH, 6).eigenvalues, atol=1e-9
        )
