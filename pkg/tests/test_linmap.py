import json
import warnings

import numpy as np
import pytest
from scipy import special as sp

from ispec.funcspace import GridFn, default_grid, integral, make_grid, norm
from ispec.linmap import (
    ReconstructionOptions,
    SpectralImage,
    cosine_basis,
    d0_rows,
    free_square,
    k_row_norms,
    kernel_probe,
    reconstruct,
    spectral_map,
    trial_basis,
)
from ispec.special import bessel_zeros
from ispec.spectral import Potential, dirichlet_spectrum

G = default_grid()
X = G.nodes


class TestSpectralImage:
    def test_free_ell0_is_zero(self):
        img = spectral_map((0, 1), None, 8)
        assert img.mean == 0.0
        assert np.max(np.abs(img.seq1)) <= 1e-7
        n = np.arange(1, 9)
        ref = bessel_zeros(1, 8) ** 2 - (n + 0.5) ** 2 * np.pi**2 + 2
        np.testing.assert_allclose(img.seq2, ref, atol=1e-6)

    def test_constant_shift(self):
        a = spectral_map((0, 2), None, 6)
        b = spectral_map((0, 2), Potential.constant(0.7), 6)
        assert b.mean == pytest.approx(0.7, abs=1e-14)
        np.testing.assert_allclose(b.seq1, a.seq1, atol=1e-7)
        np.testing.assert_allclose(b.seq2, a.seq2, atol=1e-7)
        np.testing.assert_allclose(b.vector(), a.shifted(0.7).vector(), atol=1e-7)

    def test_json_roundtrip(self):
        img = spectral_map((0, 1), Potential.from_callable(lambda x: 0.05 * np.cos(2 * np.pi * x)), 4)
        back = SpectralImage.from_json(json.loads(json.dumps(img.to_json())))
        np.testing.assert_array_equal(back.vector(), img.vector())
        assert back.pair == (0, 1) and back.N == 4

    def test_from_spectra(self):
        q = Potential.from_callable(lambda x: 0.2 + 0.05 * np.cos(2 * np.pi * x))
        s1 = dirichlet_spectrum(0, q, 6).to_json()
        s2 = dirichlet_spectrum(1, q, 6).to_json()
        img = SpectralImage.from_spectra(s1, s2, mean=0.2)
        np.testing.assert_allclose(img.vector(), spectral_map((0, 1), q, 6).vector(), atol=1e-7)
        est = SpectralImage.from_spectra(s1, s2)
        assert est.mean == pytest.approx(0.2, abs=1e-3)

    def test_validation(self):
        with pytest.raises(ValueError):
            SpectralImage((0, 0), 0.0, [1.0], [1.0])
        with pytest.raises(ValueError):
            SpectralImage((0, 1), 0.0, [1.0], [1.0, 2.0])
        with pytest.raises(ValueError):
            SpectralImage((0, 1), 0.0, [np.nan], [1.0])
        with pytest.raises(ValueError):
            spectral_map((0, 1), None, 0)


class TestDifferential:
    @pytest.mark.parametrize("ell", [0, 1, 3])
    def test_free_square_against_scipy(self, ell):
        j = bessel_zeros(ell, 4)
        got = free_square(ell, np.arange(1, 5), X)
        for n in range(4):
            ref = 2 * X * sp.jv(ell + 0.5, j[n] * X) ** 2 / sp.jv(ell + 1.5, j[n]) ** 2
            np.testing.assert_allclose(got[n], ref, atol=1e-12)
            assert float(G.weights @ got[n]) == pytest.approx(1.0, abs=1e-12)

    def test_row0_and_mean(self):
        op = d0_rows((0, 1), 5)
        np.testing.assert_array_equal(op.matrix[0], G.weights)
        assert op.apply(G.function(1.0))[0] == pytest.approx(1.0, abs=1e-14)
        # every other row annihilates constants
        assert np.max(np.abs(op.apply(G.function(1.0))[1:])) <= 1e-12

    def test_ell0_rows_are_cosines(self):
        op = d0_rows((0, 2), 6)
        for n in range(1, 7):
            np.testing.assert_allclose(op.matrix[n] / G.weights, -np.cos(2 * n * np.pi * X), atol=1e-13)
        assert np.max(np.abs(op.K[1:7])) <= 1e-13

    def test_split_exact(self):
        op = d0_rows((1, 2), 10)
        # (M - A) + A reproduces M up to one rounding
        assert np.max(np.abs(op.A + op.K - op.matrix)) <= 2 * np.finfo(float).eps * np.max(np.abs(op.matrix))
        np.testing.assert_array_equal(op.A[0], op.matrix[0])

    def test_grid_mismatch(self):
        op = d0_rows((0, 1), 3)
        with pytest.raises(ValueError):
            op.apply(GridFn(make_grid(8, 12, 1.0), np.zeros(96)))

    @pytest.mark.parametrize("seed", range(10))
    def test_jacobian_against_finite_differences(self, seed):
        rng = np.random.default_rng(seed)
        c = rng.normal(size=4)
        zeta = G.function(lambda x: c[0] + c[1] * np.cos(np.pi * x) + c[2] * x**2 + c[3] * np.sin(5 * x))
        pair, N, eps = (0, 1 + seed % 2), 6, 1e-5
        lin = d0_rows(pair, N).apply(zeta)
        fp = spectral_map(pair, Potential(eps * zeta), N).vector()
        fm = spectral_map(pair, Potential(-eps * zeta), N).vector()
        np.testing.assert_allclose(lin, (fp - fm) / (2 * eps), atol=1e-4)

    def test_k_rows_square_summable(self):
        k = k_row_norms(1, 60)
        n = np.arange(1, 61)
        assert np.all(k[30:] < 1e-4)  # increments of the partial sums beyond n = 30
        scaled = n**2 * k
        assert np.max(scaled[10:]) < 2 * np.min(scaled[10:])  # ||K_n||² ~ C / n²
        assert np.all(k_row_norms(0, 10) <= 1e-26)


class TestKernelProbe:
    @pytest.mark.parametrize("pair", [(0, 1), (0, 2)])
    def test_injective(self, pair):
        smin, dim = kernel_probe(pair, 40)
        assert dim == 0 and smin > 1e-3

    def test_higher_pair_stable(self):
        a = kernel_probe((0, 5), 20)[1]
        b = kernel_probe((0, 5), 40)[1]
        assert a == b

    def test_underdetermined_counts_missing_directions(self):
        smin, dim = kernel_probe((0, 1), 5, trial_dim=25)
        # row 0 (the mean) annihilates the mean-zero trial space, so only 10 rows see it
        assert smin == 0.0 and dim == 25 - 10

    def test_trial_basis_orthonormal(self):
        B = trial_basis(G, 10)
        gram = B.T @ (G.weights[:, None] * B)
        np.testing.assert_allclose(gram, np.eye(10), atol=1e-12)
        np.testing.assert_allclose(G.weights @ B, 0, atol=1e-13)

    def test_needs_enough_nodes(self):
        with pytest.raises(ValueError):
            kernel_probe((0, 1), 200, make_grid(4, 12, 1.0))


class TestReconstruction:
    def test_fixed_point(self):
        q, rep = reconstruct((0, 1), spectral_map((0, 1), None, 6))
        assert rep.misfit_history[-1] <= 1e-10 and rep.iterations == 0
        assert norm(q.values) == 0

    def test_round_trip_01(self):
        qs = Potential.from_callable(lambda x: 0.05 * np.cos(2 * np.pi * x))
        q, rep = reconstruct((0, 1), spectral_map((0, 1), qs, 12), ReconstructionOptions(q_true=qs))
        assert rep.q_error_if_known <= 5e-3
        assert np.all(np.diff(rep.misfit_history) < 0)
        json.dumps(rep.to_json())

    def test_round_trip_02(self):
        qs = Potential.from_callable(lambda x: 0.03 * (x - 0.5))
        q, rep = reconstruct((0, 2), spectral_map((0, 2), qs, 16), ReconstructionOptions(q_true=qs))
        assert rep.q_error_if_known <= 1e-2
        assert np.all(np.diff(rep.misfit_history) < 0)

    def test_shift_equivariance(self):
        qs = Potential.from_callable(lambda x: 0.05 * np.cos(2 * np.pi * x))
        target = spectral_map((0, 1), qs, 8)
        q0, _ = reconstruct((0, 1), target)
        q1, _ = reconstruct((0, 1), target.shifted(0.3))
        assert norm(q1.values - q0.values - 0.3) <= 2e-3

    def test_pair_mismatch(self):
        with pytest.raises(ValueError):
            reconstruct((0, 2), spectral_map((0, 1), None, 3))

    def test_far_target_warns(self):
        target = spectral_map((0, 1), None, 3).shifted(5.0)
        with warnings.catch_warnings(record=True) as rec:
            warnings.simplefilter("always")
            reconstruct((0, 1), target, ReconstructionOptions(max_iter=1))
        assert any("far from" in str(w.message) for w in rec)

    def test_cosine_basis(self):
        B = cosine_basis(G, 3)
        assert B.shape == (G.size, 4)
        np.testing.assert_array_equal(B[:, 0], 1.0)
