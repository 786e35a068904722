import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from ispec.funcspace import default_grid, inner, norm
from ispec.special import bessel_zeros, phi_psi
from ispec.uniq import zeta_explicit
from ispec.xform import (
    OpTag,
    apply,
    identity_suite,
    ode_residual_S,
    ode_residual_Sadj,
    operator_matrix,
    t2_explicit,
)

G = default_grid()
X = G.nodes


def smooth(coeffs):
    return G.function(lambda x: sum(c * np.cos(k * np.pi * x + 0.3 * k) for k, c in enumerate(coeffs)))


coeffs = st.lists(st.floats(-2, 2), min_size=1, max_size=5)


class TestTags:
    def test_ranges(self):
        OpTag("T", 0)
        OpTag("S", 8)
        with pytest.raises(ValueError):
            OpTag("S", 0)
        with pytest.raises(ValueError):
            OpTag("S", 9)
        with pytest.raises(ValueError):
            OpTag("T2_explicit", 3)
        with pytest.raises(ValueError):
            OpTag("nope", 1)


class TestApply:
    def test_s1_on_identity(self):
        g = apply(("S", 1), G.function(lambda t: t))
        np.testing.assert_allclose(g.values, X * (1 + 4 * np.log(X)), atol=1e-10)

    def test_s2_against_quad(self):
        f = lambda t: np.exp(t) * np.cos(2 * t)  # noqa: E731
        g = apply(("S", 2), G.function(f))
        for x in (0.05, 0.3, 0.77):
            ref = f(x) - 8 * x**3 * quad(lambda t: t**-4 * f(t), x, 1, epsabs=1e-14)[0]
            assert g(x) == pytest.approx(ref, abs=1e-9)

    def test_s_adjoint_against_quad(self):
        f = lambda t: np.sin(5 * t) + t  # noqa: E731
        g = apply(("S_adj", 2), G.function(f))
        for x in (0.1, 0.5, 0.9):
            ref = f(x) - 8 * x**-4 * quad(lambda t: t**3 * f(t), 0, x, epsabs=1e-15)[0]
            assert g(x) == pytest.approx(ref, abs=1e-10)

    def test_t0_is_identity(self):
        f = smooth([1.0, -0.5, 0.2])
        for fam in ("T", "T_adj", "B"):
            np.testing.assert_array_equal(apply((fam, 0), f).values, f.values)

    @given(coeffs, st.integers(1, 4))
    @settings(max_examples=20, deadline=None)
    def test_inverse(self, c, ell):
        f = smooth(c)
        back = apply(("InvA", ell), apply(("S", ell), f))
        # L² norm: at the first nodes (x ~ 1e-9) x^(-2l-1) amplifies rounding to ~1e-9 pointwise
        assert norm(back - f) <= 1e-9 * (1 + norm(f))

    def test_matrix_matches_apply(self):
        f = smooth([0.3, 1.0, -0.7])
        M = operator_matrix(G, "T", 2)
        np.testing.assert_allclose(M @ f.values, apply(("T", 2), f).values, atol=1e-12)


class TestT2:
    def test_explicit_zeta(self):
        z = zeta_explicit(1.0).values
        diff = t2_explicit(z) - apply(("T", 2), z)
        assert norm(diff) <= 1e-9
        assert np.max(np.abs(diff.values[X > 1e-3])) <= 1e-9

    def test_zero(self):
        assert np.max(np.abs(t2_explicit(G.function(0.0)).values)) == 0.0

    def test_square(self):
        exact = -(X**2) - 12 * X * (1 - X) + 24 * X**3 * (1 / X - 1)
        got = t2_explicit(G.function(lambda t: t**2)).values
        np.testing.assert_allclose(got, exact, atol=1e-9)


class TestOdeResiduals:
    def test_cubic(self):
        assert ode_residual_S(1, G.function(lambda t: t**3)) <= 1e-7

    def test_sine(self):
        assert ode_residual_S(1, G.function(np.sin)) <= 1e-6

    def test_quintic_ell2(self):
        assert ode_residual_S(2, G.function(lambda t: t**5)) <= 1e-6

    def test_adjoint_quartic(self):
        f = G.function(lambda t: t**4)
        np.testing.assert_allclose(apply(("S_adj", 1), f).values, X**4 / 3, atol=1e-12)
        assert ode_residual_Sadj(1, f) <= 1e-6

    def test_adjoint_constant(self):
        f = G.function(2.0)
        np.testing.assert_allclose(apply(("S_adj", 1), f).values, -2.0, atol=1e-12)
        assert ode_residual_Sadj(1, f) <= 1e-8

    def test_adjoint_linear(self):
        f = G.function(lambda t: t)
        np.testing.assert_allclose(apply(("S_adj", 1), f).values, -X / 3, atol=1e-12)
        assert ode_residual_Sadj(1, f) <= 1e-8

    def test_unsupported(self):
        with pytest.raises(ValueError):
            ode_residual_S(3, G.function(1.0))
        with pytest.raises(ValueError):
            ode_residual_Sadj(2, G.function(1.0))


class TestIdentities:
    @given(coeffs, coeffs, st.integers(1, 4))
    @settings(max_examples=50, deadline=None)
    def test_adjointness(self, a, b, ell):
        f, g = smooth(a), smooth(b)
        assert abs(inner(apply(("S", ell), f), g) - inner(f, apply(("S_adj", ell), g))) <= 1e-10

    @given(coeffs, st.integers(1, 4))
    @settings(max_examples=25, deadline=None)
    def test_range_orthogonal_to_power(self, c, ell):
        f = smooth(c)
        assert abs(inner(G.function(lambda t: t ** (2 * ell)), apply(("S", ell), f))) <= 1e-10

    @given(coeffs, st.integers(1, 3), st.integers(1, 3))
    @settings(max_examples=20, deadline=None)
    def test_commutation(self, c, ell, m):
        f = smooth(c)
        a = apply(("S", ell), apply(("S", m), f))
        b = apply(("S", m), apply(("S", ell), f))
        assert norm(a - b) <= 1e-9

    @pytest.mark.parametrize("ell", range(1, 5))
    def test_kernel_of_t_adjoint(self, ell):
        for k in range(1, ell + 1):
            assert norm(apply(("T_adj", ell), G.function(lambda t: t ** (2 * k)))) <= 1e-9
        # x^(2 ell + 2) is not annihilated
        assert norm(apply(("T_adj", ell), G.function(lambda t: t ** (2 * ell + 2)))) > 1e-3

    @pytest.mark.parametrize("ell", range(1, 4))
    def test_index_reduction(self, ell):
        for z in (1.0, 5.0, float(bessel_zeros(ell, 3)[2])):
            lhs = phi_psi(ell, z * X)[0]
            rhs = -apply(("S_adj", ell), G.function(phi_psi(ell - 1, z * X)[0])).values
            assert np.max(np.abs(lhs - rhs)) <= 1e-9

    @given(coeffs, st.integers(1, 3), st.sampled_from([2.0, 7.3]))
    @settings(max_examples=30, deadline=None)
    def test_trig_transfer(self, c, ell, z):
        zeta = smooth(c)
        tz = apply(("T", ell), zeta)
        phi, psi = phi_psi(ell, z * X)
        lhs1 = inner(G.function(2 * phi - 1), zeta)
        rhs1 = inner(G.function(lambda t: np.cos(2 * z * t)), tz)
        lhs2 = inner(G.function(psi), zeta)
        rhs2 = -0.5 * inner(G.function(lambda t: np.sin(2 * z * t)), tz)
        assert abs(lhs1 - rhs1) <= 1e-9
        assert abs(lhs2 - rhs2) <= 1e-9

    def test_trig_transfer_sign_at_ell0(self):
        # with T_0 = identity the cosine transfer holds with the opposite sign
        zeta = smooth([0.4, 1.0, -0.3])
        z = 2.0
        lhs = inner(G.function(2 * phi_psi(0, z * X)[0] - 1), zeta)
        rhs = inner(G.function(lambda t: np.cos(2 * z * t)), zeta)
        assert lhs == pytest.approx(-rhs, abs=1e-13)

    @given(coeffs, st.integers(1, 4))
    @settings(max_examples=20, deadline=None)
    def test_b_inverts_t(self, c, ell):
        f = smooth(c)
        assert norm(apply(("B", ell), apply(("T", ell), f)) - f) <= 1e-8

    def test_suite_passes(self):
        for name, (val, tol) in identity_suite(samples=4).items():
            assert val <= tol, name
