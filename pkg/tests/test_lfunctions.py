import math

import mpmath
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussdds.characters import TWISTS, QuadraticCharacter, UnitTwist, chi_eval
from gaussdds.gaussian import GaussianInt, enumerate_primary
from gaussdds.lfunctions import (
    ALT_SPEC,
    DEFAULT_SPEC,
    ContourSpec,
    euler_adjust,
    gamma_ratio,
    gfactor,
    kernel_table,
    kernel_value,
    l_continued,
    l_critical,
    l_direct,
    l_value,
    log_gamma,
    richardson,
    zeta_k2,
    zeta_residue,
)

from oracles import rational_twist_L

G = GaussianInt
U = UnitTwist
CHI5 = QuadraticCharacter(G(-1, -2))


def zeta_oracle(s):
    with mpmath.workdps(30):
        return complex(mpmath.zeta(s) * mpmath.dirichlet(s, [0, 1, 0, -1]) * (1 - mpmath.power(2, -s)))


def g_oracle(t, xi, c=1.0):
    """G_t(xi) by mpmath quadrature on Re z = 1/2."""
    with mpmath.workdps(25):
        a = mpmath.mpc(0.5, t)

        def f(y):
            z = mpmath.mpc(0.5, y)
            return mpmath.gamma(a + z) / mpmath.gamma(a) * (mpmath.pi * xi) ** (-z) * mpmath.exp(c * z * z) / z

        return complex(mpmath.quad(f, [-12, -4, 0, 4, 12]) / (2 * mpmath.pi))


class TestLogGamma:
    def test_examples(self):
        assert abs(log_gamma(1)) < 1e-15
        assert abs(log_gamma(0.5) - 0.5723649429247001) < 1e-14

    def test_pole(self):
        with pytest.raises(ValueError):
            log_gamma(-3)

    @given(st.floats(-30, 30), st.floats(-1e5, 1e5))
    def test_against_mpmath(self, x, y):
        s = complex(x, y)
        if abs(s) < 1e-3 or (abs(y) < 1e-9 and x <= 0):
            return
        ref = complex(mpmath.loggamma(mpmath.mpc(x, y)))
        got = log_gamma(s)
        assert abs(got - ref) <= 1e-12 * max(1.0, abs(ref))

    @pytest.mark.parametrize("s", [complex(3, 1e6), complex(-0.5, -2e5), complex(0.25, 7e5)])
    def test_large_height(self, s):
        ref = complex(mpmath.loggamma(mpmath.mpc(s.real, s.imag)))
        assert abs(log_gamma(s) - ref) <= 1e-12 * abs(ref)

    def test_stirling_constant(self):
        # |Gamma(s)| <= C |s|^(sigma-1/2) e^(-pi|t|/2) with C <= 3 once |Im s| >= 10;
        # lower heights need larger constants near the poles
        sig = np.linspace(-2, 4, 61)
        ts = np.concatenate([np.linspace(-50, -10, 81), np.linspace(10, 50, 81)])
        S = sig[:, None] + 1j * ts[None, :]
        lg = log_gamma(S)
        r = np.exp(lg.real) / (np.abs(S) ** (S.real - 0.5) * np.exp(-np.pi * np.abs(S.imag) / 2))
        assert r.max() <= 3
        lr = np.exp((log_gamma(1 - S) - lg).real) / (1 + np.abs(S)) ** (1 - 2 * S.real)
        assert lr.max() <= 3

    def test_gamma_ratio(self):
        assert abs(gamma_ratio(5, 3) - 12) < 1e-12


class TestContour:
    def test_edge(self):
        assert DEFAULT_SPEC.edge_size() < 1e-20

    def test_bad_spec(self):
        with pytest.raises(ValueError):
            ContourSpec(h_choice="gauss")

    @pytest.mark.parametrize("t", [0, 5])
    @pytest.mark.parametrize("xi", [0.1, 1, 10])
    def test_step_halving(self, t, xi):
        a = gfactor(t, xi, DEFAULT_SPEC)
        b = gfactor(t, xi, DEFAULT_SPEC.halved())
        assert abs(a - b) < 1e-10

    @pytest.mark.parametrize("t, xi", [(0, 1e-6), (0, 0.1), (0, 1.0), (0, 5.0), (0, 50.0), (5, 1.0), (-3, 2.0)])
    def test_against_mpmath(self, t, xi):
        assert abs(gfactor(t, xi) - g_oracle(t, xi)) < 1e-12

    def test_small_xi_residue(self):
        # G_0(xi) = 1 - 2 e^(1/4) sqrt(xi) + O(xi^(3/2)) from the poles at z = 0 and z = -1/2
        xi = 1e-6
        assert abs(gfactor(0, xi) - (1 - 2 * math.exp(0.25) * math.sqrt(xi))) < 1e-7

    def test_large_xi(self):
        assert abs(gfactor(0, 50)) < 1e-3
        assert abs(gfactor(0, 50)) < 2e-4

    def test_fixed_line_matches_adaptive_at_moderate_xi(self):
        assert abs(gfactor(2, 1.5, adaptive=False) - gfactor(2, 1.5)) < 1e-10

    def test_decay_shape(self):
        # |G_t(xi)| (1 + xi/(1+|t|))^3 stays bounded; measured suprema are 42.3, 15.3, 26.0, 35.0
        xs = np.geomspace(1e-3, 1e9, 1200)
        for t in (0, 2, 8, 20):
            g = np.abs(kernel_value(complex(0.5, t), xs))
            prod = g * (1 + xs / (1 + abs(t))) ** 3
            assert prod.max() <= 50
            # decay is faster than any power, so the product falls off at the far end
            assert prod[-1] < prod.max() / 100

    def test_table_interpolation(self):
        rng = np.random.default_rng(5)
        for a in [complex(0.5, 0), complex(0.5, 4), complex(0.25, 1)]:
            tab = kernel_table(a)
            x = rng.uniform(-8, 6, 40)
            direct = kernel_value(a, np.exp(x))
            assert np.max(np.abs(tab(x) - direct)) < 1e-10


class TestDirect:
    def test_trivial_s2(self):
        v = l_direct(QuadraticCharacter(G(1)), 2, 10**6)
        assert abs(v.value - zeta_oracle(2)) < 1e-4
        assert abs(v.value - 1.1300) < 1e-4

    def test_trivial_s4(self):
        v = l_direct(QuadraticCharacter(G(1)), 4, 10**4)
        assert abs(v.value - zeta_oracle(4)) < 1e-8

    def test_error_estimate_decreases(self):
        e = [l_direct(CHI5, 1.5, X).abs_error_estimate for X in (100, 1000, 10000)]
        assert e[0] > e[1] > e[2]

    def test_domain(self):
        with pytest.raises(ValueError):
            l_direct(CHI5, 1.0, 100)


class TestCritical:
    def test_principal_rejected(self):
        with pytest.raises(ValueError):
            l_critical(QuadraticCharacter(G(1)), 0.0)

    @pytest.mark.parametrize("m, two", [(-3, False), (5, False), (-7, True), (13, True), (-11, False)])
    @pytest.mark.parametrize("t", [0.0, 1.0, 5.0])
    def test_rational_oracle(self, m, two, t):
        # for rational m the series factors into two Dirichlet L-functions
        chi = QuadraticCharacter(G(m), U.PSI_I if two else U.PSI_1)
        ref = rational_twist_L(m, two, complex(0.5, t))
        assert abs(l_critical(chi, t).value - ref) < 1e-9

    @pytest.mark.parametrize("t", [0.0, 1.0, 5.0])
    def test_h_independence(self, t):
        a = l_critical(CHI5, t, DEFAULT_SPEC).value
        b = l_critical(CHI5, t, ALT_SPEC).value
        assert abs(a - b) <= 1e-8 * abs(a)

    @pytest.mark.parametrize("m", [G(-1, -2), G(3, 2), G(9), G(-3) * G(-1, 2)])
    @pytest.mark.parametrize("tw", list(TWISTS))
    def test_conjugation(self, m, tw):
        chi = QuadraticCharacter(m, tw)
        if chi.is_principal:
            return
        assert abs(l_critical(chi, -2.5).value - l_critical(chi, 2.5).value.conjugate()) < 1e-10

    def test_real_at_center(self):
        assert abs(l_critical(CHI5, 0.0).value.imag) < 1e-12

    def test_extended_precision_agrees(self):
        chi = QuadraticCharacter(G(-3))
        fast = l_critical(chi, 1.0).value
        ext = l_critical(chi, 1.0, precision="extended")
        assert ext.method == "afe_critical_extended"
        assert abs(ext.value - fast) < 1e-6

    def test_smoothed_partial_sum(self):
        # Abel-type smoothing sum chi(n) N(n)^-1/2 exp(-N(n)/Y) equals
        # L + sum_k (-1)^k/k! Y^-k L(1/2-k) over the poles of Gamma; with the
        # first correction subtracted the truncation error is of order Y^-2
        chi = QuadraticCharacter(G(-3))
        Y = 4000.0
        from gaussdds.gaussian import primary_lattice
        from gaussdds.characters import chi_eval_batch
        re, im = primary_lattice(int(40 * Y))
        v = chi_eval_batch(chi, re, im).astype(float)
        nrm = (re * re + im * im).astype(float)
        smooth = math.fsum(v * nrm ** -0.5 * np.exp(-nrm / Y))
        l_minus_half = rational_twist_L(-3, False, complex(-0.5, 0))
        approx = smooth + l_minus_half / Y
        assert abs(approx - l_critical(chi, 0.0).value) < 1e-6


class TestContinued:
    @pytest.mark.parametrize("s", [1.5, complex(1.5, 2), complex(1.2, -1), 2.0])
    def test_overlap_with_direct(self, s):
        cont = l_continued(CHI5, s)
        X = 10**6
        direct = l_direct(CHI5, s, X)
        # the direct tail with +-1 coefficients behaves like its rms size
        assert abs(cont.value - direct.value) < max(1e-8, 20 * X ** (0.5 - complex(s).real))

    def test_overlap_high_precision(self):
        # at Re s = 2 the direct sum is accurate enough for the 1e-8 gate
        s = complex(2, 0.5)
        assert abs(l_continued(CHI5, s).value - l_direct(CHI5, s, 4 * 10**6).value) < 1e-8

    def test_matches_critical(self):
        assert abs(l_continued(CHI5, 0.5).value - l_critical(CHI5, 0).value) < 1e-8

    def test_conjugate(self):
        s = complex(0.7, 3)
        assert abs(l_continued(CHI5, s).value - l_continued(CHI5, s.conjugate()).value.conjugate()) < 1e-10

    @pytest.mark.parametrize("m, two, s", [(-3, True, complex(0.3, 2)), (5, False, complex(1.7, -4)),
                                           (-7, False, complex(0.1, 0.5))])
    def test_rational_oracle(self, m, two, s):
        chi = QuadraticCharacter(G(m), U.PSI_I if two else U.PSI_1)
        assert abs(l_continued(chi, s).value - rational_twist_L(m, two, s)) < 1e-9

    def test_domain(self):
        with pytest.raises(ValueError):
            l_continued(CHI5, 2.5)
        with pytest.raises(ValueError):
            l_continued(QuadraticCharacter(G(1)), 0.7)

    def test_dispatch(self):
        assert l_value(CHI5, complex(0.5, 1)).method == "afe_critical"
        assert l_value(CHI5, 3.0).method == "afe"

    def test_non_squarefree_modulus(self):
        # m = 9 (-3)(-1-2i): L2 equals the square-free character's series with Euler factors at -3 removed
        m = G(9) * G(-1, -2)
        chi = QuadraticCharacter(m)
        s = complex(1.6, 0.3)
        base = l_continued(QuadraticCharacter(G(-1, -2)), s).value
        expect = base * (1 - chi_eval(QuadraticCharacter(G(-1, -2)), G(-3)) * 9 ** (-s))
        assert abs(l_continued(chi, s).value - expect) < 1e-10


class TestEulerAdjust:
    def test_squarefree(self):
        assert euler_adjust(G(-1, -2), 0.5) == 1

    def test_nine(self):
        s = complex(0.5, 2)
        psi = U.PSI_I
        val = chi_eval(QuadraticCharacter(G(1), psi), G(-3))
        assert abs(euler_adjust(G(9), s, psi) - (1 - val * 9 ** (-s))) < 1e-15

    @given(st.sampled_from(list(enumerate_primary(3000))), st.sampled_from(TWISTS), st.floats(0.1, 3))
    def test_triangle_bound(self, d, psi, sigma):
        from gaussdds.gaussian import factor, squarefree_decompose
        _, d1 = squarefree_decompose(d)
        bound = 1.0
        for p, _ in factor(d1).factors:
            bound *= 1 + p.norm() ** (-sigma)
        assert abs(euler_adjust(d, complex(sigma, 1), psi)) <= bound + 1e-12


class TestZeta:
    @pytest.mark.parametrize("s", [2, 3, 4])
    def test_direct_vs_factor_oracle(self, s):
        assert abs(zeta_k2(s, 4 * 10**6, mode="direct") - zeta_oracle(s)) < 1e-9

    def test_s2_value(self):
        assert abs(zeta_k2(2) - 1.1300) < 1e-4

    def test_residue(self):
        assert abs(zeta_residue() - math.pi / 8) < 0.01 * math.pi / 8

    def test_pole_and_modes(self):
        with pytest.raises(ValueError):
            zeta_k2(1)
        with pytest.raises(ValueError):
            zeta_k2(2, mode="direct")
        with pytest.raises(ValueError):
            zeta_k2(0.5, 100, mode="direct")

    def test_richardson_exact_on_polynomials(self):
        hs = [0.1, 0.05, 0.025]
        assert abs(richardson(hs, [3 + 2 * h - h * h for h in hs]) - 3) < 1e-12
