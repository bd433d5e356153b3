import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussdds.characters import QuadraticCharacter, UnitTwist
from gaussdds.ddseries import ConductorParams, LCache
from gaussdds.experiments import (
    EPS,
    ExperimentRecord,
    crossover_point,
    d_bound,
    d_bound_experiment,
    exponent_fit,
    majorant,
    majorant_compare,
    moment_scan,
    sieve_bruteforce,
    sieve_matrix,
    sieve_ratios,
    sieve_test,
)
from gaussdds.gaussian import GaussianInt, primary_squarefree
from gaussdds.lfunctions import l_critical, zeta_k2

U = UnitTwist


class TestRecord:
    def test_ratio(self):
        r = ExperimentRecord("x", {}, 3 + 4j, 10.0)
        assert r.ratio == 0.5

    def test_no_bound(self):
        assert math.isnan(ExperimentRecord("x", {}, 1.0, 0.0).ratio)


class TestExponentFit:
    def test_power_law(self):
        pts = [(x, 3.0 * x ** 1.25) for x in (2, 4, 8, 16)]
        slope, icpt = exponent_fit(pts)
        assert abs(slope - 1.25) < 1e-12 and abs(icpt - math.log(3)) < 1e-12

    @given(st.floats(-3, 3), st.floats(-5, 5))
    def test_recovers_slope(self, a, b):
        pts = [(x, math.exp(b) * x ** a) for x in (1.5, 10.0, 70.0, 300.0)]
        slope, _ = exponent_fit(pts)
        assert abs(slope - a) < 1e-9

    @pytest.mark.parametrize("pts", [[(1, 1), (2, 2)], [(1, 1), (2, -1), (3, 3)], [(2, 1), (2, 2), (2, 3)]])
    def test_rejects(self, pts):
        with pytest.raises(ValueError):
            exponent_fit(pts)


@pytest.fixture(scope="module")
def scan():
    return moment_scan(256, cache=LCache())


class TestMoments:
    def test_records(self, scan):
        m2 = [r for r in scan.records if r.experiment_id == "moment2"]
        assert [r.params["X"] for r in m2] == [64, 128, 256]
        assert scan.records[-1].experiment_id == "moment2_fit"

    def test_monotone(self, scan):
        m2 = [r.value.real for r in scan.records if r.experiment_id == "moment2"]
        m1 = [r.value.real for r in scan.records if r.experiment_id == "moment1"]
        assert m2 == sorted(m2) and m1 == sorted(m1)

    def test_cauchy_schwarz(self, scan):
        for r in scan.records:
            if r.experiment_id == "moment1":
                assert r.value.real <= r.bound * (1 + 1e-12)

    def test_first_point_by_hand(self, scan):
        tot = 0.0
        for m in primary_squarefree(64):
            chi = QuadraticCharacter(m)
            v = zeta_k2(0.5) if chi.is_principal else l_critical(chi, 0.0).value
            tot += abs(v) ** 2
        first = next(r for r in scan.records if r.experiment_id == "moment2")
        assert abs(first.value.real - tot) < 1e-9 * tot

    def test_small_xmax_rejected(self):
        with pytest.raises(ValueError):
            moment_scan(32)


class TestSieve:
    def test_matrix_orientation(self):
        S = sieve_matrix(20, 30)
        ms = primary_squarefree(20)
        ns = primary_squarefree(30)
        from gaussdds.characters import symbol
        assert S.shape == (len(ms), len(ns))
        assert S[3, 5] == symbol(ns[5], ms[3])

    def test_bruteforce_agreement(self):
        rng = np.random.default_rng(11)
        S = sieve_matrix(64, 64)
        a = rng.choice([-1.0, 1.0], size=S.shape[1])
        fast = sieve_ratios(S, a[:, None], 64, 64)[0]
        assert abs(fast - sieve_bruteforce(64, 64, a)) < 1e-12

    def test_single_coefficient(self):
        # a supported on n = 1 gives (number of square-free m) / (M + N)
        S = sieve_matrix(100, 100)
        a = np.zeros((S.shape[1], 1))
        a[0] = 1
        assert math.isclose(sieve_ratios(S, a, 100, 100)[0], len(primary_squarefree(100)) / 200)

    def test_deterministic(self):
        assert sieve_test(128, 128, 20, seed=3) == sieve_test(128, 128, 20, seed=3)

    def test_phase_scheme(self):
        assert 0 < sieve_test(128, 64, 20, scheme="phase") < 1

    def test_unknown_scheme(self):
        with pytest.raises(ValueError):
            sieve_test(64, 64, scheme="gauss")

    def test_coefficient_count(self):
        with pytest.raises(ValueError):
            sieve_bruteforce(16, 16, [1.0])


class TestDBound:
    def test_origin(self):
        cp = ConductorParams(0, 0)
        B, br = d_bound(cp, 1.0)
        expect = 0.25 ** EPS * min(1 + 0.25 ** 0.25, 0.25 ** 0.25 + 0.25 ** 0.25 * 0.5)
        assert math.isclose(B, expect) and br == 1

    @pytest.mark.parametrize("t, u", [(0, 3), (1, 10), (2, 50), (0.5, 200)])
    def test_crossover_near_prediction(self, t, u):
        cp = ConductorParams(u, t)
        P_star = cp.U ** (2 / 3) * cp.T ** (1 / 3)
        assert 0.5 < crossover_point(cp) / P_star < 2

    def test_branch_order(self):
        cp = ConductorParams(20, 1)
        assert d_bound(cp, 1.0)[1] == 0 and d_bound(cp, 1e6)[1] == 1

    def test_experiment_small(self):
        res = d_bound_experiment([0.0, 1.0], [2.0, 4.0], [4.0, 16.0], cache=LCache())
        assert res.conj_error < 1e-9
        assert len(res.records) + len(res.skipped) == 8
        assert all(0.5 < r < 2 for r in res.crossover_ratios)
        assert res.C_hat == max(r.ratio for r in res.records)

    def test_regime_violation(self):
        with pytest.raises(ValueError):
            d_bound_experiment([5.0], [0.0], [4.0])


class TestMajorant:
    def test_empty_window(self):
        assert majorant(0, 1, 0.5) == 0.0

    def test_monotone_in_ranges(self):
        base = majorant(1, 2, 10)
        assert majorant(1, 2, 10, m_scale=1.5) >= base
        assert majorant(1, 2, 10, contour_scale=1.5) > base

    @pytest.mark.parametrize("t, u, P", [(0, 1, 4), (1, 2, 10), (0.5, 3, 20), (2, 4, 40)])
    def test_dominates(self, t, u, P):
        rec = majorant_compare(t, u, P, cache=LCache())
        assert rec.ratio <= 20

    def test_twisted(self):
        rec = majorant_compare(1, 2, 10, U.PSI_I, U.PSI_1PI)
        assert rec.bound > 0 and rec.ratio <= 20
