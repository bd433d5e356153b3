"""End-to-end acceptance gates, one test per criterion.

Each test records a ``CRITERION n: PASS|FAIL ...`` line, shown in the pytest
terminal summary, before asserting.  Run alone with

    pytest tests/test_acceptance.py -v -s
"""

import io
import math
import time
from contextlib import redirect_stderr, redirect_stdout

import mpmath
import numpy as np
import pytest

from gaussdds import _kernels
from gaussdds.characters import TWISTS, QuadraticCharacter, UnitTwist, periodicity_violations, symbol, symbol_oracle
from gaussdds.cli import main
from gaussdds.ddseries import LCache, check_fe_nontrivial, check_fe_psi1, residue_s1, z_direct
from gaussdds.experiments import d_bound_experiment, moment_scan, sieve_bruteforce, sieve_matrix, sieve_ratios, sieve_test
from gaussdds.gaussian import ONE_PLUS_I, GaussianInt, primary_lattice, primary_squarefree
from gaussdds.lfunctions import ALT_SPEC, DEFAULT_SPEC, l_critical, zeta_k2, zeta_residue

from conftest import ACCEPTANCE_LINES
from oracles import odd_elements, oracle_symbol_matrix

U = UnitTwist
pytestmark = pytest.mark.acceptance


def report(n: int, ok: bool, detail: str, t0: float):
    line = f"CRITERION {n}: {'PASS' if ok else 'FAIL'} {detail} [{time.perf_counter() - t0:.1f}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def test_criterion_01_symbol_oracle():
    t0 = time.perf_counter()
    ar, ai = odd_elements(2000)
    t_fast = time.perf_counter()
    fast = _kernels.symbol_matrix(ar, ai, ar, ai)
    t_fast = time.perf_counter() - t_fast
    ref = oracle_symbol_matrix(ar, ai, ar, ai)
    mism = int(np.count_nonzero(fast != ref))
    # the scalar entry point on a random subsample of the same pairs
    rng = np.random.default_rng(2024)
    idx = rng.integers(0, ar.size, (2, 3000))
    scalar_mism = sum(symbol(GaussianInt(int(ar[j]), int(ai[j])), GaussianInt(int(ar[k]), int(ai[k])))
                      != symbol_oracle(GaussianInt(int(ar[j]), int(ai[j])), GaussianInt(int(ar[k]), int(ai[k])))
                      for j, k in idx.T)
    ok = mism == 0 and scalar_mism == 0 and t_fast < 60
    report(1, ok, f"pairs={ar.size ** 2} mismatches={mism} scalar_mismatches={scalar_mism} "
                  f"fast_time={t_fast:.2f}s", t0)


def test_criterion_02_reciprocity():
    t0 = time.perf_counter()
    mr, mi = primary_lattice(2000)
    S = _kernels.symbol_matrix(mr, mi, mr, mi)
    coprime = S != 0
    viol = int(np.count_nonzero((S != S.T) & coprime & coprime.T))
    report(2, viol == 0, f"coprime_pairs={int(coprime.sum())} violations={viol}", t0)


def test_criterion_03_conductor_periodicity():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    pool = primary_squarefree(10**4)
    picks = rng.choice(len(pool), 200, replace=False)
    re, im = primary_lattice(10**4)
    total = viol = 0
    for j in picks:
        d0 = pool[int(j)]
        modulus = ONE_PLUS_I ** 5 * d0
        for psi in TWISTS:
            chi = QuadraticCharacter(d0, psi)
            idx = rng.integers(0, re.size, 10**5)
            k = rng.integers(-3, 4, (2, 10**5))
            viol += periodicity_violations(chi, modulus, re[idx], im[idx], k[0], k[1])
            total += 10**5
    report(3, viol == 0, f"characters=800 tests={total} violations={viol}", t0)


def test_criterion_04_afe_h_stability():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    re, im = primary_lattice(5000)
    chars = []
    while len(chars) < 100:
        j = int(rng.integers(0, re.size))
        chi = QuadraticCharacter(GaussianInt(int(re[j]), int(im[j])), TWISTS[int(rng.integers(0, 4))])
        if not chi.is_principal:
            chars.append(chi)
    worst = 0.0
    for chi in chars:
        for t in (0.0, 1.0, 5.0):
            a = l_critical(chi, t, DEFAULT_SPEC).value
            b = l_critical(chi, t, ALT_SPEC).value
            worst = max(worst, abs(a - b) / max(abs(a), 1e-300))
    el = time.perf_counter() - t0
    ok = worst < 1e-8 and el < 300
    report(4, ok, f"characters=100 max_rel_dev={worst:.3e}", t0)


def test_criterion_05_dedekind_zeta():
    t0 = time.perf_counter()
    errs = []
    for s in (2, 3, 4):
        with mpmath.workdps(30):
            ref = complex(mpmath.zeta(s) * mpmath.dirichlet(s, [0, 1, 0, -1]) * (1 - mpmath.power(2, -s)))
        errs.append(abs(zeta_k2(s, 4 * 10**6, mode="direct") - ref))
    res = zeta_residue()
    rel = abs(res - math.pi / 8) / (math.pi / 8)
    ok = max(errs) < 1e-9 and rel < 0.01
    report(5, ok, f"max_abs_err={max(errs):.3e} residue={res:.8f} rel_err={rel:.2e}", t0)


def test_criterion_06_z_symmetry():
    t0 = time.perf_counter()
    worst = 0.0
    for psi in TWISTS:
        for psi2 in TWISTS:
            a = z_direct(1.5, 1.7, psi, psi2, 1000, 1000).value
            b = z_direct(1.7, 1.5, psi2, psi, 1000, 1000).value
            worst = max(worst, abs(a - b))
    report(6, worst < 1e-12, f"pairs=16 max_abs_diff={worst:.3e}", t0)


def test_criterion_07_functional_equations():
    t0 = time.perf_counter()
    cache = LCache()
    res = {}
    for psi in (U.PSI_I, U.PSI_1PI):
        res[f"fe_{psi.label}"] = check_fe_nontrivial(0.75, 4, psi, U.PSI_1, 400, cache)["residual"]
    res["fe_1@(0.75,4)"] = check_fe_psi1(0.75, 4, U.PSI_1, 400, cache)["residual"]
    res["fe_1@(0.6,5)"] = check_fe_psi1(0.6, 5, U.PSI_1, 400, cache)["residual"]
    r = residue_s1(3.0, U.PSI_1, 400, cache=cache)
    el = time.perf_counter() - t0
    ok = max(res.values()) < 1e-5 and r["rel_error"] < 0.02 and el < 600
    detail = " ".join(f"{k}={v:.2e}" for k, v in res.items())
    report(7, ok, f"{detail} residue_rel_err={r['rel_error']:.2e}", t0)


def test_criterion_08_second_moment():
    t0 = time.perf_counter()
    scan = moment_scan(2**14, t=0.0)
    el = time.perf_counter() - t0
    ok = 0.85 <= scan.slope <= 1.15 and el < 600
    report(8, ok, f"slope={scan.slope:.4f} (fit from X={scan.fit_from}) "
                  f"slope_after_log3_removal={scan.slope_log3:.4f}", t0)


def test_criterion_09_large_sieve():
    t0 = time.perf_counter()
    r = sieve_test(1024, 1024, trials=100, seed=1)
    S = sieve_matrix(64, 64)
    rng = np.random.default_rng(9)
    mism = 0
    for _ in range(5):
        a = rng.choice([-1.0, 1.0], size=S.shape[1])
        mism += sieve_ratios(S, a[:, None], 64, 64)[0] != sieve_bruteforce(64, 64, a)
    report(9, r <= 50 and mism == 0, f"max_ratio={r:.4f} bruteforce_mismatches={mism}", t0)


def test_criterion_10_d_bound():
    t0 = time.perf_counter()
    P_grid = [2.0 ** k for k in range(4, 11)]
    res = d_bound_experiment([0.0, 2.0, 4.0], [8.0, 16.0, 32.0], P_grid)
    el = time.perf_counter() - t0
    cr = res.crossover_ratios
    ok = (res.C_hat <= 100 and all(0.25 <= c <= 4 for c in cr) and res.conj_error < 1e-10 and el < 1800)
    report(10, ok, f"points={len(res.records)} skipped={len(res.skipped)} C_hat={res.C_hat:.4f} "
                   f"crossover_ratio_range=[{min(cr):.3f},{max(cr):.3f}] conj_error={res.conj_error:.2e}", t0)


SMALL_RUNS = {
    "symbol": ["--a", "0+1i", "--n", "-1-2i"],
    "lvalue": ["--d", "-1-2i", "--psi", "i", "--s", "0.5+2i"],
    "zvalue": ["--s", "0.75", "--w", "3", "--psi", "1+i", "--method", "via_l", "--truncation", "80"],
    "dsum": ["--t", "1", "--u", "4", "--P", "24"],
    "fe-check": ["--s", "0.75", "--w", "4", "--psi", "i", "--truncation", "100"],
    "residue-check": ["--w", "3", "--truncation", "100"],
    "moment-scan": ["--Xmax", "256"],
    "sieve-test": ["--M", "128", "--N", "128", "--trials", "10", "--seed", "7"],
    "d-bound": ["--t-grid", "0,1", "--u-grid", "4", "--P-grid", "8,16"],
    "majorant": ["--t", "1", "--u", "2", "--P", "10"],
    "exponent-fit": ["--points", "2:3,4:5.5,8:11.2,16:20"],
}


def test_criterion_11_determinism(tmp_path):
    t0 = time.perf_counter()
    bad = []
    for name, args in SMALL_RUNS.items():
        for fmt in ("csv", "json"):
            blobs = []
            for k, threads in enumerate((1, 1, 3)):
                path = tmp_path / f"{name}_{fmt}_{k}.out"
                with redirect_stdout(io.StringIO()), redirect_stderr(io.StringIO()):
                    code = main([name, *args, "--threads", str(threads), "--format", fmt,
                                 "--output-path", str(path)])
                blobs.append(path.read_bytes() if path.exists() else None)
                if code != 0:
                    bad.append(f"{name}:exit{code}")
            if blobs[0] is None or any(b != blobs[0] for b in blobs):
                bad.append(f"{name}:{fmt}")
    report(11, not bad, f"subcommands={len(SMALL_RUNS)} formats=2 runs=3 differing={bad or 'none'}", t0)
