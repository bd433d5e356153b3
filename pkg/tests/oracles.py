"""Independent reference computations used by several test modules."""

from __future__ import annotations

import mpmath
import numpy as np

from gaussdds.characters import euler_symbol_table, jacobi
from gaussdds.gaussian import GaussianInt, factor


def odd_elements(X: int) -> tuple[np.ndarray, np.ndarray]:
    """All odd a+bi with norm <= X, sorted by (norm, re, im)."""
    r = int(X ** 0.5) + 1
    a, b = np.meshgrid(np.arange(-r, r + 1), np.arange(-r, r + 1), indexing="ij")
    a, b = a.ravel(), b.ravel()
    keep = ((a * a + b * b) <= X) & (((a + b) & 1) == 1)
    a, b = a[keep], b[keep]
    order = np.lexsort((b, a, a * a + b * b))
    return a[order].astype(np.int64), b[order].astype(np.int64)


def oracle_symbol_matrix(are, aim, nre, nim) -> np.ndarray:
    """(a_j / n_k) by Euler's criterion at each prime of a factorisation of n_k."""
    tables: dict = {}
    out = np.empty((len(are), len(nre)), dtype=np.int8)
    for k, (x, y) in enumerate(zip(nre.tolist(), nim.tolist())):
        col = np.ones(len(are), dtype=np.int8)
        for p, e in factor(GaussianInt(x, y)).factors:
            if p not in tables:
                tables[p] = euler_symbol_table(p, are, aim)
            col *= tables[p] ** e
        out[:, k] = col
    return out


def rational_twist_L(m: int, twist_two: bool, s: complex, dps: int = 25) -> complex:
    """Odd-ideal L-value of n -> (m/n) (times (i/n) if twist_two) for a rational integer m.

    For rational m one has (m/n) = (m / N(n)) and (i/n) = (2 / N(n)) as Jacobi
    symbols, so the series factors as L(s, xi) L(s, xi chi_-4) with
    xi(k) = (a/k) on odd k, a = 2m or m.
    """
    a = 2 * m if twist_two else m
    period = 4 * abs(a) * (2 if a % 2 else 1)
    xi = [0 if k % 2 == 0 else jacobi(a % k if k > 1 else 0, k) if k > 1 else 1 for k in range(period)]
    chi4 = [0, 1, 0, -1]
    big = int(np.lcm(period, 4))
    xi4 = [xi[k % period] * chi4[k % 4] for k in range(big)]
    with mpmath.workdps(dps):
        ms = mpmath.mpc(s.real, s.imag)
        v = mpmath.dirichlet(ms, xi) * mpmath.dirichlet(ms, xi4)
    return complex(v)
