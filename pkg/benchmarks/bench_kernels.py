"""Compare the compiled and numpy kernel backends on the hot paths.

    python3 benchmarks/bench_kernels.py [--repeat 3]

Each kernel is run on identical inputs under both backends; the script
checks that the outputs agree and prints the median wall time and speedup.
"""

from __future__ import annotations

import argparse
import math
import statistics
import time

import numpy as np

from gaussdds import _kernels
from gaussdds.characters import QuadraticCharacter
from gaussdds.gaussian import GaussianInt, primary_lattice
from gaussdds.lfunctions import DEFAULT_SPEC, kernel_table, primitive_data


def _time(fn, repeat):
    out, times = None, []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return out, statistics.median(times)


def cases():
    mr, mi = primary_lattice(600)
    nr, ni = primary_lattice(600)
    yield "symbol_matrix 600x600", lambda k: k.symbol_matrix(mr, mi, nr, ni), lambda a, b: np.array_equal(a, b)

    rng = np.random.default_rng(0)
    ar = rng.integers(-10**4, 10**4, 200_000)
    ai = rng.integers(-10**4, 10**4, 200_000)
    br, bi = primary_lattice(10**6)
    idx = rng.integers(0, br.size, 200_000)
    yield ("symbol_vec 2e5", lambda k: k.symbol_vec(ar, ai, br[idx], bi[idx]),
           lambda a, b: np.array_equal(a, b))

    chi = QuadraticCharacter(GaussianInt(-1, -2))
    s = complex(0.5, 1.0)
    tab = kernel_table(s, DEFAULT_SPEC, True)
    pd = primitive_data(chi)
    p, g, r = pd.basis
    args = (p, g, r, pd.table, int(pd.v2), 0.5 * math.log(pd.q), s.real, s.imag, tab.x0, tab.h,
            np.ascontiguousarray(tab.val.real), np.ascontiguousarray(tab.val.imag),
            np.ascontiguousarray(tab.der.real), np.ascontiguousarray(tab.der.imag))
    yield ("afe_lattice_sum X=2e5", lambda k: k.afe_lattice_sum(200_000, *args),
           lambda a, b: abs(complex(a[0], a[1]) - complex(b[0], b[1])) < 1e-10 and a[2] == b[2])


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    names = _kernels.available_backends()
    if "cython" not in names:
        print("compiled backend not built; only the numpy backend is available")
    print(f"{'kernel':<24}" + "".join(f"{n:>12}" for n in names) + f"{'speedup':>10}  agree")
    for label, fn, same in cases():
        results, times = [], []
        for n in names:
            out, t = _time(lambda: fn(_kernels.backend(n)), args.repeat)
            results.append(out)
            times.append(t)
        agree = all(same(results[0], r) for r in results[1:])
        speed = times[-1] / times[0] if len(times) > 1 else 1.0
        print(f"{label:<24}" + "".join(f"{t:>11.4f}s" for t in times) + f"{speed:>9.1f}x  {agree}")


if __name__ == "__main__":
    main()
