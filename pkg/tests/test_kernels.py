import math
import os
import subprocess
import sys

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gaussdds import _kernels
from gaussdds.characters import QuadraticCharacter, UnitTwist, jacobi, symbol
from gaussdds.gaussian import GaussianInt, primary_lattice
from gaussdds.lfunctions import ALT_SPEC, DEFAULT_SPEC, kernel_table, primitive_data

PY = _kernels.backend("python")
needs_c = pytest.mark.skipif("cython" not in _kernels.available_backends(), reason="extension not built")


def test_default_backend_is_compiled_when_built():
    assert _kernels.BACKEND in _kernels.available_backends()


def test_pure_env_selects_python():
    env = dict(os.environ, GAUSSDDS_PURE="1")
    out = subprocess.run([sys.executable, "-c", "import gaussdds._kernels as k; print(k.BACKEND)"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "python"


def test_unknown_backend():
    with pytest.raises(ValueError):
        _kernels.backend("fortran")


@given(st.lists(st.tuples(st.integers(-10**6, 10**6), st.integers(0, 10**5)), min_size=1, max_size=50))
def test_python_jacobi_vec_matches_scalar(pairs):
    a = np.array([p[0] for p in pairs])
    n = np.array([2 * p[1] + 1 for p in pairs])
    assert PY.jacobi_vec(a, n).tolist() == [jacobi(int(x), int(y)) for x, y in zip(a, n)]


@given(st.lists(st.tuples(*(st.integers(-3000, 3000),) * 4), min_size=1, max_size=50))
def test_python_symbol_vec_matches_scalar(rows):
    rows = [r for r in rows if (r[2] + r[3]) % 2 == 1]
    if not rows:
        return
    ar, ai, nr, ni = (np.array(c) for c in zip(*rows))
    got = PY.symbol_vec(ar, ai, nr, ni).tolist()
    assert got == [symbol(GaussianInt(a, b), GaussianInt(c, d)) for a, b, c, d in rows]


@needs_c
class TestCompiledMatchesPython:
    C = _kernels.backend("cython") if "cython" in _kernels.available_backends() else None

    def test_jacobi_vec(self):
        rng = np.random.default_rng(0)
        a = rng.integers(-10**9, 10**9, 20000)
        n = 2 * rng.integers(0, 10**9, 20000) + 1
        assert np.array_equal(self.C.jacobi_vec(a, n), PY.jacobi_vec(a, n))

    def test_symbol_vec(self):
        rng = np.random.default_rng(1)
        ar = rng.integers(-10**5, 10**5, 20000)
        ai = rng.integers(-10**5, 10**5, 20000)
        nr, ni = primary_lattice(10**6)
        idx = rng.integers(0, nr.size, 20000)
        assert np.array_equal(self.C.symbol_vec(ar, ai, nr[idx], ni[idx]), PY.symbol_vec(ar, ai, nr[idx], ni[idx]))

    def test_symbol_matrix_read_only_inputs(self):
        mr, mi = primary_lattice(300)
        assert not mr.flags.writeable
        assert np.array_equal(self.C.symbol_matrix(mr, mi, mr, mi), PY.symbol_matrix(mr, mi, mr, mi))

    @pytest.mark.parametrize("m, tw, s, spec", [
        (GaussianInt(-1, -2), UnitTwist.PSI_1, complex(0.5, 0), DEFAULT_SPEC),
        (GaussianInt(-3), UnitTwist.PSI_I, complex(0.5, 3), ALT_SPEC),
        (GaussianInt(3, 2), UnitTwist.PSI_1PI, complex(0.8, -1), DEFAULT_SPEC),
    ])
    def test_afe_lattice_sum(self, m, tw, s, spec):
        chi = QuadraticCharacter(m, tw)
        tab = kernel_table(s, spec, True)
        pd = primitive_data(chi)
        p, g, r = pd.basis
        args = (50_000, p, g, r, pd.table, int(pd.v2), 0.5 * math.log(pd.q), s.real, s.imag, tab.x0, tab.h,
                np.ascontiguousarray(tab.val.real), np.ascontiguousarray(tab.val.imag),
                np.ascontiguousarray(tab.der.real), np.ascontiguousarray(tab.der.imag))
        a = self.C.afe_lattice_sum(*args)
        b = PY.afe_lattice_sum(*args)
        assert a[2] == b[2]
        assert abs(complex(a[0], a[1]) - complex(b[0], b[1])) < 1e-12 * (1 + abs(complex(a[0], a[1])))
