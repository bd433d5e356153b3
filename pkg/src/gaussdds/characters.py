"""Quadratic residue symbols in Z[i], the unit twists, and quadratic characters.

Two independent symbol implementations live here.  ``symbol_oracle`` is the
definition: Euler's criterion modulo each prime of a factorisation of n.
``symbol`` never factors; it maps Z[i]/(n) onto rational residue rings and
uses the rational Jacobi symbol.  The test-suite gates one against the other.
"""

from __future__ import annotations

import enum
import math
import threading
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from . import _kernels
from .gaussian import (
    ONE,
    ONE_PLUS_I,
    GaussianInt,
    divrem,
    factor,
    is_gaussian_prime,
    is_primary,
    squarefree_decompose,
)


class UnitTwist(enum.IntEnum):
    """psi_j = (j / .) for j in {1, i, 1+i, i(1+i)}.

    The integer value is a bit pattern: bit 0 for the factor i, bit 1 for
    the factor 1+i, so the group law is XOR.
    """

    PSI_1 = 0
    PSI_I = 1
    PSI_1PI = 2
    PSI_I1PI = 3

    @property
    def label(self) -> str:
        return _TWIST_LABELS[self]

    @property
    def lift(self) -> GaussianInt:
        """The representative j with psi_j(n) = (j/n)."""
        return _TWIST_LIFTS[self]

    @classmethod
    def parse(cls, text) -> "UnitTwist":
        if isinstance(text, UnitTwist):
            return text
        key = str(text).strip().replace(" ", "").replace("*", "")
        key = key.replace("psi_", "").replace("psi", "")
        for tw, lab in _TWIST_LABELS.items():
            if key in (lab, tw.name):
                return tw
        aliases = {"1": cls.PSI_1, "i(1+i)": cls.PSI_I1PI, "-1+i": cls.PSI_I1PI, "i+i^2": cls.PSI_I1PI}
        if key in aliases:
            return aliases[key]
        raise ValueError(f"unknown twist {text!r}; expected one of 1, i, 1+i, i(1+i)")

    def __str__(self):
        return self.label


_TWIST_LABELS = {
    UnitTwist.PSI_1: "1",
    UnitTwist.PSI_I: "i",
    UnitTwist.PSI_1PI: "1+i",
    UnitTwist.PSI_I1PI: "i(1+i)",
}
_TWIST_LIFTS = {
    UnitTwist.PSI_1: ONE,
    UnitTwist.PSI_I: GaussianInt(0, 1),
    UnitTwist.PSI_1PI: ONE_PLUS_I,
    UnitTwist.PSI_I1PI: GaussianInt(-1, 1),
}
TWISTS = tuple(UnitTwist)


def cg_mul(x: UnitTwist, y: UnitTwist) -> UnitTwist:
    """Group law of the twist group (every element is its own inverse)."""
    return UnitTwist(int(x) ^ int(y))


# ---------------------------------------------------------------------------
# rational Jacobi symbol and the non-factoring Gaussian symbol

def jacobi(a: int, n: int) -> int:
    """Rational Jacobi symbol (a/n), n odd and positive."""
    if n <= 0 or n % 2 == 0:
        raise ValueError("Jacobi symbol needs an odd positive modulus")
    a %= n
    t = 1
    while a:
        while a % 2 == 0:
            a //= 2
            if n % 8 in (3, 5):
                t = -t
        a, n = n, a
        if a % 4 == 3 and n % 4 == 3:
            t = -t
        a %= n
    return t if n == 1 else 0


def symbol(a, n) -> int:
    """Quadratic residue symbol (a/n) for odd n, without factoring n.

    Write n = g*n' with g = gcd(re n, im n).  For the rational part,
    (a/g) = (N(a)/g).  For the primitive part n' = x' + iy' of norm M,
    Z[i]/(n') is Z/M with i -> -x'/y', and scaling by the square y'^2 gives
    (a/n') = (y'/M) * ((a_re y' - a_im x')/M).
    """
    a = GaussianInt.coerce(a)
    n = GaussianInt.coerce(n)
    if not n:
        raise ValueError("symbol modulo zero")
    if not n.is_odd():
        raise ValueError(f"symbol needs an odd modulus, got {n}")
    g = math.gcd(n.re, n.im)
    xp, yp = n.re // g, n.im // g
    M = xp * xp + yp * yp
    out = jacobi(a.re * a.re + a.im * a.im, g) if g > 1 else 1
    if out == 0 or M == 1:
        return out
    return out * jacobi(yp, M) * jacobi(a.re * yp - a.im * xp, M)


# ---------------------------------------------------------------------------
# Euler-criterion oracle

def _mulmod(x: GaussianInt, y: GaussianInt, p: GaussianInt) -> GaussianInt:
    return divrem(x * y, p)[1]


def _powmod(a: GaussianInt, e: int, p: GaussianInt) -> GaussianInt:
    out = divrem(ONE, p)[1]
    base = divrem(a, p)[1]
    while e:
        if e & 1:
            out = _mulmod(out, base, p)
        base = _mulmod(base, base, p)
        e >>= 1
    return out


def symbol_euler(a, p) -> int:
    """(a/p) for an odd Gaussian prime p by Euler's criterion a^((N(p)-1)/2) mod p."""
    a = GaussianInt.coerce(a)
    p = GaussianInt.coerce(p)
    if not p.is_odd():
        raise ValueError(f"{p} is even")
    if not is_gaussian_prime(p):
        raise ValueError(f"{p} is not a Gaussian prime")
    if not divrem(a, p)[1]:
        return 0
    v = _powmod(a, (p.norm() - 1) // 2, p)
    if not divrem(v - ONE, p)[1]:
        return 1
    if not divrem(v + ONE, p)[1]:
        return -1
    raise ArithmeticError(f"Euler criterion gave a non-sign residue for ({a}/{p})")


def symbol_oracle(a, n) -> int:
    """(a/n) as the product of Euler-criterion symbols over a factorisation of n."""
    a = GaussianInt.coerce(a)
    n = GaussianInt.coerce(n)
    if not n or not n.is_odd():
        raise ValueError(f"symbol needs an odd nonzero modulus, got {n}")
    out = 1
    for p, e in factor(n).factors:
        v = symbol_euler(a, p)
        if v == 0:
            return 0
        out *= v ** e
    return out


def euler_symbol_table(p, are, aim) -> np.ndarray:
    """Vectorised Euler criterion: (a/p) for arrays of a and one odd prime p.

    Gaussian square-and-multiply with componentwise Euclidean reduction on
    numpy int64 arrays; N(p) must stay below about 10^9.
    """
    p = GaussianInt.coerce(p)
    np_ = p.norm()
    pr, pi = p.re, p.im

    def reduce(xr, xi):
        # q = round(x * conj(p) / N(p)), halves toward zero
        nr = xr * pr + xi * pi
        ni = xi * pr - xr * pi
        qr = np.sign(nr) * ((2 * np.abs(nr) + np_ - 1) // (2 * np_))
        qi = np.sign(ni) * ((2 * np.abs(ni) + np_ - 1) // (2 * np_))
        return xr - (qr * pr - qi * pi), xi - (qr * pi + qi * pr)

    def mul(xr, xi, yr, yi):
        return reduce(xr * yr - xi * yi, xr * yi + xi * yr)

    br, bi = reduce(np.asarray(are, dtype=np.int64), np.asarray(aim, dtype=np.int64))
    zero = (br == 0) & (bi == 0)
    outr = np.ones_like(br)
    outi = np.zeros_like(bi)
    e = (np_ - 1) // 2
    while e:
        if e & 1:
            outr, outi = mul(outr, outi, br, bi)
        br, bi = mul(br, bi, br, bi)
        e >>= 1
    # residue is +-1 modulo p; test divisibility of v-1 by p
    dr, di = reduce(outr - 1, outi)
    plus = (dr == 0) & (di == 0)
    mr, mi = reduce(outr + 1, outi)
    minus = (mr == 0) & (mi == 0)
    if not np.all(plus | minus | zero):
        raise ArithmeticError(f"Euler criterion gave a non-sign residue modulo {p}")
    return np.where(zero, 0, np.where(plus, 1, -1)).astype(np.int8)


# ---------------------------------------------------------------------------
# batch evaluation

def symbol_batch(are, aim, nre, nim) -> np.ndarray:
    """Vectorised fast symbol over broadcastable arrays (odd n, N(n) < 2^31)."""
    nre = np.asarray(nre, dtype=np.int64)
    nim = np.asarray(nim, dtype=np.int64)
    if nre.size and int(np.max(nre * nre + nim * nim)) >= _kernels.SYMBOL_NORM_CEILING:
        raise ValueError("batch symbol limited to N(n) < 2^31; use symbol() for larger moduli")
    if np.any(((nre + nim) & 1) == 0):
        raise ValueError("batch symbol needs odd moduli")
    return _kernels.symbol_vec(are, aim, nre, nim)


# ---------------------------------------------------------------------------
# characters chi_m * psi

@dataclass(frozen=True)
class QuadraticCharacter:
    """The character n -> (m/n) psi(n) on odd n, extended by 0 to even n."""

    m: GaussianInt
    twist: UnitTwist = UnitTwist.PSI_1
    _cache: dict = field(default_factory=dict, init=False, repr=False, compare=False, hash=False)
    _lock: threading.RLock = field(default_factory=threading.RLock, init=False, repr=False, compare=False, hash=False)

    def __post_init__(self):
        m = GaussianInt.coerce(self.m)
        object.__setattr__(self, "m", m)
        object.__setattr__(self, "twist", UnitTwist.parse(self.twist))
        if not is_primary(m):
            raise ValueError(f"character modulus {m} is not primary")

    def _cached(self, key, build):
        try:
            return self._cache[key]
        except KeyError:
            pass
        with self._lock:
            if key not in self._cache:
                self._cache[key] = build()
            return self._cache[key]

    @property
    def decomposition(self) -> tuple[GaussianInt, GaussianInt]:
        """(c1, c2) with m = c1 c2^2 and c1 square-free."""
        return self._cached("sqf", lambda: squarefree_decompose(self.m))

    @property
    def core(self) -> GaussianInt:
        """c1 * j: the numerator of the symbol that agrees with chi on n coprime to m."""
        return self.decomposition[0] * self.twist.lift

    def __call__(self, n) -> int:
        return chi_eval(self, n)

    @property
    def conductor_exp2(self) -> int:
        return self._cached("cond", lambda: _conductor_two_part(self))

    @property
    def conductor(self) -> GaussianInt:
        """Generator (1+i)^k c1 of the conductor."""
        return ONE_PLUS_I ** self.conductor_exp2 * self.decomposition[0]

    @property
    def conductor_norm(self) -> int:
        return conductor_norm(self)

    @property
    def is_principal(self) -> bool:
        return self.conductor_norm == 1

    @property
    def value_at_two(self) -> int:
        """chi*(1+i) for the primitive character chi* attached to chi.

        Zero when (1+i) divides the conductor.  Otherwise the conductor is
        c1 and chi*(1+i) = chi*((1+i) + c1), an odd element.
        """
        if self.conductor_exp2:
            return 0
        return symbol(self.core, ONE_PLUS_I + self.decomposition[0])

    def label(self) -> str:
        return f"({self.m},psi_{self.twist.label})"


def chi_eval(chi: QuadraticCharacter, n) -> int:
    """(m/n) psi(n) on odd n, 0 on even n."""
    n = GaussianInt.coerce(n)
    if not n.is_odd():
        return 0
    return symbol(chi.m * chi.twist.lift, n)


def chi_eval_batch(chi: QuadraticCharacter, nre, nim) -> np.ndarray:
    """chi_eval over arrays of (re, im); 0 at even entries."""
    nre = np.asarray(nre, dtype=np.int64)
    nim = np.asarray(nim, dtype=np.int64)
    odd = ((nre + nim) & 1) == 1
    out = np.zeros(nre.shape, dtype=np.int8)
    if odd.any():
        a = chi.m * chi.twist.lift
        out[odd] = symbol_batch(a.re, a.im, nre[odd], nim[odd])
    return out


def primitive_eval_batch(chi: QuadraticCharacter, nre, nim) -> np.ndarray:
    """Values of the primitive character attached to chi.

    Odd arguments use the symbol with numerator c1*j; even arguments pick up
    value_at_two per factor (1+i), which is 0 unless the conductor is odd.
    """
    nre = np.asarray(nre, dtype=np.int64).copy()
    nim = np.asarray(nim, dtype=np.int64).copy()
    sign = np.ones(nre.shape, dtype=np.int8)
    v2 = chi.value_at_two
    ev = ((nre + nim) & 1) == 0
    zero = (nre == 0) & (nim == 0)
    ev &= ~zero
    while ev.any():
        # divide by 1+i: (a+bi)(1-i)/2
        r, i = nre[ev], nim[ev]
        nre[ev], nim[ev] = (r + i) // 2, (i - r) // 2
        sign[ev] *= v2
        ev = (((nre + nim) & 1) == 0) & ~zero
    a = chi.core
    out = symbol_batch(a.re, a.im, np.where(zero, 1, nre), nim)
    return np.where(zero, 0, out * sign).astype(np.int8)


def _conductor_two_part(chi: QuadraticCharacter) -> int:
    """Smallest k in 0..5 such that chi* is trivial on 1 + (1+i)^k c1 Z[i].

    The character n -> (c1 j / n) on odd n coprime to c1 is periodic modulo
    F = (1+i)^5 c1, so it is defined modulo f | F exactly when it is trivial
    on the units congruent to 1 mod f, i.e. on 1 + f x for x modulo F/f.
    """
    c1 = chi.decomposition[0]
    a = chi.core
    for k in range(6):
        f = ONE_PLUS_I ** k * c1
        ok = True
        for x in _residues_two_power(5 - k):
            n = ONE + f * x
            if not n.is_odd():
                continue
            if symbol(a, n) != 1:
                ok = False
                break
        if ok:
            return k
    raise ArithmeticError(f"no conductor of the form (1+i)^k c1 found for {chi.label()}")


@lru_cache(maxsize=None)
def _residues_two_power(e: int) -> tuple[GaussianInt, ...]:
    """Representatives of Z[i]/(1+i)^e."""
    if e == 0:
        return (GaussianInt(0, 0),)
    # (1+i)^e has norm 2^e; a box of side 2^ceil(e/2) covers all classes
    from .gaussian import residue_basis, residue_index

    mod = ONE_PLUS_I ** e
    basis = residue_basis(mod)
    seen: dict[int, GaussianInt] = {}
    side = 1 << ((e + 1) // 2)
    for x in range(side):
        for y in range(side):
            z = GaussianInt(x, y)
            seen.setdefault(residue_index(z, basis), z)
    if len(seen) != 2 ** e:
        raise AssertionError("incomplete residue system")
    return tuple(seen[k] for k in sorted(seen))


def conductor_norm(chi: QuadraticCharacter) -> int:
    """Norm of the conductor, found by residue testing over k = 0..5."""
    return 2 ** chi.conductor_exp2 * chi.decomposition[0].norm()


def periodicity_violations(chi: QuadraticCharacter, modulus, n1re, n1im, k_re, k_im) -> int:
    """Count pairs (n1, n1 + k*modulus) on which chi_eval differs (zeros included)."""
    mod = GaussianInt.coerce(modulus)
    n1re = np.asarray(n1re, dtype=np.int64)
    n1im = np.asarray(n1im, dtype=np.int64)
    n2re = n1re + np.asarray(k_re, dtype=np.int64) * mod.re - np.asarray(k_im, dtype=np.int64) * mod.im
    n2im = n1im + np.asarray(k_re, dtype=np.int64) * mod.im + np.asarray(k_im, dtype=np.int64) * mod.re
    v1 = chi_eval_batch(chi, n1re, n1im)
    v2 = chi_eval_batch(chi, n2re, n2im)
    return int(np.count_nonzero(v1 != v2))
