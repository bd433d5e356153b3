"""Exact arithmetic in the Gaussian integers Z[i].

Everything here works on unbounded Python integers.  The lattice helpers at
the bottom return numpy arrays for the vectorised sums in the other modules.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterator

import numpy as np

# trial division is exhaustive up to this norm
FACTOR_NORM_CEILING = 10**12


@dataclass(frozen=True, slots=True)
class GaussianInt:
    re: int
    im: int = 0

    def __post_init__(self):
        if not isinstance(self.re, int) or not isinstance(self.im, int):
            object.__setattr__(self, "re", int(self.re))
            object.__setattr__(self, "im", int(self.im))

    @classmethod
    def coerce(cls, z) -> "GaussianInt":
        if isinstance(z, GaussianInt):
            return z
        if isinstance(z, complex):
            return cls(int(z.real), int(z.imag))
        if isinstance(z, (tuple, list)):
            return cls(int(z[0]), int(z[1]))
        if isinstance(z, str):
            return parse_gaussian(z)
        return cls(int(z), 0)

    def __add__(self, other):
        o = GaussianInt.coerce(other)
        return GaussianInt(self.re + o.re, self.im + o.im)

    __radd__ = __add__

    def __sub__(self, other):
        o = GaussianInt.coerce(other)
        return GaussianInt(self.re - o.re, self.im - o.im)

    def __rsub__(self, other):
        return GaussianInt.coerce(other) - self

    def __mul__(self, other):
        o = GaussianInt.coerce(other)
        return GaussianInt(self.re * o.re - self.im * o.im, self.re * o.im + self.im * o.re)

    __rmul__ = __mul__

    def __neg__(self):
        return GaussianInt(-self.re, -self.im)

    def __pow__(self, e: int):
        if e < 0:
            raise ValueError("negative exponent")
        out, base = ONE, self
        while e:
            if e & 1:
                out = out * base
            base = base * base
            e >>= 1
        return out

    def __bool__(self):
        return bool(self.re or self.im)

    def __complex__(self):
        return complex(self.re, self.im)

    def conj(self) -> "GaussianInt":
        return GaussianInt(self.re, -self.im)

    def norm(self) -> int:
        return self.re * self.re + self.im * self.im

    def is_odd(self) -> bool:
        return (self.re + self.im) % 2 == 1

    def __str__(self):
        if self.im == 0:
            return str(self.re)
        if self.re == 0:
            return f"{self.im}i"
        sign = "+" if self.im > 0 else "-"
        return f"{self.re}{sign}{abs(self.im)}i"

    def sort_key(self):
        return (self.norm(), self.re, self.im)


ZERO = GaussianInt(0, 0)
ONE = GaussianInt(1, 0)
I = GaussianInt(0, 1)
ONE_PLUS_I = GaussianInt(1, 1)
UNITS = (ONE, I, GaussianInt(-1, 0), GaussianInt(0, -1))
# (1+i)^3 = -2+2i
PRIMARY_MODULUS = GaussianInt(-2, 2)

_LITERAL = re.compile(
    r"^\s*(?P<a>[+-]?\d+)?(?:(?P<bs>[+-])(?P<b>\d*)i)?\s*$|^\s*(?P<c>[+-]?\d*)i\s*$"
)


def parse_gaussian(text: str) -> GaussianInt:
    """Parse literals such as ``3``, ``-1-2i``, ``0+1i``, ``i``, ``-i``."""
    s = text.strip().replace(" ", "").replace("j", "i")
    m = _LITERAL.match(s)
    if not m or not s:
        raise ValueError(f"not a Gaussian integer literal: {text!r}")
    if m.group("c") is not None:
        c = m.group("c")
        b = -1 if c == "-" else 1 if c in ("", "+") else int(c)
        return GaussianInt(0, b)
    a = int(m.group("a")) if m.group("a") is not None else 0
    if m.group("bs") is None:
        if m.group("a") is None:
            raise ValueError(f"not a Gaussian integer literal: {text!r}")
        return GaussianInt(a, 0)
    b = int(m.group("b")) if m.group("b") else 1
    return GaussianInt(a, -b if m.group("bs") == "-" else b)


def norm(z) -> int:
    return GaussianInt.coerce(z).norm()


def _round_half_to_zero(num: int, den: int) -> int:
    """Nearest integer to num/den (den > 0), halves rounded toward zero."""
    q = (2 * abs(num) + den - 1) // (2 * den)
    return q if num >= 0 else -q


def divrem(a, b) -> tuple[GaussianInt, GaussianInt]:
    """Euclidean division a = q*b + r with N(r) <= N(b)/2.

    q is a/b rounded componentwise to the nearest integer; exact halves go
    toward zero, so the choice is canonical.
    """
    a = GaussianInt.coerce(a)
    b = GaussianInt.coerce(b)
    nb = b.norm()
    if nb == 0:
        raise ZeroDivisionError("Gaussian division by zero")
    num = a * b.conj()
    q = GaussianInt(_round_half_to_zero(num.re, nb), _round_half_to_zero(num.im, nb))
    return q, a - q * b


def divides(d, z) -> bool:
    d = GaussianInt.coerce(d)
    if not d:
        return not GaussianInt.coerce(z)
    return not divrem(z, d)[1]


def exact_div(a, b) -> GaussianInt:
    q, r = divrem(a, b)
    if r:
        raise ArithmeticError(f"{b} does not divide {a}")
    return q


def gcd(a, b) -> GaussianInt:
    a = GaussianInt.coerce(a)
    b = GaussianInt.coerce(b)
    while b:
        a, b = b, divrem(a, b)[1]
    return a


def is_unit(z) -> bool:
    return GaussianInt.coerce(z).norm() == 1


def is_primary(z) -> bool:
    """True iff (1+i)^3 divides z - 1 (checked by exact division)."""
    z = GaussianInt.coerce(z)
    return not divrem(z - ONE, PRIMARY_MODULUS)[1]


def is_primary_fast(z) -> bool:
    """Residue-pattern test: a+bi is primary iff (a, b) mod 4 is (1, 0) or (3, 2)."""
    z = GaussianInt.coerce(z)
    return (z.re % 4, z.im % 4) in ((1, 0), (3, 2))


def primary_associate(z) -> GaussianInt:
    """The unique associate u*z (u a unit) congruent to 1 mod (1+i)^3."""
    z = GaussianInt.coerce(z)
    if not z or z.norm() % 2 == 0:
        raise ValueError(f"{z} is even or zero; no primary associate")
    for u in UNITS:
        w = u * z
        if is_primary(w):
            return w
    raise AssertionError("unreachable: odd element without primary associate")


def unit_part(z) -> GaussianInt:
    """The unit u with z = u * primary_associate(z)."""
    z = GaussianInt.coerce(z)
    p = primary_associate(z)
    return exact_div(z, p)


# ---------------------------------------------------------------------------
# rational helpers

def _factor_int(n: int) -> dict[int, int]:
    if n <= 0:
        raise ValueError("need a positive integer")
    if n > FACTOR_NORM_CEILING:
        raise ValueError(f"norm {n} exceeds trial-division ceiling {FACTOR_NORM_CEILING}")
    out: dict[int, int] = {}
    for p in (2, 3, 5):
        while n % p == 0:
            out[p] = out.get(p, 0) + 1
            n //= p
    f, steps = 7, (4, 2, 4, 2, 4, 6, 2, 6)
    k = 0
    while f * f <= n:
        while n % f == 0:
            out[f] = out.get(f, 0) + 1
            n //= f
        f += steps[k]
        k = (k + 1) % 8
    if n > 1:
        out[n] = out.get(n, 0) + 1
    return out


def _sqrt_minus_one(p: int) -> int:
    """x with x^2 = -1 mod p, for a prime p = 1 mod 4."""
    for c in range(2, p):
        if pow(c, (p - 1) // 2, p) == p - 1:
            return pow(c, (p - 1) // 4, p)
    raise ValueError(f"{p} is not a prime = 1 mod 4")


@lru_cache(maxsize=None)
def split_prime(p: int) -> GaussianInt:
    """Primary Gaussian prime of norm p (p = 1 mod 4); its conjugate is the other one."""
    x = _sqrt_minus_one(p)
    pi = gcd(GaussianInt(p, 0), GaussianInt(x, 1))
    return primary_associate(pi)


@dataclass(frozen=True)
class PrimaryFactorization:
    unit: GaussianInt
    exp2: int
    factors: tuple[tuple[GaussianInt, int], ...]

    def product(self) -> GaussianInt:
        out = self.unit * ONE_PLUS_I ** self.exp2
        for p, e in self.factors:
            out = out * p ** e
        return out

    def is_squarefree(self) -> bool:
        return self.exp2 <= 1 and all(e == 1 for _, e in self.factors)


def factor(z) -> PrimaryFactorization:
    """Factor z != 0 as unit * (1+i)^e * prod of primary primes."""
    z = GaussianInt.coerce(z)
    if not z:
        raise ValueError("cannot factor zero")
    rest = z
    exp2 = 0
    while rest.norm() % 2 == 0:
        rest = exact_div(rest, ONE_PLUS_I)
        exp2 += 1
    found: dict[GaussianInt, int] = {}
    for p, e in _factor_int(rest.norm()).items():
        if p % 4 == 3:
            q = GaussianInt(-p, 0)
            k = e // 2
            rest = exact_div(rest, q ** k)
            found[q] = k
        else:
            for pi in (split_prime(p), primary_associate(split_prime(p).conj())):
                k = 0
                while True:
                    quo, r = divrem(rest, pi)
                    if r:
                        break
                    rest, k = quo, k + 1
                if k:
                    found[pi] = k
    if rest.norm() != 1:
        raise AssertionError(f"incomplete factorisation of {z}")
    factors = tuple(sorted(found.items(), key=lambda kv: kv[0].sort_key()))
    return PrimaryFactorization(rest, exp2, factors)


def is_gaussian_prime(z) -> bool:
    z = GaussianInt.coerce(z)
    n = z.norm()
    if n < 2:
        return False
    f = factor(z)
    return f.exp2 + sum(e for _, e in f.factors) == 1


def is_squarefree(z) -> bool:
    z = GaussianInt.coerce(z)
    return bool(z) and factor(z).is_squarefree()


def squarefree_decompose(c) -> tuple[GaussianInt, GaussianInt]:
    """Write a primary c as c1 * c2^2 with c1, c2 primary and c1 square-free."""
    c = GaussianInt.coerce(c)
    if not c or not is_primary(c):
        raise ValueError(f"{c} is not primary")
    f = factor(c)
    c1, c2 = ONE, ONE
    for p, e in f.factors:
        c1 = c1 * p ** (e % 2)
        c2 = c2 * p ** (e // 2)
    if c1 * c2 * c2 != c:
        raise AssertionError(f"square-free decomposition failed for {c}")
    return c1, c2


# ---------------------------------------------------------------------------
# enumeration

def enumerate_primary(X: int) -> Iterator[GaussianInt]:
    """All primary z with N(z) <= X, ordered by (norm, re, im)."""
    if X < 1:
        raise ValueError("X must be >= 1")
    re_, im_ = primary_lattice(int(X))
    for a, b in zip(re_.tolist(), im_.tolist()):
        yield GaussianInt(a, b)


def _primary_lattice_raw(X: int) -> tuple[np.ndarray, np.ndarray]:
    B = math.isqrt(X)
    bs = np.arange(-B - (B % 2), B + 1, 2, dtype=np.int64)
    bs = bs[bs * bs <= X]
    chunks_a, chunks_b = [], []
    for b in bs.tolist():
        amax = math.isqrt(X - b * b)
        start = (1 - b) % 4 - 4 * ((amax + 4) // 4)
        a = np.arange(start, amax + 1, 4, dtype=np.int64)
        a = a[np.abs(a) <= amax]
        chunks_a.append(a)
        chunks_b.append(np.full(a.size, b, dtype=np.int64))
    a = np.concatenate(chunks_a) if chunks_a else np.zeros(0, np.int64)
    b = np.concatenate(chunks_b) if chunks_b else np.zeros(0, np.int64)
    return a, b


@lru_cache(maxsize=8)
def primary_lattice(X: int) -> tuple[np.ndarray, np.ndarray]:
    """(re, im) arrays of primary elements with norm <= X, sorted by (norm, re, im)."""
    a, b = _primary_lattice_raw(int(X))
    n = a * a + b * b
    order = np.lexsort((b, a, n))
    a, b = a[order], b[order]
    a.setflags(write=False)
    b.setflags(write=False)
    return a, b


@lru_cache(maxsize=8)
def primary_squarefree(X: int) -> tuple[GaussianInt, ...]:
    """Square-free primary elements with norm <= X, in (norm, re, im) order."""
    return tuple(z for z in enumerate_primary(X) if factor(z).is_squarefree())


def residue_basis(f) -> tuple[int, int, int]:
    """Hermite data (p, g, r) for the lattice f*Z[i] inside Z^2.

    The lattice is spanned by (p, 0) and (r, g); x+yi is reduced to the
    representative (x - (y // g) * r) mod p, y mod g, giving the index
    (y mod g) * p + that x.  N(f) = p * g.
    """
    f = GaussianInt.coerce(f)
    a, b = f.re, f.im
    if not f:
        raise ZeroDivisionError("zero modulus")
    # second coordinates of f and i*f are b and a
    g0, x, y = _egcd(b, a)
    g = abs(g0)
    if g0 < 0:
        x, y = -x, -y
    # x*(a, b) + y*(-b, a) has second coordinate g
    r = x * a - y * b
    p = f.norm() // g
    return p, g, r % p


def residue_index(z, basis) -> int:
    p, g, r = basis
    z = GaussianInt.coerce(z)
    k = z.im // g
    return (z.im - k * g) * p + (z.re - k * r) % p


def residue_system(f) -> tuple[np.ndarray, np.ndarray]:
    """Representatives (re, im) of Z[i]/(f), ordered by residue_index."""
    p, g, _ = residue_basis(f)
    y, x = np.divmod(np.arange(p * g, dtype=np.int64), p)
    return x, y


def _egcd(a: int, b: int) -> tuple[int, int, int]:
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q = a // b
        a, b = b, a - q * b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    return a, x0, y0
