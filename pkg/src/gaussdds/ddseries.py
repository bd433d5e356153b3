"""Truncated double Dirichlet series Z(s, w; psi, psi') and the smoothed sums D.

Z(s, w; psi, psi') = zeta2(2s+2w-1) sum_{m, n primary} (m/n) psi(n) psi'(m) N(m)^-w N(n)^-s

is evaluated two ways: as the finite double sum (``z_direct``) and as a sum
over m of odd-ideal L-values (``z_via_l``), which reaches the strip where
the functional equations can be tested.
"""

from __future__ import annotations

import math
import threading
from concurrent.futures import Future, ThreadPoolExecutor
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Iterable, Mapping

import numpy as np

from . import _kernels
from .characters import TWISTS, QuadraticCharacter, UnitTwist, cg_mul, chi_eval_batch, symbol_batch
from .gaussian import ONE, GaussianInt, factor, primary_lattice, primary_squarefree, squarefree_decompose
from .lfunctions import (
    DEFAULT_SPEC,
    ODD_IDEAL_DENSITY,
    ContourSpec,
    LValue,
    afe_value,
    euler_adjust,
    l_critical,
    log_gamma,
    richardson,
    zeta_k2,
)


# ---------------------------------------------------------------------------
# parameters and weights

@dataclass(frozen=True)
class ConductorParams:
    u: float
    t: float

    @property
    def U(self) -> float:
        return (0.5 + abs(self.u)) ** 2

    @property
    def T(self) -> float:
        return (0.5 + abs(self.t)) ** 2

    @property
    def S(self) -> float:
        return (0.5 + abs(self.u + self.t)) ** 2

    @property
    def C(self) -> float:
        return self.S * self.U

    @property
    def X(self) -> float:
        return self.S * self.T * self.U

    @property
    def analytic_conductor(self) -> float:
        """|1/2+it|^2 |1/2+i(u+t)|^2 |1/2+iu|^2."""
        t, u = self.t, self.u
        return (0.25 + t * t) * (0.25 + (u + t) ** 2) * (0.25 + u * u)


def _bump(x: np.ndarray) -> np.ndarray:
    y = 2 * x - 3
    out = np.zeros_like(x)
    inside = np.abs(y) < 1
    out[inside] = np.exp(1 - 1 / (1 - y[inside] ** 2))
    return out


def _smoothstep(v: np.ndarray) -> np.ndarray:
    """C-infinity transition from 0 (v <= 0) to 1 (v >= 1)."""
    v = np.clip(v, 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore"):
        f = np.where(v > 0, np.exp(-1 / np.where(v > 0, v, 1)), 0.0)
        g = np.where(v < 1, np.exp(-1 / np.where(v < 1, 1 - v, 1)), 0.0)
    return f / (f + g)


def _dyadic(x: np.ndarray) -> np.ndarray:
    """Member of a partition of unity: translates by half-octaves sum to 1."""
    out = np.zeros_like(x)
    pos = x > 0
    v = 2 * np.log2(np.where(pos, x, 1.0))
    rise = pos & (v >= 0) & (v <= 1)
    fall = pos & (v > 1) & (v < 2)
    out[rise] = _smoothstep(v[rise])
    out[fall] = 1 - _smoothstep(v[fall] - 1)
    return out


@dataclass(frozen=True)
class WeightSpec:
    """A smooth weight W supported in [1, 2], or a finite linear combination of them.

    ``bump_12``: W(x) = exp(1 - 1/(1 - (2x-3)^2)) on (1, 2).
    ``dyadic_member``: phi(2 log2 x) on [1, sqrt 2], 1 - phi(2 log2 x - 1) on
    [sqrt 2, 2]; the weights x -> W(x / 2^(j/2)) sum to 1.
    ``scale`` evaluates W(x / scale); ``terms`` holds (coefficient, weight) pairs.
    """

    kind: str = "bump_12"
    scale: float = 1.0
    terms: tuple = ()

    def __post_init__(self):
        if self.kind not in ("bump_12", "dyadic_member", "sum"):
            raise ValueError(f"unknown weight kind {self.kind!r}")

    def __call__(self, x) -> np.ndarray:
        x = np.asarray(x, dtype=float)
        if self.kind == "sum":
            out = np.zeros_like(x)
            for c, w in self.terms:
                out = out + c * w(x)
            return out
        x = x / self.scale
        return _bump(x) if self.kind == "bump_12" else _dyadic(x)

    def support(self) -> tuple[float, float]:
        if self.kind == "sum":
            if not self.terms:
                return (1.0, 1.0)
            sup = [w.support() for _, w in self.terms]
            return (min(s[0] for s in sup), max(s[1] for s in sup))
        return (self.scale, 2 * self.scale)

    def __add__(self, other: "WeightSpec") -> "WeightSpec":
        return WeightSpec("sum", 1.0, self._as_terms() + other._as_terms())

    def __rmul__(self, c: float) -> "WeightSpec":
        return WeightSpec("sum", 1.0, tuple((c * k, w) for k, w in self._as_terms()))

    def _as_terms(self) -> tuple:
        return self.terms if self.kind == "sum" else ((1.0, self),)

    def describe(self) -> str:
        if self.kind == "sum":
            return "+".join(f"{c:g}*{w.describe()}" for c, w in self.terms)
        return self.kind if self.scale == 1.0 else f"{self.kind}@{self.scale:g}"


BUMP = WeightSpec()


def dyadic_family(j_lo: int, j_hi: int) -> list[tuple[float, WeightSpec]]:
    """Pairs (P_j, W) with P_j = 2^(j/2); sum_j W(x/P_j) = 1 for 2^((j_lo+1)/2) <= x <= 2^(j_hi/2)."""
    return [(2.0 ** (j / 2), WeightSpec("dyadic_member")) for j in range(j_lo, j_hi + 1)]


# ---------------------------------------------------------------------------
# shared L-value cache

def _map(fn: Callable, items: list, threads: int) -> list:
    if threads <= 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as ex:
        return list(ex.map(fn, items))


class LCache:
    """Odd-ideal L-values keyed by (square-free d0, twist, s), computed at most once.

    The principal character (d0 = 1, psi_1) is served by zeta_k2.
    """

    def __init__(self, spec: ContourSpec = DEFAULT_SPEC, tol: float = 1e-11):
        self.spec = spec
        self.tol = tol
        self._lock = threading.Lock()
        self._futures: dict = {}

    def get(self, d0: GaussianInt, psi: UnitTwist, s: complex) -> complex:
        key = (d0, UnitTwist(psi), complex(s))
        with self._lock:
            fut = self._futures.get(key)
            owner = fut is None
            if owner:
                fut = Future()
                self._futures[key] = fut
        if owner:
            try:
                fut.set_result(self._compute(*key))
            except BaseException as exc:  # propagate to every waiter
                fut.set_exception(exc)
        return fut.result()

    def _compute(self, d0, psi, s) -> complex:
        if d0 == ONE and psi == UnitTwist.PSI_1:
            return zeta_k2(s)
        chi = QuadraticCharacter(d0, psi)
        if s.real == 0.5:
            return l_critical(chi, s.imag, self.spec, self.tol).value
        return afe_value(chi, s, self.spec, self.tol).value

    def __len__(self):
        return len(self._futures)


_DEFAULT_CACHE = LCache()


@lru_cache(maxsize=None)
def _decomp(m: GaussianInt) -> tuple[GaussianInt, GaussianInt]:
    return squarefree_decompose(m)


# ---------------------------------------------------------------------------
# Z by direct double summation

@dataclass
class ZValue:
    value: complex
    tail_estimate: float
    M: int
    N: int
    method: str


def _twist_values(psi: UnitTwist, re: np.ndarray, im: np.ndarray) -> np.ndarray:
    j = psi.lift
    return symbol_batch(j.re, j.im, re, im).astype(float)


def _zeta2(s, w) -> complex:
    return zeta_k2(2 * s + 2 * w - 1)


def z_direct(s, w, psi=UnitTwist.PSI_1, psi2=UnitTwist.PSI_1, M: int = 100, N: int = 100) -> ZValue:
    """zeta2(2s+2w-1) times the double sum over N(m) <= M, N(n) <= N."""
    s, w = complex(s), complex(w)
    if s.real <= 1 or w.real <= 1:
        raise ValueError("direct summation needs Re(s) > 1 and Re(w) > 1")
    psi, psi2 = UnitTwist.parse(psi), UnitTwist.parse(psi2)
    mr, mi = primary_lattice(int(M))
    nr, ni = primary_lattice(int(N))
    S = _kernels.symbol_matrix(mr, mi, nr, ni).astype(float)
    a = _twist_values(psi2, mr, mi) * np.exp(-w * np.log((mr * mr + mi * mi).astype(float)))
    b = _twist_values(psi, nr, ni) * np.exp(-s * np.log((nr * nr + ni * ni).astype(float)))
    inner = S @ b  # inner[k] = sum_n (m_k/n) psi(n) N(n)^-s
    total = complex(math.fsum((a * inner).real), math.fsum((a * inner).imag))
    z2 = _zeta2(s, w)
    tail = abs(z2) * (
        ODD_IDEAL_DENSITY * M ** (1 - w.real) / (w.real - 1) * abs(zeta_k2(s.real))
        + ODD_IDEAL_DENSITY * N ** (1 - s.real) / (s.real - 1) * abs(zeta_k2(w.real))
    )
    return ZValue(z2 * total, tail, int(M), int(N), "direct")


# ---------------------------------------------------------------------------
# Z as a sum of L-values

def z_via_l_all(s, w, psi=UnitTwist.PSI_1, M: int = 100, cache: LCache | None = None,
                threads: int = 1) -> dict[UnitTwist, ZValue]:
    """Z(s, w; psi, rho) for all four rho, sharing the L-values."""
    s, w = complex(s), complex(w)
    psi = UnitTwist.parse(psi)
    if s.real <= 0:
        raise ValueError("L-value expansion needs Re(s) > 0")
    if psi == UnitTwist.PSI_1 and s == 1:
        raise ValueError("s = 1 is a polar line for psi = psi_1")
    if w.real <= 1 + max(0.0, 1 - s.real):
        raise ValueError("w too small for the m-sum to converge")
    cache = cache or _DEFAULT_CACHE
    mr, mi = primary_lattice(int(M))
    ms = [GaussianInt(int(a), int(b)) for a, b in zip(mr.tolist(), mi.tolist())]
    decs = [_decomp(m) for m in ms]
    keys = sorted({d0 for d0, _ in decs}, key=lambda z: z.sort_key())
    vals = dict(zip(keys, _map(lambda d0: cache.get(d0, psi, s), keys, threads)))
    coeff = np.empty(len(ms), dtype=complex)
    for k, (m, (d0, _)) in enumerate(zip(ms, decs)):
        coeff[k] = euler_adjust(m, s, psi) * vals[d0]
    nrm = (mr * mr + mi * mi).astype(float)
    base = coeff * np.exp(-w * np.log(nrm))
    z2 = _zeta2(s, w)
    lmax = float(np.max(np.abs(coeff))) if coeff.size else 0.0
    growth = max(0.0, (1 - s.real) / 2)
    tail = abs(z2) * lmax * ODD_IDEAL_DENSITY * M ** (1 - w.real + growth) / (w.real - 1 - growth)
    out = {}
    for rho in TWISTS:
        terms = _twist_values(rho, mr, mi) * base
        total = complex(math.fsum(terms.real), math.fsum(terms.imag))
        out[rho] = ZValue(z2 * total, tail, int(M), 0, "via_l")
    return out


def z_via_l(s, w, psi=UnitTwist.PSI_1, psi2=UnitTwist.PSI_1, M: int = 100,
            cache: LCache | None = None, threads: int = 1) -> ZValue:
    """zeta2(2s+2w-1) sum_{N(m) <= M} L2(s, chi_m psi) psi'(m) N(m)^-w."""
    return z_via_l_all(s, w, psi, M, cache, threads)[UnitTwist.parse(psi2)]


def twist_norm(psi: UnitTwist) -> int:
    """N(psi): conductor norm of the twist alone."""
    return QuadraticCharacter(ONE, psi).conductor_norm


def check_fe_nontrivial(s, w, psi, psi2=UnitTwist.PSI_1, M: int = 400, cache: LCache | None = None,
                        threads: int = 1) -> dict:
    """Residual of Z(1-s, s+w-1/2) = pi^(1-2s) N(psi)^((2s-1)/2) Gamma(s)/Gamma(1-s) Z(s, w)."""
    s, w = complex(s), complex(w)
    psi, psi2 = UnitTwist.parse(psi), UnitTwist.parse(psi2)
    if psi == UnitTwist.PSI_1:
        raise ValueError("use check_fe_psi1 for the trivial twist")
    lhs = z_via_l(1 - s, s + w - 0.5, psi, psi2, M, cache, threads)
    rhs = z_via_l(s, w, psi, psi2, M, cache, threads)
    factor_ = np.exp((1 - 2 * s) * math.log(math.pi) + (2 * s - 1) / 2 * math.log(twist_norm(psi))
                     + log_gamma(s) - log_gamma(1 - s))
    r = complex(factor_) * rhs.value
    return {
        "lhs": lhs.value,
        "rhs": r,
        "residual": abs(lhs.value - r),
        "tail": lhs.tail_estimate + abs(factor_) * rhs.tail_estimate,
    }


def group_ring_mul(x: Mapping[UnitTwist, float], y: Mapping[UnitTwist, float]) -> dict[UnitTwist, float]:
    out: dict[UnitTwist, float] = {}
    for a, ca in x.items():
        for b, cb in y.items():
            k = cg_mul(a, b)
            out[k] = out.get(k, 0) + ca * cb
    return {k: v for k, v in out.items() if v}


def check_fe_psi1(s, w, psi2=UnitTwist.PSI_1, M: int = 400, cache: LCache | None = None,
                  threads: int = 1) -> dict:
    """Residual of the functional equation for the trivial twist.

    The second twist slot is linear: Z(s, w; psi, sum c_r r) = sum c_r Z(s, w; psi, r).
    """
    s, w = complex(s), complex(w)
    psi2 = UnitTwist.parse(psi2)
    P1, PI, P1I = UnitTwist.PSI_1, UnitTwist.PSI_I, UnitTwist.PSI_1PI
    base = {psi2: 1}
    e1 = group_ring_mul(group_ring_mul(base, {P1: 1, PI: 1}), {P1: 1, P1I: 1})
    e2 = group_ring_mul(group_ring_mul(base, {P1: 1, PI: 1}), {P1: 1, P1I: -1})
    e3 = group_ring_mul(base, {P1: 1, PI: -1})
    lhs = z_via_l_all(1 - s, s + w - 0.5, P1, M, cache, threads)[psi2]
    zs = z_via_l_all(s, w, P1, M, cache, threads)

    def combo(e):
        return sum(c * zs[r].value for r, c in e.items())

    two = lambda x: 2.0 ** x  # noqa: E731
    g = complex(np.exp((1 - 2 * s) * math.log(math.pi) + log_gamma(s) - log_gamma(1 - s)))
    rhs = 0.5 * g * (
        0.5 * (1 - two(-(1 - s))) / (1 - two(-s)) * combo(e1)
        + 0.5 * (1 + two(-(1 - s))) / (1 + two(-s)) * combo(e2)
        + two(2 * s - 1) * combo(e3)
    )
    tail = lhs.tail_estimate + abs(g) * 4 * zs[P1].tail_estimate
    return {"lhs": lhs.value, "rhs": complex(rhs), "residual": abs(lhs.value - rhs), "tail": tail}


def residue_s1(w=3.0, psi2=UnitTwist.PSI_1, M: int = 400, deltas=(0.1, 0.05, 0.025),
               cache: LCache | None = None, threads: int = 1) -> dict:
    """Extrapolate delta * Z(1+delta, w; psi_1, psi') to delta = 0 and compare with pi zeta2(2w)/8."""
    vals = [d * z_via_l(1 + d, w, UnitTwist.PSI_1, psi2, M, cache, threads).value.real for d in deltas]
    est = richardson(deltas, vals)
    target = math.pi * zeta_k2(2 * complex(w)).real / 8
    return {"estimate": est, "target": target, "rel_error": abs(est - target) / abs(target),
            "samples": dict(zip(deltas, vals))}


def residue_w1(s=3.0, psi=UnitTwist.PSI_1, M: int = 400, deltas=(0.1, 0.05, 0.025),
               cache: LCache | None = None, threads: int = 1) -> dict:
    """Residue at w = 1 for psi' = psi_1, obtained through Z(s, w; psi, psi') = Z(w, s; psi', psi)."""
    return residue_s1(s, psi, M, deltas, cache, threads)


# ---------------------------------------------------------------------------
# smoothed sums D(t, u, P; W)

def _enumerate_dm(P: float, W: WeightSpec):
    """Primary (d, m) with N(d m^2) in P * support(W), ordered by (d, m) in (norm, re, im)."""
    lo, hi = W.support()
    top = int(math.floor(hi * P))
    if top < 1:
        return []
    dr, di = primary_lattice(top)
    out = []
    mr_all, mi_all = primary_lattice(max(1, math.isqrt(top)))
    nm = mr_all * mr_all + mi_all * mi_all
    for a, b in zip(dr.tolist(), di.tolist()):
        nd = a * a + b * b
        ok = (nd * nm * nm <= hi * P) & (nd * nm * nm >= lo * P)
        for k in np.nonzero(ok)[0].tolist():
            out.append((GaussianInt(a, b), GaussianInt(int(mr_all[k]), int(mi_all[k]))))
    return out


def d_sum(t: float, u: float, P: float, W: WeightSpec = BUMP, psi=UnitTwist.PSI_1, psi2=UnitTwist.PSI_1,
          cache: LCache | None = None, threads: int = 1) -> complex:
    """sum over primary d, m of L2(1/2+it, chi_d psi) psi'(d) N(d)^(-1/2-iu) N(m)^(-1-2i(u+t)) W(N(dm^2)/P)."""
    psi, psi2 = UnitTwist.parse(psi), UnitTwist.parse(psi2)
    cache = cache or _DEFAULT_CACHE
    pairs = _enumerate_dm(P, W)
    if not pairs:
        return 0j
    s = complex(0.5, t)
    ds = sorted({d for d, _ in pairs}, key=lambda z: z.sort_key())
    decs = {d: _decomp(d) for d in ds}
    keys = sorted({decs[d][0] for d in ds}, key=lambda z: z.sort_key())
    lv = dict(zip(keys, _map(lambda d0: cache.get(d0, psi, s), keys, threads)))
    dre = np.array([d.re for d in ds])
    dim = np.array([d.im for d in ds])
    tw = dict(zip(ds, _twist_values(psi2, dre, dim).tolist()))
    dcoef = {d: euler_adjust(d, s, psi) * lv[decs[d][0]] * tw[d] * d.norm() ** complex(-0.5, -u) for d in ds}
    nd = np.array([d.norm() for d, _ in pairs], dtype=float)
    nm = np.array([m.norm() for _, m in pairs], dtype=float)
    coef = np.array([dcoef[d] for d, _ in pairs])
    terms = coef * np.exp(complex(-1, -2 * (u + t)) * np.log(nm)) * W(nd * nm * nm / P)
    return complex(math.fsum(terms.real), math.fsum(terms.imag))


# ---------------------------------------------------------------------------
# bilinear character sums

def bilinear_char_sum(Mmax: int, Nmax: int, a_exp, b_exp, psi=UnitTwist.PSI_1, psi2=UnitTwist.PSI_1,
                      conductor_power=0.0) -> complex:
    """sum over square-free primary d0 (N <= Mmax) and primary n (N <= Nmax) of
    chi_{d0 psi}(n) psi'(d0) N(cond)^c N(n)^-a N(d0)^-b."""
    psi, psi2 = UnitTwist.parse(psi), UnitTwist.parse(psi2)
    d0s, C, qn, _ = _bilinear_data(int(Mmax), int(Nmax), psi)
    if not d0s:
        return 0j
    dre = np.array([d.re for d in d0s])
    dim = np.array([d.im for d in d0s])
    nr, ni = primary_lattice(int(Nmax))
    nn = (nr * nr + ni * ni).astype(float)
    ndd = (dre * dre + dim * dim).astype(float)
    left = _twist_values(psi2, dre, dim) * np.exp(complex(conductor_power) * np.log(qn)
                                                  - complex(b_exp) * np.log(ndd))
    right = np.exp(-complex(a_exp) * np.log(nn))
    vals = left * (C @ right)
    return complex(math.fsum(vals.real), math.fsum(vals.imag))


@lru_cache(maxsize=64)
def _bilinear_data(Mmax: int, Nmax: int, psi: UnitTwist):
    """Square-free d0, character matrix C[d0, n] = chi_{d0 psi}(n), conductor norms."""
    d0s = list(primary_squarefree(Mmax)) if Mmax >= 1 else []
    nr, ni = primary_lattice(max(1, Nmax))
    C = np.zeros((len(d0s), nr.size))
    for k, d in enumerate(d0s):
        C[k] = chi_eval_batch(QuadraticCharacter(d, psi), nr, ni)
    qn = np.array([QuadraticCharacter(d, psi).conductor_norm for d in d0s], dtype=float)
    return d0s, C, qn, (nr, ni)
