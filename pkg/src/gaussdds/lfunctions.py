"""Hecke L-functions of the quadratic characters of Q(i).

Conventions used throughout:

* Every public L-value is the series over odd ideals,
  L2(s, chi) = sum over primary n of chi(n) N(n)^-s, i.e. the L-function of
  ``chi_eval`` with the Euler factor at 1+i removed.
* Inside the smoothed (approximate functional equation) evaluation we work
  with the primitive character chi* of conductor f, q = N(f), and
  L(s, chi*) = sum_A chi*(A) N(A)^-s V_s(N(A)/sqrt q)
             + (sqrt q / pi)^(1-2s) / Gamma(s) * sum_A chi*(A) N(A)^(s-1) W_{1-s}(N(A)/sqrt q)
  with V_a(xi) = 1/(2 pi i) int Gamma(a+z)/Gamma(a) (pi xi)^-z H(z) dz/z and
  W_b the same without the division by Gamma(b).  The root number is 1 for
  these real characters.  L2 is then recovered by the Euler factors at 1+i
  and at the primes dividing m to an even power.
"""

from __future__ import annotations

import math
import threading
from dataclasses import dataclass, field

import mpmath
import numpy as np
from scipy import special

from . import _kernels
from .characters import QuadraticCharacter, UnitTwist, chi_eval, chi_eval_batch, symbol
from .gaussian import ONE, ONE_PLUS_I, GaussianInt, factor, primary_lattice, residue_basis, residue_system

LOG_PI = math.log(math.pi)
ODD_IDEAL_DENSITY = math.pi / 8  # primary elements per unit of norm

H_COEFFS = {"exp1": 1.0, "exp2": 2.0}


@dataclass(frozen=True)
class ContourSpec:
    """Vertical-line quadrature for the smoothing kernels; H(z) = exp(c z^2)."""

    sigma: float = 2.0
    half_width: float = 8.0
    step: float = 0.05
    h_choice: str = "exp1"

    def __post_init__(self):
        if self.h_choice not in H_COEFFS:
            raise ValueError(f"unknown test function {self.h_choice!r}; choose from {sorted(H_COEFFS)}")
        if self.step <= 0 or self.half_width <= 0:
            raise ValueError("contour step and half-width must be positive")

    @property
    def coeff(self) -> float:
        return H_COEFFS[self.h_choice]

    def H(self, z):
        return np.exp(self.coeff * np.asarray(z, dtype=complex) ** 2)

    def edge_size(self) -> float:
        """|H(sigma + iY)| at the truncation edge."""
        return float(abs(self.H(complex(self.sigma, self.half_width))))

    def nodes(self) -> np.ndarray:
        n = int(round(self.half_width / self.step))
        return np.arange(-n, n + 1) * self.step

    def halved(self) -> "ContourSpec":
        return ContourSpec(self.sigma, self.half_width, self.step / 2, self.h_choice)


DEFAULT_SPEC = ContourSpec()
ALT_SPEC = ContourSpec(h_choice="exp2")


@dataclass
class LValue:
    value: complex
    abs_error_estimate: float
    terms_used: int
    method: str
    meta: dict = field(default_factory=dict)

    def __complex__(self):
        return complex(self.value)


# ---------------------------------------------------------------------------
# Gamma

def log_gamma(s) -> complex | np.ndarray:
    """Principal branch of log Gamma (scipy's loggamma)."""
    arr = np.asarray(s, dtype=complex)
    bad = (arr.imag == 0) & (arr.real <= 0) & (arr.real == np.round(arr.real))
    if np.any(bad):
        raise ValueError("log_gamma evaluated at a pole")
    out = special.loggamma(arr)
    return complex(out) if out.ndim == 0 else out


def gamma_ratio(a, b) -> complex:
    """Gamma(a)/Gamma(b) through log-gamma differences."""
    return complex(np.exp(log_gamma(a) - log_gamma(b)))


# ---------------------------------------------------------------------------
# smoothing kernels

def _kernel_quadrature(a: complex, x: np.ndarray, sigma: np.ndarray, spec: ContourSpec, normalized: bool):
    """Trapezoid rule on the lines Re z = sigma[k] for log xi = x[k].

    Returns (K, dK/dlog xi).
    """
    y = spec.nodes()
    c = spec.coeff
    lga = complex(log_gamma(a)) if normalized else 0.0
    val = np.empty(x.size, dtype=complex)
    der = np.empty(x.size, dtype=complex)
    chunk = max(1, 200000 // y.size)
    for lo in range(0, x.size, chunk):
        xs = x[lo:lo + chunk, None]
        z = sigma[lo:lo + chunk, None] + 1j * y[None, :]
        logi = special.loggamma(a + z) - lga - z * (xs + LOG_PI) + c * z * z
        e = np.exp(logi)
        val[lo:lo + chunk] = (e / z).sum(axis=1) * (spec.step / (2 * math.pi))
        der[lo:lo + chunk] = -e.sum(axis=1) * (spec.step / (2 * math.pi))
    return val, der


def gfactor(t: float, xi: float, spec: ContourSpec = DEFAULT_SPEC, adaptive: bool = True) -> complex:
    """G_t(xi) by the trapezoid rule on a vertical line Re z = sigma > 0.

    The integral is the same for every sigma > 0.  With ``adaptive`` the
    abscissa minimising the integrand is used; on the fixed line
    Re z = spec.sigma the integrand reaches (pi xi)^-sigma, which costs
    about 1e-4 of accuracy at xi = 1e-6.
    """
    if xi <= 0:
        raise ValueError("xi must be positive")
    a = complex(0.5, t)
    x = np.array([math.log(xi)])
    sig = _saddle_sigma(a, x, spec.coeff) if adaptive else np.array([spec.sigma])
    val, _ = _kernel_quadrature(a, x, sig, spec, True)
    return complex(val[0])


def kernel_value(a: complex, xi, spec: ContourSpec = DEFAULT_SPEC, normalized: bool = True, sigma=None) -> np.ndarray:
    """V_a (normalized) or W_a at the points xi, with the adaptive contour unless sigma is given."""
    xi = np.atleast_1d(np.asarray(xi, dtype=float))
    x = np.log(xi)
    sig = _saddle_sigma(a, x, spec.coeff) if sigma is None else np.full(x.size, float(sigma))
    return _kernel_quadrature(complex(a), x, sig, spec, normalized)[0]


def _saddle_sigma(a: complex, x: np.ndarray, c: float) -> np.ndarray:
    """Abscissa minimising the integrand size on the real axis, kept right of all poles."""
    lo = max(0.0, -a.real) + 0.3
    grid = lo + np.arange(0, 400) * 0.1
    lg = special.loggamma(a + grid).real + c * grid * grid - np.log(grid)
    phi = lg[None, :] - grid[None, :] * (x[:, None] + LOG_PI)
    return grid[np.argmin(phi, axis=1)]


class KernelTable:
    """Cubic Hermite table of a smoothing kernel on a uniform log xi grid."""

    def __init__(self, a: complex, spec: ContourSpec, normalized: bool = True,
                 x_lo: float = -10.0, x_hi: float = 30.0, h: float = 0.005):
        self.a = complex(a)
        self.spec = spec
        self.normalized = normalized
        n = int(round((x_hi - x_lo) / h)) + 1
        self.x0 = x_lo
        self.h = h
        self.x = x_lo + h * np.arange(n)
        self.sigma = _saddle_sigma(self.a, self.x, spec.coeff)
        self.val, self.der = _kernel_quadrature(self.a, self.x, self.sigma, spec, normalized)
        self.val.setflags(write=False)
        self.der.setflags(write=False)
        self._tails: dict = {}

    @property
    def x_hi(self) -> float:
        return float(self.x[-1])

    def __call__(self, logxi) -> np.ndarray:
        u = (np.asarray(logxi, dtype=float) - self.x0) / self.h
        k = np.floor(u).astype(np.int64)
        if np.any(k < 0):
            raise ValueError("kernel table evaluated below its range")
        inside = k < self.x.size - 1
        k = np.minimum(k, self.x.size - 2)
        u = u - k
        u2, u3 = u * u, u * u * u
        h00 = 2 * u3 - 3 * u2 + 1
        h10 = u3 - 2 * u2 + u
        h01 = -2 * u3 + 3 * u2
        h11 = u3 - u2
        out = (h00 * self.val[k] + h10 * self.h * self.der[k]
               + h01 * self.val[k + 1] + h11 * self.h * self.der[k + 1])
        return np.where(inside, out, 0.0)

    def tail(self, sigma_s: float, kind: str = "rms") -> np.ndarray:
        """Tail size of sum_{xi(A) > xi_k} N(A)^-s K(xi(A)) per grid point, before q-scaling.

        ``abs``: (pi/8) int e^{(1-sigma)x} |K| dx (no cancellation), to be
        multiplied by q^{(1-sigma)/2}.
        ``rms``: sqrt((pi/8) int e^{(1-2 sigma)x} |K|^2 dx), square-root
        cancellation for +-1 coefficients, to be multiplied by q^{(1-2 sigma)/4}.
        """
        key = (round(sigma_s, 12), kind)
        if key not in self._tails:
            a2 = np.abs(self.val)
            if kind == "abs":
                g = np.exp((1 - sigma_s) * self.x) * a2
            else:
                g = np.exp((1 - 2 * sigma_s) * self.x) * a2 * a2
            c = np.cumsum(g[::-1])[::-1] * self.h * ODD_IDEAL_DENSITY
            self._tails[key] = c if kind == "abs" else np.sqrt(c)
        return self._tails[key]

    def cutoff(self, sigma_s: float, log_sqrt_q: float, tol: float, safety: float = 10.0) -> tuple[float, float]:
        """Smallest log xi where the scaled rms tail times ``safety`` is below tol.

        Returns (log xi cutoff, the tail estimate there).
        """
        scale = math.exp((1 - 2 * sigma_s) * log_sqrt_q / 2)
        est = self.tail(sigma_s, "rms") * scale * safety
        ok = np.nonzero(est <= tol)[0]
        if ok.size == 0:
            raise ValueError("kernel table too short for the requested tolerance")
        k = int(ok[0])
        return float(self.x[k]), float(est[k])


_TABLES: dict = {}
_TABLE_LOCK = threading.Lock()


def kernel_table(a: complex, spec: ContourSpec = DEFAULT_SPEC, normalized: bool = True) -> KernelTable:
    """Shared table per (a, test function, quadrature, normalisation); built at most once."""
    a = complex(round(complex(a).real, 13), round(complex(a).imag, 13))
    key = (a, spec.h_choice, spec.half_width, spec.step, normalized)
    tab = _TABLES.get(key)
    if tab is None:
        with _TABLE_LOCK:
            tab = _TABLES.get(key)
            if tab is None:
                tab = KernelTable(a, spec, normalized)
                _TABLES[key] = tab
    return tab


# ---------------------------------------------------------------------------
# character data for the lattice kernel

@dataclass(frozen=True)
class _PrimitiveData:
    q: int
    v2: int
    basis: tuple[int, int, int]
    table: np.ndarray


_PRIM: dict = {}
_PRIM_LOCK = threading.Lock()


def primitive_data(chi: QuadraticCharacter) -> _PrimitiveData:
    """Residue table of n -> (c1 j / n) modulo (1+i)^5 c1 (zero on even classes)."""
    key = (chi.decomposition[0], chi.twist)
    d = _PRIM.get(key)
    if d is not None:
        return d
    with _PRIM_LOCK:
        d = _PRIM.get(key)
        if d is None:
            c1 = chi.decomposition[0]
            F = ONE_PLUS_I ** 5 * c1
            basis = residue_basis(F)
            xr, xi = residue_system(F)
            tab = np.zeros(xr.size, dtype=np.int8)
            odd = ((xr + xi) & 1) == 1
            a = chi.core
            tab[odd] = _kernels.symbol_vec(a.re, a.im, xr[odd], xi[odd])
            tab.setflags(write=False)
            d = _PrimitiveData(chi.conductor_norm, chi.value_at_two, basis, tab)
            _PRIM[key] = d
    return d


def _lattice_sum(chi: QuadraticCharacter, s: complex, tab: KernelTable, X: int) -> tuple[complex, int]:
    """sum over A with N(A) <= X of chi*(A) N(A)^-s K(N(A)/sqrt q)."""
    pd = primitive_data(chi)
    p, g, r = pd.basis
    re, im, n = _kernels.afe_lattice_sum(
        int(X), p, g, r, pd.table, int(pd.v2), 0.5 * math.log(pd.q),
        float(s.real), float(s.imag), tab.x0, tab.h,
        np.ascontiguousarray(tab.val.real), np.ascontiguousarray(tab.val.imag),
        np.ascontiguousarray(tab.der.real), np.ascontiguousarray(tab.der.imag),
    )
    return complex(re, im), int(n)


def _two_factor(chi: QuadraticCharacter, s: complex) -> complex:
    """1 - chi*(1+i) 2^-s: converts L(s, chi*) to the odd-ideal series."""
    return 1 - chi.value_at_two * 2.0 ** (-s)


def odd_part_factor(chi: QuadraticCharacter, s: complex) -> complex:
    """Euler factors at primes dividing c2 but not c1 (zero there for chi_eval)."""
    c1, c2 = chi.decomposition
    if c2 == ONE:
        return 1.0
    out = 1.0 + 0j
    c1_primes = {p for p, _ in factor(c1).factors} if c1 != ONE else set()
    for p, _ in factor(c2).factors:
        if p in c1_primes:
            continue
        out *= 1 - symbol(chi.core, p) * p.norm() ** (-s)
    return out


def _require_nonprincipal(chi: QuadraticCharacter):
    if chi.is_principal:
        raise ValueError("principal character: use zeta_k2")


# ---------------------------------------------------------------------------
# public evaluators

def l_direct(chi: QuadraticCharacter, s: complex, X: int) -> LValue:
    """Partial sum of the odd-ideal series, Re s > 1."""
    s = complex(s)
    if s.real <= 1:
        raise ValueError("direct summation needs Re(s) > 1")
    X = int(X)
    re, im = primary_lattice(X)
    vals = chi_eval_batch(chi, re, im).astype(float)
    nrm = (re * re + im * im).astype(float)
    live = vals != 0
    terms = vals[live] * np.exp(-s * np.log(nrm[live]))
    value = complex(math.fsum(terms.real), math.fsum(terms.imag))
    err = ODD_IDEAL_DENSITY * X ** (1 - s.real) / (s.real - 1)
    return LValue(value, err, int(re.size), "direct")


def l_critical(chi: QuadraticCharacter, t: float, spec: ContourSpec = DEFAULT_SPEC,
               tol: float = 1e-11, precision: str = "fast64") -> LValue:
    """L2(1/2 + it, chi) by the smoothed two-sided sum.

    On the critical line 1 - s is the conjugate of s and the coefficients
    are real, so the dual sum is the conjugate of the first one.
    """
    _require_nonprincipal(chi)
    if precision == "extended":
        return _l_critical_extended(chi, t, spec)
    s = complex(0.5, t)
    q = chi.conductor_norm
    tab = kernel_table(s, spec, True)
    lsq = 0.5 * math.log(q)
    xc, tail = tab.cutoff(0.5, lsq, tol)
    X = int(math.floor(math.exp(xc + lsq)))
    S, n = _lattice_sum(chi, s, tab, X)
    root = np.exp(-1j * t * math.log(q / math.pi ** 2) + log_gamma(complex(0.5, -t)) - log_gamma(s))
    prim = S + complex(root) * S.conjugate()
    value = prim * _two_factor(chi, s) * odd_part_factor(chi, s)
    err = 2 * tail + 1e-12 * (abs(S) + 1)
    return LValue(complex(value), err, n, "afe_critical",
                  {"conductor_norm": q, "X": X, "h_choice": spec.h_choice})


def afe_value(chi: QuadraticCharacter, s: complex, spec: ContourSpec = DEFAULT_SPEC,
              tol: float = 1e-11) -> LValue:
    """L2(s, chi) for any Re s > 0 with both smoothed sums computed separately."""
    _require_nonprincipal(chi)
    s = complex(s)
    if s.real <= 0:
        raise ValueError("smoothed evaluation needs Re(s) > 0")
    q = chi.conductor_norm
    lsq = 0.5 * math.log(q)
    tv = kernel_table(s, spec, True)
    tw = kernel_table(1 - s, spec, False)
    pref = complex(np.exp((1 - 2 * s) * (lsq - LOG_PI) - log_gamma(s)))
    xv, ev = tv.cutoff(s.real, lsq, tol)
    xw, ew = tw.cutoff(1 - s.real, lsq, tol / max(abs(pref), 1e-300))
    S1, n1 = _lattice_sum(chi, s, tv, int(math.floor(math.exp(xv + lsq))))
    S2, n2 = _lattice_sum(chi, 1 - s, tw, int(math.floor(math.exp(xw + lsq))))
    prim = S1 + pref * S2
    value = prim * _two_factor(chi, s) * odd_part_factor(chi, s)
    err = ev + abs(pref) * ew + 1e-12 * (abs(S1) + abs(pref * S2) + 1)
    return LValue(complex(value), err, n1 + n2, "afe", {"conductor_norm": q})


def l_value(chi: QuadraticCharacter, s: complex, spec: ContourSpec = DEFAULT_SPEC,
            tol: float = 1e-11) -> LValue:
    """Critical line via the self-dual sum, elsewhere (Re s > 0) via both smoothed sums.

    Direct summation is never chosen: reaching tol = 1e-11 at Re s = 2 would
    take about 4e10 terms.
    """
    s = complex(s)
    if s.real == 0.5:
        return l_critical(chi, s.imag, spec, tol)
    return afe_value(chi, s, spec, tol)


def l_continued(chi: QuadraticCharacter, s: complex, spec: ContourSpec = DEFAULT_SPEC,
                tol: float = 1e-11) -> LValue:
    """L2(s, chi) in the strip 0 < Re s <= 2 (the right edge overlaps direct summation)."""
    if not 0 < complex(s).real <= 2:
        raise ValueError("continued evaluation needs 0 < Re(s) <= 2")
    return afe_value(chi, s, spec, tol)


def direct_cutoff(sigma: float, tol: float) -> int:
    """Smallest X with (pi/8) X^(1-sigma)/(sigma-1) <= tol."""
    return int(math.ceil((ODD_IDEAL_DENSITY / (tol * (sigma - 1))) ** (1 / (sigma - 1))))


def euler_adjust(d, s: complex, psi=UnitTwist.PSI_1) -> complex:
    """prod over odd primes p | d1 of (1 - chi_{d0 psi}(p) N(p)^-s), where d = d0 d1^2."""
    chi = QuadraticCharacter(d, psi)
    d0, d1 = chi.decomposition
    if d1 == ONE:
        return 1.0 + 0j
    base = QuadraticCharacter(d0, psi)
    out = 1.0 + 0j
    for p, _ in factor(d1).factors:
        out *= 1 - chi_eval(base, p) * p.norm() ** (-complex(s))
    return complex(out)


# ---------------------------------------------------------------------------
# 2-removed Dedekind zeta

def zeta_k2(s: complex, X: int | None = None, mode: str = "analytic") -> complex:
    """Sum over primary n of N(n)^-s = zeta(s) beta(s) (1 - 2^-s).

    ``analytic`` multiplies the Riemann zeta and the Dirichlet beta function
    (any s != 1); ``direct`` sums the lattice up to X and adds the
    leading-order tail (pi/8) X^(1-s)/(s-1) (Re s > 1).
    """
    s = complex(s)
    if s == 1:
        raise ValueError("zeta_k2 has a pole at s = 1")
    if mode == "analytic":
        with mpmath.workdps(30):
            ms = mpmath.mpc(s.real, s.imag)
            v = mpmath.zeta(ms) * mpmath.dirichlet(ms, [0, 1, 0, -1]) * (1 - mpmath.power(2, -ms))
        return complex(v)
    if mode != "direct":
        raise ValueError(f"unknown zeta mode {mode!r}")
    if s.real <= 1:
        raise ValueError("direct zeta summation needs Re(s) > 1")
    if X is None:
        raise ValueError("direct mode needs a truncation X")
    re, im = primary_lattice(int(X))
    nrm = (re * re + im * im).astype(float)
    terms = np.exp(-s * np.log(nrm))
    tail = ODD_IDEAL_DENSITY * X ** (1 - s) / (s - 1)
    return complex(math.fsum(terms.real), math.fsum(terms.imag)) + tail


def zeta_residue(deltas=(0.1, 0.05, 0.025)) -> float:
    """Richardson extrapolation of (s-1) zeta_k2(s) as s -> 1+."""
    vals = [(d * zeta_k2(1 + d)).real for d in deltas]
    return richardson(deltas, vals)


def richardson(hs, vals) -> float:
    """Polynomial extrapolation of vals(h) to h = 0 (Neville)."""
    hs = list(map(float, hs))
    p = list(map(float, vals))
    n = len(p)
    for k in range(1, n):
        for j in range(n - k):
            p[j] = (hs[j] * p[j + 1] - hs[j + k] * p[j]) / (hs[j] - hs[j + k])
    return p[0]


# ---------------------------------------------------------------------------
# arbitrary precision path (small conductors only)

def _l_critical_extended(chi: QuadraticCharacter, t: float, spec: ContourSpec, tol: float = 1e-6,
                         dps: int = 20, max_norms: int = 1500) -> LValue:
    """Same smoothed sum with mpmath kernels and sums; slow, for cross-checks.

    The kernel is integrated by mpmath quadrature once per distinct norm, so
    only characters whose cutoff leaves at most ``max_norms`` norms are
    accepted.
    """
    q = chi.conductor_norm
    c = spec.coeff
    s = complex(0.5, t)
    lsq = 0.5 * math.log(q)
    xc, _ = kernel_table(s, spec, True).cutoff(0.5, lsq, tol)
    X = int(math.floor(math.exp(xc + lsq)))
    re, im = primary_lattice(max(X, 1))
    pd = primitive_data(chi)
    coeff: dict[int, int] = {}
    for x, y in zip(re.tolist(), im.tolist()):
        v = int(pd.table[_residue(x, y, pd.basis)])
        N, w = x * x + y * y, v
        while w and N <= X:
            coeff[N] = coeff.get(N, 0) + w
            if pd.v2 == 0:
                break
            N, w = 2 * N, w * pd.v2
    norms = sorted(k for k, v in coeff.items() if v)
    if len(norms) > max_norms:
        raise ValueError(f"extended precision needs {len(norms)} kernel integrals (limit {max_norms})")
    with mpmath.workdps(dps):
        a = mpmath.mpc(0.5, t)
        lga = mpmath.loggamma(a)
        sq = mpmath.sqrt(q)

        def V(xi):
            lx = mpmath.log(mpmath.pi * xi)

            def f(y):
                z = mpmath.mpc(1, y)
                return mpmath.exp(mpmath.loggamma(a + z) - lga - z * lx + c * z * z) / z

            return mpmath.quad(f, [-12, -4, 0, 4, 12]) / (2 * mpmath.pi)

        S = mpmath.fsum(coeff[N] * mpmath.power(N, -a) * V(N / sq) for N in norms)
        root = mpmath.exp(-1j * t * mpmath.log(q / mpmath.pi ** 2) + mpmath.loggamma(mpmath.mpc(0.5, -t)) - lga)
        prim = complex(S + root * mpmath.conj(S))
    val = prim * _two_factor(chi, s) * odd_part_factor(chi, s)
    return LValue(complex(val), tol, len(norms), "afe_critical_extended", {"conductor_norm": q, "X": X, "dps": dps})


def _residue(x: int, y: int, basis) -> int:
    p, g, r = basis
    k = y // g
    return (y - k * g) * p + (x - k * r) % p
