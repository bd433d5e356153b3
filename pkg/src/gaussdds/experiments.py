"""Batch experiment drivers: moments, large sieve, growth of D, majorants, slope fits."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from . import _kernels
from .characters import QuadraticCharacter, UnitTwist, symbol_oracle
from .ddseries import (
    BUMP,
    ConductorParams,
    LCache,
    WeightSpec,
    _bilinear_data,
    _map,
    _twist_values,
    d_sum,
)
from .gaussian import ONE, GaussianInt, primary_lattice, primary_squarefree
from .lfunctions import DEFAULT_SPEC, ContourSpec

EPS = 0.1  # stands in for every arbitrary epsilon in the bounds


@dataclass
class ExperimentRecord:
    experiment_id: str
    params: dict
    value: complex
    bound: float
    ratio: float = float("nan")
    notes: str = ""

    def __post_init__(self):
        self.value = complex(self.value)
        self.bound = float(self.bound)
        if self.bound > 0 and math.isnan(self.ratio):
            self.ratio = abs(self.value) / self.bound


def exponent_fit(points: Sequence[tuple[float, float]]) -> tuple[float, float]:
    """Least-squares line through (log x, log y); returns (slope, intercept)."""
    pts = list(points)
    if len(pts) < 3:
        raise ValueError("need at least 3 points")
    x = np.array([p[0] for p in pts], dtype=float)
    y = np.array([p[1] for p in pts], dtype=float)
    if np.any(x <= 0) or np.any(y <= 0):
        raise ValueError("points must be positive")
    if np.unique(x).size < 2:
        raise ValueError("need distinct x values")
    A = np.column_stack([np.log(x), np.ones_like(x)])
    (slope, icpt), *_ = np.linalg.lstsq(A, np.log(y), rcond=None)
    return float(slope), float(icpt)


# ---------------------------------------------------------------------------
# moments over square-free m

@dataclass
class MomentScan:
    records: list[ExperimentRecord]
    slope: float
    intercept: float
    fit_from: int
    slope_log3: float  # slope of S2 / log(X)^3, a diagnostic for the X log^3 X main term


def moment_scan(Xmax: int, t: float = 0.0, Xmin: int = 64, threads: int = 1,
                cache: LCache | None = None) -> MomentScan:
    """S1(X) = sum |L(1/2+it, chi_m)| and S2(X) = sum |L|^2 over square-free primary m with N(m) <= X.

    X runs over powers of two from ``Xmin`` to ``Xmax``; the slope of log S2
    against log X is fitted over those points.
    """
    if Xmax < 64:
        raise ValueError("Xmax must be at least 64")
    cache = cache or LCache()
    ms = primary_squarefree(int(Xmax))
    s = complex(0.5, t)
    vals = np.array(_map(lambda m: cache.get(m, UnitTwist.PSI_1, s), list(ms), threads))
    norms = np.array([m.norm() for m in ms])
    a1 = np.abs(vals)
    a2 = a1 ** 2
    records = []
    pts = []
    k = max(0, math.ceil(math.log2(Xmin)))
    while 2 ** k <= Xmax:
        X = 2 ** k
        sel = norms <= X
        n = int(sel.sum())
        S1 = math.fsum(a1[sel])
        S2 = math.fsum(a2[sel])
        bound = (X * abs(s)) ** (1 + EPS)
        p = {"X": X, "t": t, "terms": n}
        records.append(ExperimentRecord("moment2", p, S2, bound, notes=f"eps={EPS}"))
        records.append(ExperimentRecord("moment1", dict(p), S1, math.sqrt(n * S2),
                                        notes="bound=sqrt(terms*S2)"))
        pts.append((X, S2))
        k += 1
    slope, icpt = exponent_fit(pts)
    slope3, _ = exponent_fit([(x, y / math.log(x) ** 3) for x, y in pts])
    records.append(ExperimentRecord("moment2_fit", {"X": int(Xmax), "t": t, "terms": len(pts)},
                                    slope, 0.0, float("nan"),
                                    f"intercept={icpt!r};fit_from={Xmin};slope_log3={slope3!r}"))
    return MomentScan(records, slope, icpt, Xmin, slope3)


# ---------------------------------------------------------------------------
# large sieve

def _coefficients(rng: np.random.Generator, n: int, trials: int, scheme: str) -> np.ndarray:
    if scheme == "rademacher":
        return rng.choice(np.array([-1.0, 1.0]), size=(n, trials))
    if scheme == "phase":
        return np.exp(2j * math.pi * rng.random((n, trials)))
    raise ValueError(f"unknown coefficient scheme {scheme!r}")


def sieve_matrix(M: int, N: int) -> np.ndarray:
    """S[j, k] = (n_k / m_j) over square-free primary m (N <= M) and n (N <= N)."""
    mr, mi = _sqfree_arrays(M)
    nr, ni = _sqfree_arrays(N)
    return _kernels.symbol_matrix(nr, ni, mr, mi).T.astype(float)


def _sqfree_arrays(X: int) -> tuple[np.ndarray, np.ndarray]:
    zs = primary_squarefree(int(X))
    return (np.array([z.re for z in zs], dtype=np.int64), np.array([z.im for z in zs], dtype=np.int64))


def sieve_ratios(S: np.ndarray, A: np.ndarray, M: int, N: int) -> np.ndarray:
    num = np.sum(np.abs(S @ A) ** 2, axis=0)
    den = (M + N) * np.sum(np.abs(A) ** 2, axis=0)
    return num / den


def sieve_test(M: int, N: int, trials: int = 100, seed: int = 1, scheme: str = "rademacher") -> float:
    """Largest normalized bilinear form sum_m |sum_n a_n (n/m)|^2 / ((M+N) sum |a_n|^2) over random trials."""
    if trials < 1:
        raise ValueError("trials must be positive")
    S = sieve_matrix(M, N)
    A = _coefficients(np.random.default_rng(seed), S.shape[1], trials, scheme)
    return float(np.max(sieve_ratios(S, A, M, N)))


def sieve_bruteforce(M: int, N: int, coeffs: Sequence[complex]) -> float:
    """Same normalized ratio with a naive triple loop and the factoring symbol."""
    ms = primary_squarefree(int(M))
    ns = primary_squarefree(int(N))
    if len(coeffs) != len(ns):
        raise ValueError("one coefficient per square-free n is required")
    num = 0.0
    for m in ms:
        acc = 0j
        for a, n in zip(coeffs, ns):
            acc += a * symbol_oracle(n, m)
        num += abs(acc) ** 2
    return num / ((M + N) * sum(abs(a) ** 2 for a in coeffs))


# ---------------------------------------------------------------------------
# growth of D against the conjectured-shape bound

def d_bound(params: ConductorParams, P: float, eps: float = EPS) -> tuple[float, int]:
    """U^eps min(P^1/2 + (TP)^1/4, (TP)^1/4 + (T/P)^1/4 U^1/2) and the index of the active branch."""
    T, U = params.T, params.U
    b1 = math.sqrt(P) + (T * P) ** 0.25
    b2 = (T * P) ** 0.25 + (T / P) ** 0.25 * math.sqrt(U)
    return U ** eps * min(b1, b2), (0 if b1 <= b2 else 1)


def crossover_point(params: ConductorParams, lo: float = 1e-3, hi: float = 1e9, n: int = 20001) -> float:
    """First P on a fine log grid where the second branch becomes the smaller one."""
    Ps = np.geomspace(lo, hi, n)
    branch = np.array([d_bound(params, P)[1] for P in Ps])
    idx = np.nonzero(branch == 1)[0]
    if idx.size == 0 or idx[0] == 0:
        return float("nan")
    return float(math.sqrt(Ps[idx[0] - 1] * Ps[idx[0]]))


@dataclass
class DBoundResult:
    records: list[ExperimentRecord]
    C_hat: float
    crossover_ratios: list[float]
    conj_error: float
    skipped: list[tuple] = field(default_factory=list)


def d_bound_experiment(t_grid: Iterable[float], u_grid: Iterable[float], P_grid: Iterable[float],
                       twists: Sequence[tuple] = ((UnitTwist.PSI_1, UnitTwist.PSI_1),),
                       W: WeightSpec = BUMP, threads: int = 1, cache: LCache | None = None,
                       check_conjugate: bool = True) -> DBoundResult:
    """|D(t,u,P)| against the bound over a grid in the regime T <= U, P <= (US)^(1/2+eps)."""
    cache = cache or LCache()
    t_grid, u_grid, P_grid = list(t_grid), list(u_grid), list(P_grid)
    records, ratios, cross, skipped = [], [], [], []
    conj_err = 0.0
    for t in t_grid:
        for u in u_grid:
            cp = ConductorParams(u, t)
            if cp.T > cp.U:
                raise ValueError(f"regime violation: T > U at t={t}, u={u}")
            P_star = cp.U ** (2 / 3) * cp.T ** (1 / 3)
            P_hat = crossover_point(cp)
            cross.append(P_hat / P_star)
            for P in P_grid:
                if P > (cp.U * cp.S) ** (0.5 + EPS):
                    skipped.append((t, u, P))
                    continue
                B, br = d_bound(cp, P)
                for psi, psi2 in twists:
                    psi, psi2 = UnitTwist.parse(psi), UnitTwist.parse(psi2)
                    D = d_sum(t, u, P, W, psi, psi2, cache, threads)
                    if check_conjugate:
                        Dm = d_sum(-t, -u, P, W, psi, psi2, cache, threads)
                        conj_err = max(conj_err, abs(Dm - D.conjugate()))
                    rec = ExperimentRecord(
                        "d_bound",
                        {"t": t, "u": u, "P": P, "psi": psi.label, "psi2": psi2.label},
                        D, B, notes=f"eps={EPS};branch={br};crossover={P_hat!r}")
                    records.append(rec)
                    ratios.append(rec.ratio)
    C_hat = max(ratios) if ratios else float("nan")
    return DBoundResult(records, C_hat, cross, conj_err, skipped)


# ---------------------------------------------------------------------------
# majorant of D by short-contour integrals of bilinear sums

def majorant(t: float, u: float, P: float, psi=UnitTwist.PSI_1, psi2=UnitTwist.PSI_1, eps: float = EPS,
             step: float = 0.05, m_scale: float = 1.0, contour_scale: float = 1.0) -> float:
    """R = sum_{+-} sum_m (X N(m))^eps / N(m) * double integral over s, w on eps + i[-X^eps, X^eps]
    of |bilinear sum|, with d0 up to P^(1+eps)/N(m)^2 and n up to (TP)^(1/2+eps).

    ``m_scale`` and ``contour_scale`` stretch the m-range and the contour length.
    """
    psi, psi2 = UnitTwist.parse(psi), UnitTwist.parse(psi2)
    cp = ConductorParams(u, t)
    Xc = cp.X
    H = Xc ** eps * contour_scale
    ys = np.arange(-H, H + step / 2, step)
    wts = np.full(ys.size, step)
    wts[[0, -1]] *= 0.5
    svals = eps + 1j * ys
    mr, mi = primary_lattice(int(math.floor(P ** (0.5 + eps) * m_scale)))
    Nmax = int(math.floor((cp.T * P) ** (0.5 + eps)))
    total = 0.0
    if Nmax < 1:
        return 0.0
    for sign in (1, -1):
        terms = []
        for a, b in zip(mr.tolist(), mi.tolist()):
            nm = a * a + b * b
            Mmax = int(math.floor(P ** (1 + eps) / nm ** 2))
            if Mmax < 1:
                terms.append(0.0)
                continue
            d0s, C, qn, (nr, ni) = _bilinear_data(Mmax, Nmax, psi)
            nn = (nr * nr + ni * ni).astype(float)
            dre = np.array([d.re for d in d0s])
            dim = np.array([d.im for d in d0s])
            ndd = (dre * dre + dim * dim).astype(float)
            # right[n, k] = N(n)^-(1/2 +- it - s_k)
            right = np.exp(-np.outer(np.log(nn), complex(0.5, sign * t) - svals))
            Y = C @ right
            Y *= np.exp(np.outer(np.log(qn), svals / 2))
            Y *= (_twist_values(psi2, dre, dim) * np.exp(-complex(0.5, u) * np.log(ndd)))[:, None]
            Z = Y.T @ np.exp(np.outer(np.log(ndd), svals))  # Z[k, j]: s_k, w_j
            integral = float(wts @ np.abs(Z) @ wts)
            terms.append((Xc * nm) ** eps / nm * integral)
        total += math.fsum(terms)
    return total


def majorant_compare(t: float, u: float, P: float, psi=UnitTwist.PSI_1, psi2=UnitTwist.PSI_1,
                     W: WeightSpec = BUMP, cache: LCache | None = None, threads: int = 1) -> ExperimentRecord:
    """|D(t,u,P)| / R as a record."""
    D = d_sum(t, u, P, W, psi, psi2, cache, threads)
    R = majorant(t, u, P, psi, psi2)
    if R == 0 and D != 0:
        raise ValueError("majorant vanished on a nonempty window")
    ratio = abs(D) / R if R > 0 else 0.0
    return ExperimentRecord("majorant", {"t": t, "u": u, "P": P, "psi": UnitTwist.parse(psi).label,
                                         "psi2": UnitTwist.parse(psi2).label},
                            D, R, ratio, f"eps={EPS};step=0.05")
