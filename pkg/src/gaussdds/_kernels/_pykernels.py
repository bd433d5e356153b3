"""numpy implementations of the hot kernels.

These mirror the compiled module function for function.  They are the
fallback when the extension is missing and the reference side of the
backend-equivalence tests.
"""

from __future__ import annotations

import math

import numpy as np

# batch symbol kernels require norms below this bound so that every
# intermediate product fits in a signed 64-bit integer
SYMBOL_NORM_CEILING = 2**31


def jacobi_vec(a, n) -> np.ndarray:
    """Elementwise Jacobi symbol (a/n) for odd positive n."""
    a, n = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(n, dtype=np.int64))
    shape = a.shape
    a = np.mod(a, n).reshape(-1)
    n = n.reshape(-1).copy()
    t = np.ones(a.size, dtype=np.int8)
    idx = np.nonzero(a)[0]
    while idx.size:
        aa, nn, tt = a[idx], n[idx], t[idx]
        # strip factors of two
        while True:
            ev = ((aa & 1) == 0) & (aa != 0)
            if not ev.any():
                break
            aa = np.where(ev, aa >> 1, aa)
            n8 = nn & 7
            tt = np.where(ev & ((n8 == 3) | (n8 == 5)), -tt, tt)
        tt = np.where(((aa & 3) == 3) & ((nn & 3) == 3), -tt, tt)
        aa, nn = np.mod(nn, aa), aa
        a[idx], n[idx], t[idx] = aa, nn, tt
        idx = idx[aa != 0]
    return np.where(n == 1, t, 0).astype(np.int8).reshape(shape)


def symbol_vec(are, aim, nre, nim) -> np.ndarray:
    """Elementwise quadratic symbol (a/n) in Z[i] for odd n, N(n) < 2^31.

    With g = gcd(x, y), n = g*(x' + i y') and M = x'^2 + y'^2 the residue
    ring Z[i]/(x' + i y') is Z/M, so only rational Jacobi symbols appear:
    (a/n) = (N(a)/g) * (y'/M) * ((a_re y' - a_im x')/M).
    """
    are, aim, nre, nim = np.broadcast_arrays(
        *(np.asarray(v, dtype=np.int64) for v in (are, aim, nre, nim))
    )
    g = np.gcd(nre, nim)
    xp = nre // g
    yp = nim // g
    M = xp * xp + yp * yp
    ar_g = np.mod(are, g)
    ai_g = np.mod(aim, g)
    ng = np.mod(ar_g * ar_g + ai_g * ai_g, g)
    out = jacobi_vec(ng.ravel(), g.ravel()).reshape(g.shape)
    ar_m = np.mod(are, M)
    ai_m = np.mod(aim, M)
    yp_m = np.mod(yp, M)
    xp_m = np.mod(xp, M)
    v = np.mod(ar_m * yp_m - ai_m * xp_m, M)
    out = out * jacobi_vec(yp_m.ravel(), M.ravel()).reshape(M.shape)
    out = out * jacobi_vec(v.ravel(), M.ravel()).reshape(M.shape)
    return out.astype(np.int8)


def symbol_matrix(are, aim, nre, nim) -> np.ndarray:
    """Matrix S[j, k] = (a_j / n_k)."""
    are = np.asarray(are, dtype=np.int64)
    aim = np.asarray(aim, dtype=np.int64)
    nre = np.asarray(nre, dtype=np.int64)
    nim = np.asarray(nim, dtype=np.int64)
    out = np.empty((are.size, nre.size), dtype=np.int8)
    for j in range(are.size):
        out[j] = symbol_vec(are[j], aim[j], nre, nim)
    return out


def _hermite(x, x0, h, vr, vi, dr, di):
    """Cubic Hermite interpolation of a tabulated complex function; 0 past the end."""
    u = (x - x0) / h
    k = np.floor(u).astype(np.int64)
    last = vr.size - 1
    inside = (k >= 0) & (k < last)
    k = np.clip(k, 0, last - 1)
    u = u - k
    u2 = u * u
    u3 = u2 * u
    h00 = 2 * u3 - 3 * u2 + 1
    h10 = (u3 - 2 * u2 + u) * h
    h01 = -2 * u3 + 3 * u2
    h11 = (u3 - u2) * h
    re = h00 * vr[k] + h10 * dr[k] + h01 * vr[k + 1] + h11 * dr[k + 1]
    im = h00 * vi[k] + h10 * di[k] + h01 * vi[k + 1] + h11 * di[k + 1]
    return np.where(inside, re, 0.0), np.where(inside, im, 0.0)


def afe_lattice_sum(X, p, g, r, table, v2, log_sqrt_q, s_re, s_im, x0, h, vr, vi, dr, di):
    """Sum of chi(A) N(A)^-s K(log N(A) - log sqrt q) over A with N(A) <= X.

    A runs over (1+i)^e * B with B primary and e >= 0; chi(B) is read from
    ``table`` by residue class (Hermite data p, g, r) and chi(1+i) = v2.
    Conjugate pairs are combined first.  Returns (real part, imaginary
    part, number of nonzero terms).
    """
    X = int(X)
    table = np.asarray(table, dtype=np.int8)
    vr, vi, dr, di = (np.asarray(v, dtype=float) for v in (vr, vi, dr, di))
    B = math.isqrt(X)
    parts_re: list[float] = []
    parts_im: list[float] = []
    count = 0
    for b in range(0, B + 1, 2):
        rem = X - b * b
        amax = math.isqrt(rem)
        start = (1 - b) % 4 - 4 * ((amax + 4) // 4)
        a = np.arange(start, amax + 1, 4, dtype=np.int64)
        a = a[a >= -amax]
        if a.size == 0:
            continue
        # a+bi and a-bi share a norm: combine their coefficients
        k = b // g
        c = table[(b - k * g) * p + np.mod(a - k * r, p)].astype(np.int64)
        if b > 0:
            k = (-b) // g
            c = c + table[(-b - k * g) * p + np.mod(a - k * r, p)]
        live = c != 0
        if not live.any():
            continue
        a = a[live]
        c = c[live]
        nrm = (a * a + b * b).astype(float)
        scale = 1.0
        while True:
            ok = nrm * scale <= X
            if not ok.any():
                break
            lx = np.log(nrm[ok] * scale)
            kr, ki = _hermite(lx - log_sqrt_q, x0, h, vr, vi, dr, di)
            mag = c[ok] * np.exp(-s_re * lx)
            ph = -s_im * lx
            cr, ci = mag * np.cos(ph), mag * np.sin(ph)
            parts_re.append(float(np.sum(cr * kr - ci * ki)))
            parts_im.append(float(np.sum(cr * ki + ci * kr)))
            count += int(ok.sum())
            if v2 == 0:
                break
            c = c * v2
            scale *= 2.0
    return math.fsum(parts_re), math.fsum(parts_im), count
