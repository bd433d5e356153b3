# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled versions of the hot kernels (same signatures as _pykernels)."""

import numpy as np
cimport numpy as cnp
from libc.math cimport log, exp, cos, sin, floor, sqrt, fabs
from libc.stdint cimport int64_t, int8_t

cnp.import_array()

SYMBOL_NORM_CEILING = 2**31


cdef inline int64_t _mod(int64_t a, int64_t n) nogil:
    cdef int64_t r = a % n
    if r < 0:
        r += n
    return r


cdef inline int64_t _floordiv(int64_t a, int64_t n) nogil:
    cdef int64_t q = a / n
    if (a % n != 0) and ((a < 0) != (n < 0)):
        q -= 1
    return q


cdef inline int64_t _gcd(int64_t a, int64_t b) nogil:
    cdef int64_t t
    if a < 0:
        a = -a
    if b < 0:
        b = -b
    while b:
        t = a % b
        a = b
        b = t
    return a


cdef inline int _jacobi(int64_t a, int64_t n) nogil:
    cdef int t = 1
    cdef int64_t tmp, r
    a = _mod(a, n)
    while a != 0:
        while (a & 1) == 0:
            a >>= 1
            r = n & 7
            if r == 3 or r == 5:
                t = -t
        tmp = a
        a = n
        n = tmp
        if (a & 3) == 3 and (n & 3) == 3:
            t = -t
        a = a % n
    if n == 1:
        return t
    return 0


cdef inline int _symbol(int64_t ar, int64_t ai, int64_t nr, int64_t ni) nogil:
    cdef int64_t g = _gcd(nr, ni)
    cdef int64_t xp = nr // g
    cdef int64_t yp = ni // g
    cdef int64_t M = xp * xp + yp * yp
    cdef int64_t u, v, w
    cdef int out = 1
    if g > 1:
        u = _mod(ar, g)
        v = _mod(ai, g)
        out = _jacobi(_mod(u * u + v * v, g), g)
        if out == 0:
            return 0
    if M == 1:
        return out
    u = _mod(ar, M)
    v = _mod(ai, M)
    w = _mod(u * _mod(yp, M) - v * _mod(xp, M), M)
    return out * _jacobi(_mod(yp, M), M) * _jacobi(w, M)


def jacobi_vec(a, n):
    """Elementwise Jacobi symbol (a/n) for odd positive n."""
    a_, n_ = np.broadcast_arrays(np.asarray(a, dtype=np.int64), np.asarray(n, dtype=np.int64))
    shape = a_.shape
    cdef const int64_t[::1] av = np.ascontiguousarray(a_).reshape(-1)
    cdef const int64_t[::1] nv = np.ascontiguousarray(n_).reshape(-1)
    out = np.empty(av.shape[0], dtype=np.int8)
    cdef int8_t[::1] ov = out
    cdef Py_ssize_t k
    with nogil:
        for k in range(av.shape[0]):
            ov[k] = <int8_t>_jacobi(av[k], nv[k])
    return out.reshape(shape)


def symbol_vec(are, aim, nre, nim):
    """Elementwise quadratic symbol (a/n) in Z[i] for odd n, N(n) < 2^31."""
    arrs = np.broadcast_arrays(*(np.asarray(v, dtype=np.int64) for v in (are, aim, nre, nim)))
    shape = arrs[0].shape
    cdef const int64_t[::1] ar = np.ascontiguousarray(arrs[0]).reshape(-1)
    cdef const int64_t[::1] ai = np.ascontiguousarray(arrs[1]).reshape(-1)
    cdef const int64_t[::1] nr = np.ascontiguousarray(arrs[2]).reshape(-1)
    cdef const int64_t[::1] ni = np.ascontiguousarray(arrs[3]).reshape(-1)
    out = np.empty(ar.shape[0], dtype=np.int8)
    cdef int8_t[::1] ov = out
    cdef Py_ssize_t k
    with nogil:
        for k in range(ar.shape[0]):
            ov[k] = <int8_t>_symbol(ar[k], ai[k], nr[k], ni[k])
    return out.reshape(shape)


def symbol_matrix(are, aim, nre, nim):
    """Matrix S[j, k] = (a_j / n_k)."""
    cdef const int64_t[::1] ar = np.ascontiguousarray(are, dtype=np.int64)
    cdef const int64_t[::1] ai = np.ascontiguousarray(aim, dtype=np.int64)
    cdef const int64_t[::1] nr = np.ascontiguousarray(nre, dtype=np.int64)
    cdef const int64_t[::1] ni = np.ascontiguousarray(nim, dtype=np.int64)
    out = np.empty((ar.shape[0], nr.shape[0]), dtype=np.int8)
    cdef int8_t[:, ::1] ov = out
    cdef Py_ssize_t j, k
    with nogil:
        for j in range(ar.shape[0]):
            for k in range(nr.shape[0]):
                ov[j, k] = <int8_t>_symbol(ar[j], ai[j], nr[k], ni[k])
    return out


cdef inline void _hermite(double x, double x0, double h, Py_ssize_t last,
                          const double[::1] vr, const double[::1] vi,
                          const double[::1] dr, const double[::1] di,
                          double* kr, double* ki) noexcept nogil:
    cdef double u = (x - x0) / h
    cdef double fk = floor(u)
    cdef Py_ssize_t k
    cdef double u2, u3, h00, h10, h01, h11
    if fk < 0 or fk >= last:
        kr[0] = 0.0
        ki[0] = 0.0
        return
    k = <Py_ssize_t>fk
    u = u - fk
    u2 = u * u
    u3 = u2 * u
    h00 = 2 * u3 - 3 * u2 + 1
    h10 = (u3 - 2 * u2 + u) * h
    h01 = -2 * u3 + 3 * u2
    h11 = (u3 - u2) * h
    kr[0] = h00 * vr[k] + h10 * dr[k] + h01 * vr[k + 1] + h11 * dr[k + 1]
    ki[0] = h00 * vi[k] + h10 * di[k] + h01 * vi[k + 1] + h11 * di[k + 1]


cdef inline void _neumaier(double* s, double* c, double x) noexcept nogil:
    cdef double t = s[0] + x
    if fabs(s[0]) >= fabs(x):
        c[0] += (s[0] - t) + x
    else:
        c[0] += (x - t) + s[0]
    s[0] = t


def afe_lattice_sum(X, int64_t p, int64_t g, int64_t r, table, int v2, double log_sqrt_q,
                    double s_re, double s_im, double x0, double h, vr, vi, dr, di):
    """Sum of chi(A) N(A)^-s K(log N(A) - log sqrt q) over A with N(A) <= X.

    A runs over (1+i)^e * B with B primary and e >= 0; chi(B) is read from
    ``table`` by residue class (Hermite data p, g, r) and chi(1+i) = v2.
    The elements a+bi and a-bi share a norm and are combined before any
    transcendental work.  Returns (real part, imaginary part, number of
    nonzero terms).
    """
    cdef int64_t Xc = X
    cdef const int8_t[::1] tab = np.ascontiguousarray(table, dtype=np.int8)
    cdef const double[::1] tvr = np.ascontiguousarray(vr, dtype=np.float64)
    cdef const double[::1] tvi = np.ascontiguousarray(vi, dtype=np.float64)
    cdef const double[::1] tdr = np.ascontiguousarray(dr, dtype=np.float64)
    cdef const double[::1] tdi = np.ascontiguousarray(di, dtype=np.float64)
    cdef Py_ssize_t last = tvr.shape[0] - 1
    cdef int64_t B = <int64_t>sqrt(<double>Xc)
    cdef int64_t b, a, amax, start, k1, k2, idx1, idx2, rem, N, M
    cdef int c, w
    cdef double sr = 0.0, cr = 0.0, si = 0.0, ci = 0.0
    cdef double lx, mag, ph, kr, ki, tr, ti
    cdef int64_t count = 0
    while (B + 1) * (B + 1) <= Xc:
        B += 1
    while B * B > Xc:
        B -= 1
    with nogil:
        b = 0
        while b <= B:
            rem = Xc - b * b
            amax = <int64_t>sqrt(<double>rem)
            while (amax + 1) * (amax + 1) <= rem:
                amax += 1
            while amax * amax > rem:
                amax -= 1
            start = _mod(1 - b, 4) - 4 * ((amax + 4) // 4)
            k1 = _floordiv(b, g)
            k2 = _floordiv(-b, g)
            idx1 = (b - k1 * g) * p
            idx2 = (-b - k2 * g) * p
            a = start
            while a <= amax:
                if a >= -amax:
                    c = tab[idx1 + _mod(a - k1 * r, p)]
                    if b > 0:
                        c += tab[idx2 + _mod(a - k2 * r, p)]
                    if c != 0:
                        N = a * a + b * b
                        M = N
                        w = c
                        while M <= Xc and w != 0:
                            lx = log(<double>M)
                            _hermite(lx - log_sqrt_q, x0, h, last, tvr, tvi, tdr, tdi, &kr, &ki)
                            mag = w * exp(-s_re * lx)
                            if s_im != 0.0:
                                ph = -s_im * lx
                                tr = mag * cos(ph)
                                ti = mag * sin(ph)
                                _neumaier(&sr, &cr, tr * kr - ti * ki)
                                _neumaier(&si, &ci, tr * ki + ti * kr)
                            else:
                                _neumaier(&sr, &cr, mag * kr)
                                _neumaier(&si, &ci, mag * ki)
                            count += 1
                            w = w * v2
                            M = M * 2
                a += 4
            b += 2
    return sr + cr, si + ci, count
