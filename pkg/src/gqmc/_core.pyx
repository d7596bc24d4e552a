# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels: Kahan-compensated pair sums and the covering scan.

Same API as gqmc._core_py. All reductions run in row-major order with Kahan
compensation, so results are independent of chunking and bitwise reproducible.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport acos, fmax, fmin, sqrt

cnp.import_array()

BACKEND = "compiled"


cdef inline double _clip01(double x) nogil:
    return fmin(fmax(x, 0.0), 1.0)


def kahan_sum(values):
    """Kahan-compensated sum of a 1-D array in index order."""
    cdef const double[::1] v = np.ascontiguousarray(values, dtype=np.float64).ravel()
    cdef double s = 0.0, c = 0.0, y, t
    cdef Py_ssize_t i
    for i in range(v.shape[0]):
        y = v[i] - c
        t = s + y
        c = (t - s) - y
        s = t
    return s


def moment_sums(G, int jmax):
    """Sums of elementwise powers of G: out[j-1] = sum_ab G_ab^j, j = 1..jmax.

    One pass over the matrix; per power a Kahan accumulator, entries visited
    in row-major order.
    """
    cdef const double[:, ::1] g = np.ascontiguousarray(G, dtype=np.float64)
    cdef Py_ssize_t n0 = g.shape[0], n1 = g.shape[1]
    if jmax < 1:
        return np.zeros(0)
    sums_arr = np.zeros(jmax)
    comps_arr = np.zeros(jmax)
    cdef double[::1] sums = sums_arr
    cdef double[::1] comps = comps_arr
    cdef double x, p, y, t
    cdef Py_ssize_t a, b, j
    with nogil:
        for a in range(n0):
            for b in range(n1):
                x = g[a, b]
                p = 1.0
                for j in range(jmax):
                    p *= x
                    y = p - comps[j]
                    t = sums[j] + y
                    comps[j] = (t - sums[j]) - y
                    sums[j] = t
    return sums_arr


def weighted_double_sum(K, w):
    """sum_ab w_a w_b K_ab with Kahan accumulation in row-major order."""
    cdef const double[:, ::1] k = np.ascontiguousarray(K, dtype=np.float64)
    cdef const double[::1] wv = np.ascontiguousarray(w, dtype=np.float64)
    cdef Py_ssize_t n = k.shape[0]
    if k.shape[1] != n or wv.shape[0] != n:
        raise ValueError("K must be n x n and w length n")
    cdef double s = 0.0, c = 0.0, y, t, wa
    cdef Py_ssize_t a, b
    with nogil:
        for a in range(n):
            wa = wv[a]
            for b in range(n):
                y = wa * wv[b] * k[a, b] - c
                t = s + y
                c = (t - s) - y
                s = t
    return s


def min_dists(bases, probes):
    """Per-probe minimum geodesic distance to a stack of design points.

    ``bases`` is (n, m, k) orthonormal, ``probes`` is (c, m, k) orthonormal.
    Closed-form principal angles for k <= 2; larger k is handled by the
    python backend.
    """
    cdef const double[:, :, ::1] A = np.ascontiguousarray(bases, dtype=np.float64)
    cdef const double[:, :, ::1] B = np.ascontiguousarray(probes, dtype=np.float64)
    cdef Py_ssize_t n = A.shape[0], m = A.shape[1], k = A.shape[2]
    cdef Py_ssize_t c = B.shape[0]
    if B.shape[1] != m or B.shape[2] != k:
        raise ValueError("probe stack shape does not match design bases")
    if k > 2:
        raise NotImplementedError("compiled scan supports k <= 2")
    out_arr = np.empty(c)
    cdef double[::1] out = out_arr
    cdef double t00, t01, t10, t11, frob2, det, disc, y_hi, y_lo, d2, best, cos1
    cdef Py_ssize_t b, i, a
    with nogil:
        for b in range(c):
            best = 1e300
            for i in range(n):
                if k == 1:
                    cos1 = 0.0
                    for a in range(m):
                        cos1 += A[i, a, 0] * B[b, a, 0]
                    if cos1 < 0.0:
                        cos1 = -cos1
                    d2 = acos(_clip01(cos1))
                    d2 = d2 * d2
                else:
                    t00 = 0.0; t01 = 0.0; t10 = 0.0; t11 = 0.0
                    for a in range(m):
                        t00 += A[i, a, 0] * B[b, a, 0]
                        t01 += A[i, a, 0] * B[b, a, 1]
                        t10 += A[i, a, 1] * B[b, a, 0]
                        t11 += A[i, a, 1] * B[b, a, 1]
                    frob2 = t00 * t00 + t01 * t01 + t10 * t10 + t11 * t11
                    det = t00 * t11 - t01 * t10
                    disc = frob2 * frob2 - 4.0 * det * det
                    disc = sqrt(fmax(disc, 0.0))
                    y_hi = _clip01(0.5 * (frob2 + disc))
                    y_lo = _clip01(0.5 * (frob2 - disc))
                    d2 = acos(sqrt(y_hi)) ** 2 + acos(sqrt(y_lo)) ** 2
                if d2 < best:
                    best = d2
            out[b] = sqrt(2.0 * best)
    return out_arr
