# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: uniform conversion, inverse-CDF table search, and
the hockey-stick positive-part sums. Semantics match onesided._kernels_py
exactly (integer outputs bit-identical, floats identical up to summation
order)."""

import numpy as np

cimport numpy as cnp
from libc.math cimport exp

NAME = "cython"

cdef double _INV53 = 1.0 / 9007199254740992.0  # 2^-53


def uniforms_from_raw(raw):
    cdef cnp.uint64_t[::1] r = np.ascontiguousarray(raw, dtype=np.uint64)
    cdef Py_ssize_t i, n = r.shape[0]
    out = np.empty(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        o[i] = <double>(r[i] >> 11) * _INV53
    return out


def inverse_cdf_lookup(cdf, u):
    cdef double[::1] c = np.ascontiguousarray(cdf, dtype=np.float64)
    cdef double[::1] uu = np.ascontiguousarray(u, dtype=np.float64)
    cdef Py_ssize_t n = c.shape[0], m = uu.shape[0]
    cdef Py_ssize_t j, lo, hi, mid
    cdef double x
    out = np.empty(m, dtype=np.int64)
    cdef cnp.int64_t[::1] o = out
    for j in range(m):
        x = uu[j]
        lo = 0
        hi = n
        while lo < hi:  # first index with cdf[idx] > x (bisect_right)
            mid = (lo + hi) >> 1
            if c[mid] <= x:
                lo = mid + 1
            else:
                hi = mid
        o[j] = lo if lo < n else n - 1
    return out


def hockey_stick_pair(probs, shift, epsilon):
    cdef double[::1] p = np.ascontiguousarray(probs, dtype=np.float64)
    cdef Py_ssize_t i, s = shift, n = p.shape[0]
    cdef double e = exp(epsilon), d_low = 0.0, d_high = 0.0, t
    for i in range(n):
        t = p[i] - (e * p[i - s] if i >= s else 0.0)
        if t > 0.0:
            d_low += t
        t = p[i] - (e * p[i + s] if i + s < n else 0.0)
        if t > 0.0:
            d_high += t
    return d_low, d_high
