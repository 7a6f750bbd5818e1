# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled hot kernels over the per-node CSR day arrays.

Same contract as trendcast._pykernels; selected at import by trendcast.kernels.
"""

from libc.math cimport exp

import numpy as np

BACKEND = "c"


cdef inline long long _upper_bound(const int[::1] days, long long lo, long long hi, long t) nogil:
    # first index in [lo, hi) with days[index] > t
    cdef long long mid
    while lo < hi:
        mid = (lo + hi) // 2
        if days[mid] <= t:
            lo = mid + 1
        else:
            hi = mid
    return lo


def prefix_counts(const long long[::1] indptr, const int[::1] days,
                  const int[::1] link_node, long t):
    """Per-node count of link days <= t. link_node is unused here (the pure
    backend needs it); kept for a uniform signature."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out = np.empty(n, dtype=np.int64)
    cdef long long[::1] out_v = out
    cdef Py_ssize_t i
    with nogil:
        for i in range(n):
            out_v[i] = _upper_bound(days, indptr[i], indptr[i + 1], t) - indptr[i]
    return out


def decay_scores(const long long[::1] indptr, const int[::1] days,
                 const int[::1] link_node, long t, double gamma):
    """Per-node sum of exp(gamma * (day - t)) over link days <= t.

    Terms are accumulated oldest-first (smallest magnitude first), matching
    the pure backend's accumulation order.
    """
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef Py_ssize_t i
    cdef long long j, cut
    cdef double acc
    with nogil:
        for i in range(n):
            cut = _upper_bound(days, indptr[i], indptr[i + 1], t)
            acc = 0.0
            for j in range(indptr[i], cut):
                acc += exp(gamma * <double>(days[j] - t))
            out_v[i] = acc
    return out


def decay_scores_grouped(const long long[::1] indptr, const int[::1] days,
                         const int[::1] link_node, long t, double gamma):
    """Day-grouped variant of decay_scores: one exp per distinct day,
    weighted by the day's link count. Equivalent within rounding."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] out_v = out
    cdef Py_ssize_t i
    cdef long long j, cut, run
    cdef int d0
    cdef double acc
    with nogil:
        for i in range(n):
            cut = _upper_bound(days, indptr[i], indptr[i + 1], t)
            acc = 0.0
            j = indptr[i]
            while j < cut:
                d0 = days[j]
                run = 1
                j += 1
                while j < cut and days[j] == d0:
                    run += 1
                    j += 1
                acc += <double>run * exp(gamma * <double>(d0 - t))
            out_v[i] = acc
    return out
