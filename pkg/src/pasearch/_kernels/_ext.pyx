# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: endpoint-draw resolution, adjacency transpose,
compensated prefix sums.  Semantics documented in the fallback module."""

import numpy as np

cimport numpy as cnp

cnp.import_array()


def resolve_left_choices(cnp.uint32_t[::1] r, Py_ssize_t m):
    cdef Py_ssize_t mn = r.shape[0]
    cdef cnp.ndarray[cnp.uint32_t, ndim=1] out_arr = np.empty(mn, dtype=np.uint32)
    cdef cnp.uint32_t[::1] out = out_arr
    cdef Py_ssize_t e, k
    cdef unsigned long long rv
    for e in range(mn):
        rv = r[e]
        if rv == <unsigned long long>(2 * e + 1):
            out[e] = <cnp.uint32_t>(e // m + 1)          # self-loop
        elif rv & 1:
            k = <Py_ssize_t>((rv - 1) // 2)              # owner slot of edge k
            out[e] = <cnp.uint32_t>(k // m + 1)
        else:
            out[e] = out[<Py_ssize_t>(rv // 2) - 1]      # left slot, already resolved
    return out_arr


def build_right_csr(cnp.uint32_t[::1] left, Py_ssize_t n, Py_ssize_t m):
    cdef Py_ssize_t mn = left.shape[0]
    cdef cnp.ndarray[cnp.int64_t, ndim=1] indptr_arr = np.zeros(n + 1, dtype=np.int64)
    cdef cnp.int64_t[::1] indptr = indptr_arr
    cdef cnp.ndarray[cnp.uint32_t, ndim=1] owners_arr = np.empty(mn, dtype=np.uint32)
    cdef cnp.uint32_t[::1] owners = owners_arr
    cdef cnp.ndarray[cnp.int64_t, ndim=1] fill_arr = np.empty(n, dtype=np.int64)
    cdef cnp.int64_t[::1] fill = fill_arr
    cdef Py_ssize_t e, v

    for e in range(mn):
        indptr[left[e]] += 1
    for v in range(n):
        indptr[v + 1] += indptr[v]
        fill[v] = indptr[v]
    for e in range(mn):
        v = left[e] - 1
        owners[fill[v]] = <cnp.uint32_t>(e // m + 1)
        fill[v] += 1
    return indptr_arr, owners_arr


def compensated_cumsum(cnp.float64_t[::1] x):
    """Neumaier-compensated running sum; error stays near one ulp of the total."""
    cdef Py_ssize_t k, size = x.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out_arr = np.empty(size, dtype=np.float64)
    cdef cnp.float64_t[::1] out = out_arr
    cdef double s = 0.0, c = 0.0, t, v
    for k in range(size):
        v = x[k]
        t = s + v
        if (s if s >= 0 else -s) >= (v if v >= 0 else -v):
            c += (s - t) + v
        else:
            c += (v - t) + s
        s = t
        out[k] = s + c
    return out_arr
