# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot kernels: segment reductions, greedy max-min selection, brute kNN.

Signature-compatible with ``_py_kernels``. Parallel paths split work by
segment (or query) with disjoint output rows, so any thread count produces
bit-identical results. The GIL is released during all inner loops.
"""

import numpy as np

cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport sqrt

cnp.import_array()

BACKEND_NAME = "compiled"

ctypedef cnp.int64_t i64
ctypedef cnp.float64_t f64


cdef inline void _sum_one(const f64[:, ::1] values, const i64[::1] order,
                          i64 lo, i64 hi, f64[:, ::1] out, Py_ssize_t g) noexcept nogil:
    cdef Py_ssize_t c = values.shape[1]
    cdef Py_ssize_t j, p
    cdef i64 row
    for p in range(c):
        out[g, p] = 0.0
    for j in range(lo, hi):
        row = order[j]
        for p in range(c):
            out[g, p] += values[row, p]


def segment_sum(const f64[:, ::1] values, const i64[::1] order,
                const i64[::1] starts, int threads=1):
    cdef Py_ssize_t m = starts.shape[0] - 1
    out_arr = np.empty((m, values.shape[1]), dtype=np.float64)
    cdef f64[:, ::1] out = out_arr
    cdef Py_ssize_t g
    if threads <= 1:
        with nogil:
            for g in range(m):
                _sum_one(values, order, starts[g], starts[g + 1], out, g)
    else:
        for g in prange(m, nogil=True, num_threads=threads, schedule='static'):
            _sum_one(values, order, starts[g], starts[g + 1], out, g)
    return out_arr


cdef inline void _max_one(const f64[:, ::1] values, const i64[::1] order,
                          i64 lo, i64 hi, f64[:, ::1] out, i64[:, ::1] argrows,
                          Py_ssize_t g) noexcept nogil:
    cdef Py_ssize_t c = values.shape[1]
    cdef Py_ssize_t j, p
    cdef i64 row
    row = order[lo]
    for p in range(c):
        out[g, p] = values[row, p]
        argrows[g, p] = row
    for j in range(lo + 1, hi):
        row = order[j]
        for p in range(c):
            if values[row, p] > out[g, p]:
                out[g, p] = values[row, p]
                argrows[g, p] = row
            elif values[row, p] == out[g, p] and row < argrows[g, p]:
                argrows[g, p] = row


def segment_max(const f64[:, ::1] values, const i64[::1] order,
                const i64[::1] starts, int threads=1):
    cdef Py_ssize_t m = starts.shape[0] - 1
    out_arr = np.empty((m, values.shape[1]), dtype=np.float64)
    arg_arr = np.empty((m, values.shape[1]), dtype=np.int64)
    cdef f64[:, ::1] out = out_arr
    cdef i64[:, ::1] argrows = arg_arr
    cdef Py_ssize_t g
    if threads <= 1:
        with nogil:
            for g in range(m):
                _max_one(values, order, starts[g], starts[g + 1], out, argrows, g)
    else:
        for g in prange(m, nogil=True, num_threads=threads, schedule='static'):
            _max_one(values, order, starts[g], starts[g + 1], out, argrows, g)
    return out_arr, arg_arr


def fps_select(const f64[:, ::1] coords, Py_ssize_t m, Py_ssize_t seed_index):
    # selected entries are held at -1 so the argmax only ever picks
    # unselected points (duplicates would otherwise re-select at distance 0)
    cdef Py_ssize_t n = coords.shape[0]
    sel_arr = np.empty(m, dtype=np.int64)
    d2_arr = np.empty(n, dtype=np.float64)
    cdef i64[::1] sel = sel_arr
    cdef f64[::1] d2 = d2_arr
    cdef Py_ssize_t i, j, best
    cdef double dx, dy, dz, d, best_d
    with nogil:
        sel[0] = seed_index
        for i in range(n):
            dx = coords[i, 0] - coords[seed_index, 0]
            dy = coords[i, 1] - coords[seed_index, 1]
            dz = coords[i, 2] - coords[seed_index, 2]
            d2[i] = dx * dx + dy * dy + dz * dz
        d2[seed_index] = -1.0
        for j in range(1, m):
            best = 0
            best_d = d2[0]
            for i in range(1, n):
                if d2[i] > best_d:
                    best_d = d2[i]
                    best = i
            sel[j] = best
            for i in range(n):
                dx = coords[i, 0] - coords[best, 0]
                dy = coords[i, 1] - coords[best, 1]
                dz = coords[i, 2] - coords[best, 2]
                d = dx * dx + dy * dy + dz * dz
                if d < d2[i]:
                    d2[i] = d
            d2[best] = -1.0
        for i in range(n):
            if d2[i] < 0.0:
                d2[i] = 0.0
            d2[i] = sqrt(d2[i])
    return sel_arr, d2_arr


cdef inline void _knn_one(const f64[:, ::1] queries, const f64[:, ::1] refs,
                          Py_ssize_t qi, Py_ssize_t k,
                          i64[:, ::1] idx, f64[:, ::1] dist) noexcept nogil:
    cdef Py_ssize_t n = refs.shape[0]
    cdef Py_ssize_t filled = 0, j, p
    cdef double dx, dy, dz, d2
    for j in range(n):
        dx = queries[qi, 0] - refs[j, 0]
        dy = queries[qi, 1] - refs[j, 1]
        dz = queries[qi, 2] - refs[j, 2]
        d2 = dx * dx + dy * dy + dz * dz
        if filled < k:
            p = filled
            filled += 1
        elif d2 < dist[qi, k - 1]:
            p = k - 1
        else:
            # equal-distance candidates carry a larger index and lose
            continue
        while p > 0 and dist[qi, p - 1] > d2:
            dist[qi, p] = dist[qi, p - 1]
            idx[qi, p] = idx[qi, p - 1]
            p -= 1
        dist[qi, p] = d2
        idx[qi, p] = j
    for p in range(k):
        dist[qi, p] = sqrt(dist[qi, p])


def knn_brute(const f64[:, ::1] queries, const f64[:, ::1] refs,
              Py_ssize_t k, int threads=1):
    cdef Py_ssize_t q = queries.shape[0]
    idx_arr = np.empty((q, k), dtype=np.int64)
    dist_arr = np.empty((q, k), dtype=np.float64)
    cdef i64[:, ::1] idx = idx_arr
    cdef f64[:, ::1] dist = dist_arr
    cdef Py_ssize_t qi
    if threads <= 1:
        with nogil:
            for qi in range(q):
                _knn_one(queries, refs, qi, k, idx, dist)
    else:
        for qi in prange(q, nogil=True, num_threads=threads, schedule='static'):
            _knn_one(queries, refs, qi, k, idx, dist)
    return idx_arr, dist_arr
