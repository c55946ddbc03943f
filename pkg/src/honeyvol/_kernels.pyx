# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled versions of the membership and interval kernels."""

import numpy as np
cimport numpy as cnp

cnp.import_array()


def inside(double[:, ::1] A, double[::1] b, double[:, ::1] Y):
    cdef Py_ssize_t n = Y.shape[0], R = A.shape[0], k = A.shape[1]
    cdef Py_ssize_t i, r, j
    cdef double s
    out = np.ones(n, dtype=np.bool_)
    cdef cnp.npy_bool[::1] o = out
    for i in range(n):
        for r in range(R):
            s = 0.0
            for j in range(k):
                s += A[r, j] * Y[i, j]
            if s > b[r] + 1e-12:
                o[i] = 0
                break
    return out


def inside_paired(double[:, ::1] A, double[:, ::1] B, double[:, ::1] Y):
    cdef Py_ssize_t n = Y.shape[0], R = A.shape[0], k = A.shape[1]
    cdef Py_ssize_t i, r, j
    cdef double s
    out = np.ones(n, dtype=np.bool_)
    cdef cnp.npy_bool[::1] o = out
    for i in range(n):
        for r in range(R):
            s = 0.0
            for j in range(k):
                s += A[r, j] * Y[i, j]
            if s > B[r, i] + 1e-12:
                o[i] = 0
                break
    return out


def interval_lengths(double[::1] a, double[:, ::1] B):
    cdef Py_ssize_t R = B.shape[0], n = B.shape[1]
    cdef Py_ssize_t i, r
    cdef double lo, hi, v
    out = np.zeros(n, dtype=np.float64)
    cdef double[::1] o = out
    for i in range(n):
        lo = -1e300
        hi = 1e300
        for r in range(R):
            if a[r] > 0:
                v = B[r, i] / a[r]
                if v < hi:
                    hi = v
            elif a[r] < 0:
                v = B[r, i] / a[r]
                if v > lo:
                    lo = v
            elif B[r, i] < -1e-12:
                hi = lo
                break
        o[i] = hi - lo if hi > lo else 0.0
    return out


def count_inside(double[:, ::1] A, double[::1] b, double[:, ::1] Y):
    return int(np.count_nonzero(inside(A, b, Y)))
