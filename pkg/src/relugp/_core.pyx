# cython: language_level=3
"""Compiled kernels: ReLU Gram assembly, Cholesky, triangular solves.

Mirrors :mod:`relugp._fallback` function for function. Inputs are validated
by the Python layer; these routines assume C-contiguous float64 arrays.
"""
import numpy as np

from libc.math cimport acos, sin, sqrt, M_PI


cdef inline double _relu_entry(double sq_x, double sq_y, double inner,
                               double sw, double sb, double scale) nogil:
    cdef double var_x = sb + scale * sq_x
    cdef double var_y = sb + scale * sq_y
    cdef double cross = sb + scale * inner
    cdef double norm = sqrt(var_x * var_y)
    cdef double c = cross / norm
    if c > 1.0:
        c = 1.0
    elif c < -1.0:
        c = -1.0
    cdef double phi = acos(c)
    return sb + sw * norm / (2.0 * M_PI) * (sin(phi) + (M_PI - phi) * c)


def relu_gram_sym(const double[:, ::1] inner, const double[::1] sq,
                  double sw, double sb, double fan_in):
    cdef Py_ssize_t n = inner.shape[0]
    cdef Py_ssize_t i, j
    cdef double scale = sw / fan_in
    cdef double v
    out = np.empty((n, n), dtype=np.float64)
    cdef double[:, ::1] k = out
    with nogil:
        for i in range(n):
            for j in range(i, n):
                v = _relu_entry(sq[i], sq[j], inner[i, j], sw, sb, scale)
                k[i, j] = v
                k[j, i] = v
    return out


def relu_gram_cross(const double[:, ::1] inner, const double[::1] sq_a,
                    const double[::1] sq_b, double sw, double sb, double fan_in):
    cdef Py_ssize_t m = inner.shape[0]
    cdef Py_ssize_t n = inner.shape[1]
    cdef Py_ssize_t i, j
    cdef double scale = sw / fan_in
    out = np.empty((m, n), dtype=np.float64)
    cdef double[:, ::1] k = out
    with nogil:
        for i in range(m):
            for j in range(n):
                k[i, j] = _relu_entry(sq_a[i], sq_b[j], inner[i, j], sw, sb, scale)
    return out


cdef inline double _dot(const double* a, const double* b, Py_ssize_t n) nogil:
    cdef double s0 = 0.0, s1 = 0.0
    cdef Py_ssize_t k = 0
    while k + 2 <= n:
        s0 += a[k] * b[k]
        s1 += a[k + 1] * b[k + 1]
        k += 2
    if k < n:
        s0 += a[k] * b[k]
    return s0 + s1


def cholesky(const double[:, ::1] a):
    """Column-oriented (Crout) Cholesky; returns ``(L, bad_row)``, -1 on success.

    Columns are produced in pairs and rows in blocks of four so that every
    row segment loaded from memory feeds eight multiply-adds.
    """
    cdef Py_ssize_t n = a.shape[0]
    cdef Py_ssize_t i, j, k
    cdef Py_ssize_t bad = -1
    cdef double d0, d1, s, x1
    cdef double p0, p1, p2, p3, q0, q1, q2, q3
    cdef const double* l0
    cdef const double* l1
    out = np.zeros((n, n), dtype=np.float64)
    cdef double[:, ::1] L = out
    j = 0
    with nogil:
        while j < n:
            l0 = &L[j, 0]
            s = a[j, j] - _dot(l0, l0, j)
            if not (s > 0.0):
                bad = j
                break
            d0 = sqrt(s)
            L[j, j] = d0
            if j + 1 == n:
                break
            l1 = &L[j + 1, 0]
            L[j + 1, j] = (a[j + 1, j] - _dot(l1, l0, j)) / d0
            s = a[j + 1, j + 1] - _dot(l1, l1, j + 1)
            if not (s > 0.0):
                bad = j + 1
                break
            d1 = sqrt(s)
            L[j + 1, j + 1] = d1
            x1 = L[j + 1, j]
            i = j + 2
            while i + 4 <= n:
                p0 = a[i, j]
                p1 = a[i + 1, j]
                p2 = a[i + 2, j]
                p3 = a[i + 3, j]
                q0 = a[i, j + 1]
                q1 = a[i + 1, j + 1]
                q2 = a[i + 2, j + 1]
                q3 = a[i + 3, j + 1]
                for k in range(j):
                    p0 -= L[i, k] * l0[k]
                    q0 -= L[i, k] * l1[k]
                    p1 -= L[i + 1, k] * l0[k]
                    q1 -= L[i + 1, k] * l1[k]
                    p2 -= L[i + 2, k] * l0[k]
                    q2 -= L[i + 2, k] * l1[k]
                    p3 -= L[i + 3, k] * l0[k]
                    q3 -= L[i + 3, k] * l1[k]
                p0 /= d0
                p1 /= d0
                p2 /= d0
                p3 /= d0
                L[i, j] = p0
                L[i + 1, j] = p1
                L[i + 2, j] = p2
                L[i + 3, j] = p3
                L[i, j + 1] = (q0 - p0 * x1) / d1
                L[i + 1, j + 1] = (q1 - p1 * x1) / d1
                L[i + 2, j + 1] = (q2 - p2 * x1) / d1
                L[i + 3, j + 1] = (q3 - p3 * x1) / d1
                i += 4
            while i < n:
                p0 = (a[i, j] - _dot(&L[i, 0], l0, j)) / d0
                L[i, j] = p0
                L[i, j + 1] = (a[i, j + 1] - _dot(&L[i, 0], l1, j) - p0 * x1) / d1
                i += 1
            j += 2
    return out, bad


def solve_lower(const double[:, ::1] L, const double[:, ::1] b):
    """Forward substitution for ``L X = B`` with ``B`` of shape (n, m)."""
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t m = b.shape[1]
    cdef Py_ssize_t i, k, c
    cdef double lik, d
    out = np.array(b, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] x = out
    with nogil:
        for i in range(n):
            for k in range(i):
                lik = L[i, k]
                if lik != 0.0:
                    for c in range(m):
                        x[i, c] -= lik * x[k, c]
            d = L[i, i]
            for c in range(m):
                x[i, c] /= d
    return out


def solve_upper_t(const double[:, ::1] L, const double[:, ::1] b):
    """Back substitution for ``L^T X = B`` using the lower factor ``L``."""
    cdef Py_ssize_t n = b.shape[0]
    cdef Py_ssize_t m = b.shape[1]
    cdef Py_ssize_t i, k, c
    cdef double lki, d
    out = np.array(b, dtype=np.float64, copy=True, order="C")
    cdef double[:, ::1] x = out
    with nogil:
        for i in range(n - 1, -1, -1):
            for k in range(i + 1, n):
                lki = L[k, i]
                if lki != 0.0:
                    for c in range(m):
                        x[i, c] -= lki * x[k, c]
            d = L[i, i]
            for c in range(m):
                x[i, c] /= d
    return out
