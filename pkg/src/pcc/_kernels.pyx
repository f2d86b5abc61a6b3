# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled kernels: Householder tridiagonalization, implicit QL, CRC-64.

The pure-Python twin lives in ``_kernels_py``; both expose the same three
functions with the same conventions.
"""
import numpy as np

from libc.math cimport fabs, sqrt, hypot
from libc.stdint cimport uint64_t

cdef double EPS = 2.220446049250313e-16


def tridiagonalize(a):
    """Reduce symmetric ``a`` to tridiagonal form ``a = Q T Q^T``.

    Returns ``(d, e, Q)``: diagonal of T, sub-diagonal with ``e[i] = T[i, i-1]``
    (``e[0] = 0``), and the orthogonal ``Q``.
    """
    cdef double[:, ::1] V = np.array(a, dtype=np.float64, order="C", copy=True)
    cdef Py_ssize_t n = V.shape[0]
    d_arr = np.zeros(n)
    e_arr = np.zeros(n)
    cdef double[::1] d = d_arr
    cdef double[::1] e = e_arr
    cdef Py_ssize_t i, j, k
    cdef double scale, h, f, g, hh

    if n == 0:
        return d_arr, e_arr, np.asarray(V)

    with nogil:
        for j in range(n):
            d[j] = V[n - 1, j]

        for i in range(n - 1, 0, -1):
            scale = 0.0
            h = 0.0
            for k in range(i):
                scale = scale + fabs(d[k])
            if scale == 0.0:
                e[i] = d[i - 1]
                for j in range(i):
                    d[j] = V[i - 1, j]
                    V[i, j] = 0.0
                    V[j, i] = 0.0
            else:
                for k in range(i):
                    d[k] = d[k] / scale
                    h = h + d[k] * d[k]
                f = d[i - 1]
                g = sqrt(h)
                if f > 0:
                    g = -g
                e[i] = scale * g
                h = h - f * g
                d[i - 1] = f - g
                for j in range(i):
                    e[j] = 0.0
                for j in range(i):
                    f = d[j]
                    V[j, i] = f
                    g = e[j] + V[j, j] * f
                    for k in range(j + 1, i):
                        g = g + V[k, j] * d[k]
                        e[k] = e[k] + V[k, j] * f
                    e[j] = g
                f = 0.0
                for j in range(i):
                    e[j] = e[j] / h
                    f = f + e[j] * d[j]
                hh = f / (h + h)
                for j in range(i):
                    e[j] = e[j] - hh * d[j]
                for j in range(i):
                    f = d[j]
                    g = e[j]
                    for k in range(j, i):
                        V[k, j] = V[k, j] - (f * e[k] + g * d[k])
                    d[j] = V[i - 1, j]
                    V[i, j] = 0.0
            d[i] = h

        # accumulate the Householder reflections
        for i in range(n - 1):
            V[n - 1, i] = V[i, i]
            V[i, i] = 1.0
            h = d[i + 1]
            if h != 0.0:
                for k in range(i + 1):
                    d[k] = V[k, i + 1] / h
                for j in range(i + 1):
                    g = 0.0
                    for k in range(i + 1):
                        g = g + V[k, i + 1] * V[k, j]
                    for k in range(i + 1):
                        V[k, j] = V[k, j] - g * d[k]
            for k in range(i + 1):
                V[k, i + 1] = 0.0
        for j in range(n):
            d[j] = V[n - 1, j]
            V[n - 1, j] = 0.0
        V[n - 1, n - 1] = 1.0
        e[0] = 0.0

    return d_arr, e_arr, np.asarray(V)


def tql(double[::1] d, double[::1] e, double[:, ::1] zt, int max_iter):
    """Diagonalize a symmetric tridiagonal matrix in place.

    ``d``/``e`` follow the ``tridiagonalize`` convention.  ``zt`` holds the
    current basis TRANSPOSED (row ``i`` is basis vector ``i``) and receives
    every rotation.  On success ``d`` holds the (unsorted) eigenvalues and
    the rows of ``zt`` the matching eigenvectors; returns -1.  On stall the
    index of the eigenvalue being resolved is returned.
    """
    cdef Py_ssize_t stalled
    with nogil:
        stalled = _tql(d, e, zt, max_iter)
    return stalled


cdef Py_ssize_t _tql(double[::1] d, double[::1] e, double[:, ::1] zt, int max_iter) noexcept nogil:
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t i, k, l, m, ncols = zt.shape[1]
    cdef int it
    cdef double f = 0.0, tst1 = 0.0
    cdef double g, p, r, dl1, h, c, c2, c3, el1, s, s2, zi, zi1
    if n == 0:
        return -1
    for i in range(1, n):
        e[i - 1] = e[i]
    e[n - 1] = 0.0
    for l in range(n):
        h = fabs(d[l]) + fabs(e[l])
        if h > tst1:
            tst1 = h
        m = l
        while m < n - 1:
            if fabs(e[m]) <= EPS * tst1:
                break
            m += 1
        if m > l:
            it = 0
            while True:
                it += 1
                if it > max_iter:
                    return l
                g = d[l]
                p = (d[l + 1] - g) / (2.0 * e[l])
                r = hypot(p, 1.0)
                if p < 0:
                    r = -r
                d[l] = e[l] / (p + r)
                d[l + 1] = e[l] * (p + r)
                dl1 = d[l + 1]
                h = g - d[l]
                for i in range(l + 2, n):
                    d[i] = d[i] - h
                f = f + h

                p = d[m]
                c = 1.0
                c2 = c
                c3 = c
                el1 = e[l + 1]
                s = 0.0
                s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * e[i]
                    h = c * p
                    r = hypot(p, e[i])
                    e[i + 1] = s * r
                    s = e[i] / r
                    c = p / r
                    p = c * d[i] - s * g
                    d[i + 1] = h + s * (c * g + s * d[i])
                    for k in range(ncols):
                        zi = zt[i, k]
                        zi1 = zt[i + 1, k]
                        zt[i + 1, k] = s * zi + c * zi1
                        zt[i, k] = c * zi - s * zi1
                p = -s * s2 * c3 * el1 * e[l] / dl1
                e[l] = s * p
                d[l] = c * p
                if fabs(e[l]) <= EPS * tst1:
                    break
        d[l] = d[l] + f
        e[l] = 0.0
    return -1


cdef uint64_t CRC_POLY = 0xC96C5795D7870F42ULL
cdef uint64_t CRC_TABLE[256]


cdef void _build_table():
    cdef uint64_t c
    cdef int i, j
    for i in range(256):
        c = <uint64_t>i
        for j in range(8):
            if c & 1:
                c = (c >> 1) ^ CRC_POLY
            else:
                c = c >> 1
        CRC_TABLE[i] = c


_build_table()


def crc64(const unsigned char[::1] data):
    """CRC-64/XZ of a byte buffer."""
    cdef uint64_t crc = 0xFFFFFFFFFFFFFFFFULL
    cdef Py_ssize_t i, n = data.shape[0]
    with nogil:
        for i in range(n):
            crc = CRC_TABLE[(crc ^ data[i]) & 0xFF] ^ (crc >> 8)
    return crc ^ 0xFFFFFFFFFFFFFFFFULL
