"""Pure-Python twin of the compiled kernels.

Same signatures and conventions as ``pcc._kernels``.  Householder steps are
vectorized with numpy; the QL chase runs its scalar recurrence in Python
and applies each plane rotation to two contiguous basis rows.
"""
import math

import numpy as np

EPS = 2.220446049250313e-16


def tridiagonalize(a):
    """Reduce symmetric ``a`` to tridiagonal form ``a = Q T Q^T``.

    Returns ``(d, e, Q)`` with ``e[i] = T[i, i-1]`` and ``e[0] = 0``.
    """
    A = np.array(a, dtype=np.float64, copy=True)
    n = A.shape[0]
    e = np.zeros(n)
    reflectors = []
    for k in range(n - 2):
        x = A[k + 1:, k]
        sigma = math.sqrt(float(x @ x))
        if sigma == 0.0:
            reflectors.append(None)
            continue
        alpha = -sigma if x[0] > 0 else sigma
        v = x.copy()
        v[0] -= alpha
        vnorm = math.sqrt(float(v @ v))
        if vnorm == 0.0:
            reflectors.append(None)
            e[k + 1] = alpha
            continue
        v /= vnorm
        sub = A[k + 1:, k + 1:]
        p = sub @ v
        w = p - float(v @ p) * v
        sub -= 2.0 * (np.outer(v, w) + np.outer(w, v))
        A[k + 1:, k] = 0.0
        A[k, k + 1:] = 0.0
        A[k + 1, k] = A[k, k + 1] = alpha
        reflectors.append(v)
    d = np.diag(A).copy()
    for i in range(1, n):
        e[i] = A[i, i - 1]

    Q = np.eye(n)
    for k in range(len(reflectors) - 1, -1, -1):
        v = reflectors[k]
        if v is None:
            continue
        block = Q[k + 1:, :]
        block -= 2.0 * np.outer(v, v @ block)
    return d, e, Q


def tql(d, e, zt, max_iter):
    """Implicit-shift QL on a tridiagonal matrix; see ``pcc._kernels.tql``."""
    n = d.shape[0]
    if n == 0:
        return -1
    # scalar recurrences are faster on Python floats than on numpy scalars
    dd = [float(v) for v in d]
    ee = [float(v) for v in e[1:]] + [0.0]
    f = 0.0
    tst1 = 0.0
    hypot = math.hypot
    for l in range(n):
        tst1 = max(tst1, abs(dd[l]) + abs(ee[l]))
        m = l
        while m < n - 1:
            if abs(ee[m]) <= EPS * tst1:
                break
            m += 1
        if m > l:
            it = 0
            while True:
                it += 1
                if it > max_iter:
                    d[:] = dd
                    return l
                g = dd[l]
                p = (dd[l + 1] - g) / (2.0 * ee[l])
                r = hypot(p, 1.0)
                if p < 0:
                    r = -r
                dd[l] = ee[l] / (p + r)
                dd[l + 1] = ee[l] * (p + r)
                dl1 = dd[l + 1]
                h = g - dd[l]
                for i in range(l + 2, n):
                    dd[i] -= h
                f += h

                p = dd[m]
                c = c2 = c3 = 1.0
                el1 = ee[l + 1]
                s = s2 = 0.0
                for i in range(m - 1, l - 1, -1):
                    c3 = c2
                    c2 = c
                    s2 = s
                    g = c * ee[i]
                    h = c * p
                    r = hypot(p, ee[i])
                    ee[i + 1] = s * r
                    s = ee[i] / r
                    c = p / r
                    p = c * dd[i] - s * g
                    dd[i + 1] = h + s * (c * g + s * dd[i])
                    zi = zt[i].copy()
                    zi1 = zt[i + 1]
                    zt[i] = c * zi - s * zi1
                    zt[i + 1] = s * zi + c * zi1
                p = -s * s2 * c3 * el1 * ee[l] / dl1
                ee[l] = s * p
                dd[l] = c * p
                if abs(ee[l]) <= EPS * tst1:
                    break
        dd[l] += f
        ee[l] = 0.0
    d[:] = dd
    e[:] = 0.0
    return -1


def _make_table():
    table = []
    for i in range(256):
        c = i
        for _ in range(8):
            c = (c >> 1) ^ 0xC96C5795D7870F42 if c & 1 else c >> 1
        table.append(c)
    return table


_CRC_TABLE = _make_table()


def crc64(data):
    """CRC-64/XZ of a byte buffer."""
    crc = 0xFFFFFFFFFFFFFFFF
    table = _CRC_TABLE
    for byte in bytes(data):
        crc = table[(crc ^ byte) & 0xFF] ^ (crc >> 8)
    return crc ^ 0xFFFFFFFFFFFFFFFF
