# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled hot kernels. Signatures mirror ``_core_py``."""

import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt

from hankellab import _core_py

cnp.import_array()


cdef cnp.int64_t[:, ::1] _sat(const cnp.uint8_t[:, ::1] m):
    cdef Py_ssize_t n1 = m.shape[0], n2 = m.shape[1], i, j
    cdef cnp.int64_t[:, ::1] s = np.zeros((n1 + 1, n2 + 1), dtype=np.int64)
    for i in range(n1):
        for j in range(n2):
            s[i + 1, j + 1] = m[i, j] + s[i, j + 1] + s[i + 1, j] - s[i, j]
    return s


def dyadic_enlarge(mask):
    cdef const cnp.uint8_t[:, ::1] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t n1 = m.shape[0], n2 = m.shape[1]
    cdef cnp.int64_t[:, ::1] s = _sat(m)
    out_arr = np.zeros((n1, n2), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] out = out_arr
    cdef Py_ssize_t w1, w2, a, b, i, j, i0, j0
    cdef cnp.int64_t count
    w1 = 1
    while w1 <= n1:
        w2 = 1
        while w2 <= n2:
            for a in range(n1 // w1):
                i0 = a * w1
                for b in range(n2 // w2):
                    j0 = b * w2
                    count = s[i0 + w1, j0 + w2] - s[i0, j0 + w2] - s[i0 + w1, j0] + s[i0, j0]
                    if 2 * count > w1 * w2:
                        for i in range(i0, i0 + w1):
                            for j in range(j0, j0 + w2):
                                out[i, j] = 1
            w2 *= 2
        w1 *= 2
    return out_arr.astype(bool)


def grid_enlarge(mask):
    cdef const cnp.uint8_t[:, ::1] m = np.ascontiguousarray(mask, dtype=np.uint8)
    cdef Py_ssize_t n1 = m.shape[0], n2 = m.shape[1]
    cdef cnp.int64_t[:, ::1] s = _sat(m)
    cdef cnp.int64_t[:, ::1] d = np.zeros((n1 + 1, n2 + 1), dtype=np.int64)
    cdef Py_ssize_t h, w, i, j
    cdef cnp.int64_t count
    for h in range(1, n1 + 1):
        for w in range(1, n2 + 1):
            for i in range(n1 - h + 1):
                for j in range(n2 - w + 1):
                    count = s[i + h, j + w] - s[i, j + w] - s[i + h, j] + s[i, j]
                    if 2 * count > h * w:
                        d[i, j] += 1
                        d[i + h, j] -= 1
                        d[i, j + w] -= 1
                        d[i + h, j + w] += 1
    acc = np.asarray(d).cumsum(0).cumsum(1)
    return acc[:n1, :n2] > 0


def box_stab_sums(x1, x2, lo1, hi1, lo2, hi2, weight):
    cdef const double[::1] px = np.ascontiguousarray(x1, dtype=np.float64)
    cdef const double[::1] py = np.ascontiguousarray(x2, dtype=np.float64)
    cdef const double[::1] a1 = np.ascontiguousarray(lo1, dtype=np.float64)
    cdef const double[::1] b1 = np.ascontiguousarray(hi1, dtype=np.float64)
    cdef const double[::1] a2 = np.ascontiguousarray(lo2, dtype=np.float64)
    cdef const double[::1] b2 = np.ascontiguousarray(hi2, dtype=np.float64)
    cdef const double[::1] wt = np.ascontiguousarray(weight, dtype=np.float64)
    out_arr = np.zeros(px.shape[0])
    cdef double[::1] out = out_arr
    cdef Py_ssize_t n = px.shape[0], nb = wt.shape[0], k, r
    cdef double x, y, acc
    for k in range(n):
        x = px[k]
        y = py[k]
        acc = 0.0
        # branch-free so the inner loop vectorizes
        for r in range(nb):
            acc += wt[r] * ((a1[r] <= x) & (x < b1[r]) & (a2[r] <= y) & (y < b2[r]))
        out[k] = acc
    return out_arr


def counting_sum(values, double h, double x, double lam):
    cdef double[::1] level = np.array(values, dtype=np.float64)
    cdef Py_ssize_t n = level.shape[0], k
    cdef double length = h, total = 0.0, c, half, lo, hi
    while True:
        half = 0.5 * lam * length
        for k in range(n):
            if level[k] > 0:
                c = (k + 0.5) * length
                if c - half <= x and x < c + half:
                    total += length * level[k]
        if n == 1:
            break
        n //= 2
        for k in range(n):
            lo = level[2 * k]
            hi = level[2 * k + 1]
            level[k] = lo if lo < hi else hi
        length *= 2
    return total


def lowrank_lq_power_sum(P, Q, double q):
    # numpy's vectorized pow beats a scalar exp/log loop for other exponents
    if q != 2.0 and q != 1.5:
        return _core_py.lowrank_lq_power_sum(P, Q, q)
    P = np.asarray(P, dtype=np.complex128)
    Q = np.asarray(Q, dtype=np.complex128)
    cdef const double[:, ::1] pr = np.ascontiguousarray(P.real)
    cdef const double[:, ::1] pi = np.ascontiguousarray(P.imag)
    # Q is stored transposed so the inner loop runs over contiguous memory
    cdef const double[:, ::1] qr = np.ascontiguousarray(Q.real.T)
    cdef const double[:, ::1] qi = np.ascontiguousarray(Q.imag.T)
    cdef Py_ssize_t nx = pr.shape[0], ny = qr.shape[1], r = pr.shape[1], i, j, l
    cdef double[::1] zr = np.empty(ny)
    cdef double[::1] zi = np.empty(ny)
    cdef double total = 0.0, a, b, t, row
    cdef int mode = 0 if q == 2.0 else 1
    with nogil:
        for i in range(nx):
            for j in range(ny):
                zr[j] = 0.0
                zi[j] = 0.0
            for l in range(r):
                a = pr[i, l]
                b = pi[i, l]
                for j in range(ny):
                    zr[j] += a * qr[l, j] - b * qi[l, j]
                    zi[j] += a * qi[l, j] + b * qr[l, j]
            row = 0.0
            if mode == 0:
                for j in range(ny):
                    row += zr[j] * zr[j] + zi[j] * zi[j]
            elif mode == 1:
                for j in range(ny):
                    t = zr[j] * zr[j] + zi[j] * zi[j]
                    row += sqrt(t * sqrt(t))
            total += row
    return total
