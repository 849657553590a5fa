# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled kernels: ray casting, Hough voting and Held-Karp ATSP.

Loop bodies follow ``_kernels_py`` term for term so both backends agree.
"""

import numpy as np
cimport numpy as cnp
from libc.math cimport floor, INFINITY, fabs

cnp.import_array()

cdef double _PARALLEL_EPS = 1e-12


def raycast(origin, dirs, corners, e1, e2, normals):
    cdef double[::1] o = np.ascontiguousarray(origin, dtype=np.float64)
    cdef double[:, ::1] d = np.ascontiguousarray(dirs, dtype=np.float64)
    cdef double[:, ::1] c = np.ascontiguousarray(corners, dtype=np.float64)
    cdef double[:, ::1] a = np.ascontiguousarray(e1, dtype=np.float64)
    cdef double[:, ::1] b = np.ascontiguousarray(e2, dtype=np.float64)
    cdef double[:, ::1] nr = np.ascontiguousarray(normals, dtype=np.float64)
    cdef Py_ssize_t n = d.shape[0]
    cdef Py_ssize_t m = c.shape[0]
    out_arr = np.full(n, np.inf)
    cdef double[::1] out = out_arr
    if n == 0 or m == 0:
        return out_arr

    inv1_arr = np.empty(m)
    inv2_arr = np.empty(m)
    w1_arr = np.empty(m)
    w2_arr = np.empty(m)
    num_arr = np.empty(m)
    cdef double[::1] inv1 = inv1_arr
    cdef double[::1] inv2 = inv2_arr
    cdef double[::1] w1 = w1_arr
    cdef double[::1] w2 = w2_arr
    cdef double[::1] num = num_arr
    cdef Py_ssize_t i, k
    cdef double wx, wy, wz, denom, t, u, v, d1, d2, best

    for k in range(m):
        wx = o[0] - c[k, 0]
        wy = o[1] - c[k, 1]
        wz = o[2] - c[k, 2]
        num[k] = -(wx * nr[k, 0] + wy * nr[k, 1] + wz * nr[k, 2])
        inv1[k] = 1.0 / (a[k, 0] * a[k, 0] + a[k, 1] * a[k, 1] + a[k, 2] * a[k, 2])
        inv2[k] = 1.0 / (b[k, 0] * b[k, 0] + b[k, 1] * b[k, 1] + b[k, 2] * b[k, 2])
        w1[k] = wx * a[k, 0] + wy * a[k, 1] + wz * a[k, 2]
        w2[k] = wx * b[k, 0] + wy * b[k, 1] + wz * b[k, 2]

    for i in range(n):
        best = INFINITY
        for k in range(m):
            denom = d[i, 0] * nr[k, 0] + d[i, 1] * nr[k, 1] + d[i, 2] * nr[k, 2]
            if fabs(denom) <= _PARALLEL_EPS:
                continue
            t = num[k] / denom
            if not (t > 0.0):
                continue
            d1 = d[i, 0] * a[k, 0] + d[i, 1] * a[k, 1] + d[i, 2] * a[k, 2]
            d2 = d[i, 0] * b[k, 0] + d[i, 1] * b[k, 1] + d[i, 2] * b[k, 2]
            u = (w1[k] + t * d1) * inv1[k]
            v = (w2[k] + t * d2) * inv2[k]
            if u >= 0.0 and u <= 1.0 and v >= 0.0 and v <= 1.0 and t < best:
                best = t
        out[i] = best
    return out_arr


def hough_vote(xs, ys, cos_t, sin_t, double rho_min, double rho_width, Py_ssize_t n_rho):
    cdef double[::1] x = np.ascontiguousarray(xs, dtype=np.float64)
    cdef double[::1] y = np.ascontiguousarray(ys, dtype=np.float64)
    cdef double[::1] ct = np.ascontiguousarray(cos_t, dtype=np.float64)
    cdef double[::1] st = np.ascontiguousarray(sin_t, dtype=np.float64)
    cdef Py_ssize_t n_theta = ct.shape[0]
    cdef Py_ssize_t n_pts = x.shape[0]
    acc_arr = np.zeros((n_theta, n_rho), dtype=np.int64)
    cdef cnp.int64_t[:, ::1] acc = acc_arr
    cdef Py_ssize_t i, p, b
    cdef double rho
    for i in range(n_theta):
        for p in range(n_pts):
            rho = -x[p] * st[i] + y[p] * ct[i]
            b = <Py_ssize_t>floor((rho - rho_min) / rho_width)
            if b >= 0 and b < n_rho:
                acc[i, b] += 1
    return acc_arr


def held_karp_atsp(cost):
    cdef double[:, ::1] cm = np.ascontiguousarray(cost, dtype=np.float64)
    cdef Py_ssize_t n = cm.shape[0]
    if n == 1:
        return 0.0, [0]
    cdef Py_ssize_t m = n - 1
    cdef Py_ssize_t full = 1 << m
    dp_arr = np.full((full, m), np.inf)
    parent_arr = np.full((full, m), -1, dtype=np.int64)
    cdef double[:, ::1] dp = dp_arr
    cdef cnp.int64_t[:, ::1] parent = parent_arr
    cdef Py_ssize_t mask, prev, j, k, bestk
    cdef double best, cand
    for j in range(m):
        dp[1 << j, j] = cm[0, j + 1]
    for mask in range(1, full):
        if mask & (mask - 1) == 0:
            continue
        for j in range(m):
            if not (mask >> j & 1):
                continue
            prev = mask ^ (1 << j)
            best = INFINITY
            bestk = 0
            for k in range(m):
                cand = dp[prev, k] + cm[k + 1, j + 1]
                if cand < best:
                    best = cand
                    bestk = k
            dp[mask, j] = best
            parent[mask, j] = bestk if best < INFINITY else -1

    cdef Py_ssize_t last = 0
    best = INFINITY
    for j in range(m):
        cand = dp[full - 1, j] + cm[j + 1, 0]
        if cand < best:
            best = cand
            last = j
    if not (best < INFINITY):
        return float("inf"), []
    order = []
    mask = full - 1
    j = last
    while j >= 0:
        order.append(j + 1)
        k = parent[mask, j]
        mask ^= 1 << j
        j = k
    order.append(0)
    order.reverse()
    return float(best), order
