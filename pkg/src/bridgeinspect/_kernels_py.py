"""Numpy implementations of the hot kernels.

These mirror ``_kernels.pyx`` operation for operation so that both backends
produce the same floating point results on the same inputs.
"""

import numpy as np

_PARALLEL_EPS = 1e-12


def raycast(origin, dirs, corners, e1, e2, normals):
    """Distance along each ray to the nearest rectangle, ``inf`` on a miss.

    ``origin`` is (3,), ``dirs`` (n, 3) unit vectors. Each rectangle is the set
    ``corner + u*e1 + v*e2`` for u, v in [0, 1] with plane normal ``normal``.
    """
    origin = np.asarray(origin, dtype=np.float64)
    dirs = np.asarray(dirs, dtype=np.float64)
    corners = np.asarray(corners, dtype=np.float64)
    e1 = np.asarray(e1, dtype=np.float64)
    e2 = np.asarray(e2, dtype=np.float64)
    normals = np.asarray(normals, dtype=np.float64)
    n = dirs.shape[0]
    out = np.full(n, np.inf)
    if n == 0 or corners.shape[0] == 0:
        return out

    dx = dirs[:, 0:1]
    dy = dirs[:, 1:2]
    dz = dirs[:, 2:3]
    wx = origin[0] - corners[:, 0]
    wy = origin[1] - corners[:, 1]
    wz = origin[2] - corners[:, 2]

    denom = dx * normals[:, 0] + dy * normals[:, 1] + dz * normals[:, 2]
    num = -(wx * normals[:, 0] + wy * normals[:, 1] + wz * normals[:, 2])
    ok = np.abs(denom) > _PARALLEL_EPS
    with np.errstate(divide="ignore", invalid="ignore"):
        t = np.where(ok, num / np.where(ok, denom, 1.0), np.inf)

    inv1 = 1.0 / (e1[:, 0] * e1[:, 0] + e1[:, 1] * e1[:, 1] + e1[:, 2] * e1[:, 2])
    inv2 = 1.0 / (e2[:, 0] * e2[:, 0] + e2[:, 1] * e2[:, 1] + e2[:, 2] * e2[:, 2])
    w1 = wx * e1[:, 0] + wy * e1[:, 1] + wz * e1[:, 2]
    w2 = wx * e2[:, 0] + wy * e2[:, 1] + wz * e2[:, 2]
    d1 = dx * e1[:, 0] + dy * e1[:, 1] + dz * e1[:, 2]
    d2 = dx * e2[:, 0] + dy * e2[:, 1] + dz * e2[:, 2]
    with np.errstate(invalid="ignore"):
        u = (w1 + t * d1) * inv1
        v = (w2 + t * d2) * inv2
        hit = ok & (t > 0.0) & (u >= 0.0) & (u <= 1.0) & (v >= 0.0) & (v <= 1.0)
    t = np.where(hit, t, np.inf)
    return t.min(axis=1)


def hough_vote(xs, ys, cos_t, sin_t, rho_min, rho_width, n_rho):
    """Accumulate (theta, rho) votes; rho = -x*sin + y*cos."""
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys, dtype=np.float64)
    cos_t = np.asarray(cos_t, dtype=np.float64)
    sin_t = np.asarray(sin_t, dtype=np.float64)
    n_theta = cos_t.shape[0]
    acc = np.zeros((n_theta, n_rho), dtype=np.int64)
    if xs.size == 0:
        return acc
    rho = -xs[None, :] * sin_t[:, None] + ys[None, :] * cos_t[:, None]
    bins = np.floor((rho - rho_min) / rho_width).astype(np.int64)
    valid = (bins >= 0) & (bins < n_rho)
    rows = np.broadcast_to(np.arange(n_theta)[:, None], bins.shape)
    np.add.at(acc, (rows[valid], bins[valid]), 1)
    return acc


def held_karp_atsp(cost):
    """Exact asymmetric TSP by dynamic programming over subsets.

    Returns ``(total_cost, order)`` with ``order`` starting at node 0. Missing
    arcs are ``inf``; an instance with no Hamiltonian cycle returns
    ``(inf, [])``. Ties resolve to the smallest predecessor index.
    """
    cost = np.asarray(cost, dtype=np.float64)
    n = cost.shape[0]
    if n == 1:
        return 0.0, [0]
    m = n - 1
    full = 1 << m
    dp = np.full((full, m), np.inf)
    parent = np.full((full, m), -1, dtype=np.int64)
    inner = cost[1:, 1:]
    for j in range(m):
        dp[1 << j, j] = cost[0, j + 1]
    for mask in range(1, full):
        if mask & (mask - 1) == 0:
            continue
        js = np.array([j for j in range(m) if mask >> j & 1])
        prev = mask ^ (1 << js)
        cand = dp[prev, :] + inner[:, js].T
        best_k = np.argmin(cand, axis=1)
        best = cand[np.arange(js.size), best_k]
        dp[mask, js] = best
        parent[mask, js] = np.where(np.isfinite(best), best_k, -1)
    closing = dp[full - 1, :] + cost[1:, 0]
    last = int(np.argmin(closing))
    total = float(closing[last])
    if not np.isfinite(total):
        return float("inf"), []
    order = []
    mask = full - 1
    j = last
    while j >= 0:
        order.append(j + 1)
        pj = int(parent[mask, j])
        mask ^= 1 << j
        j = pj
    order.append(0)
    order.reverse()
    return total, order
