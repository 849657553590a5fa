"""Exact open-tour solver: dynamic programming over visited-cluster sets."""

from __future__ import annotations

import math

import numpy as np

from bridgeinspect.planner.instance import (
    GtspInstance,
    InfeasibleCoverageError,
    InstanceTooLargeError,
    Tour,
)

EXACT_CLUSTER_LIMIT = 12


def _tol(x: float) -> float:
    return 1e-9 * max(1.0, abs(x))


class _Completion:
    """Memoized minimum cost to finish a path from node ``u`` having visited ``mask``."""

    def __init__(self, inst: GtspInstance):
        self.cost = inst.cost_matrix
        self.end = inst.end_cost
        self.bit = (1 << inst.node_cluster).tolist()
        self.full = (1 << inst.n_clusters) - 1
        n = len(inst.nodes)
        self.succ = [
            [v for v in range(n) if math.isfinite(self.cost[u, v])] for u in range(n)
        ]
        self.memo = {}

    def __call__(self, mask: int, u: int) -> float:
        key = (mask, u)
        hit = self.memo.get(key)
        if hit is not None:
            return hit
        if mask == self.full:
            best = float(self.end[u])
        else:
            best = math.inf
            row = self.cost[u]
            for v in self.succ[u]:
                b = self.bit[v]
                if mask & b:
                    continue
                c = row[v] + self(mask | b, v)
                if c < best:
                    best = c
        self.memo[key] = best
        return best


def has_complete_tour(inst: GtspInstance) -> bool:
    if inst.n_clusters > EXACT_CLUSTER_LIMIT:
        raise InstanceTooLargeError(
            f"{inst.n_clusters} clusters exceeds the exact limit of {EXACT_CLUSTER_LIMIT}"
        )
    f = _Completion(inst)
    return any(math.isfinite(f(f.bit[u], u)) for u in range(len(inst.nodes)))


def solve_exact(inst: GtspInstance, max_clusters: int = EXACT_CLUSTER_LIMIT) -> Tour:
    """Globally optimal open tour.

    Among tours of equal cost (within a relative 1e-9) the one whose entry
    sequence is lexicographically smallest by node id is returned.
    """
    if inst.n_clusters > max_clusters:
        raise InstanceTooLargeError(
            f"{inst.n_clusters} clusters exceeds the exact limit of {max_clusters}"
        )
    f = _Completion(inst)
    n = len(inst.nodes)
    starts = [f(f.bit[u], u) for u in range(n)]
    opt = min(starts)
    if not math.isfinite(opt):
        raise InfeasibleCoverageError("no feasible tour exists", inst.cluster_ids)

    tol = _tol(opt)
    u = next(i for i in range(n) if starts[i] <= opt + tol)
    path = [u]
    mask = f.bit[u]
    remaining = starts[u]
    while mask != f.full:
        row = inst.cost_matrix[u]
        for v in sorted(f.succ[u]):
            if mask & f.bit[v]:
                continue
            rest = row[v] + f(mask | f.bit[v], v)
            if rest <= remaining + tol:
                break
        else:  # pragma: no cover - guarded by the DP above
            raise RuntimeError("tour reconstruction failed")
        remaining = f(mask | f.bit[v], v)
        mask |= f.bit[v]
        path.append(v)
        u = v
    entries = tuple(int(i) + 1 for i in path)
    return Tour(entries, inst.path_cost(entries))


def best_nodes_for_order(inst: GtspInstance, order, cost=None, end=None):
    """Cheapest node choice for a fixed cluster order.

    ``order`` lists cluster indices. Returns ``(cost, node_indices)``;
    ties go to the lexicographically smallest node sequence.
    """
    cost = inst.cost_matrix if cost is None else cost
    end = inst.end_cost if end is None else end
    groups = [_cluster_nodes(inst)[c] for c in order]
    k = len(groups)
    f = [None] * k
    f[-1] = end[groups[-1]].astype(float)
    for i in range(k - 2, -1, -1):
        f[i] = (cost[np.ix_(groups[i], groups[i + 1])] + f[i + 1][None, :]).min(axis=1)
    opt = float(f[0].min())
    tol = _tol(opt)
    choice = []
    j = int(np.flatnonzero(f[0] <= opt + tol)[0])
    choice.append(groups[0][j])
    remaining = f[0][j]
    for i in range(1, k):
        step = cost[choice[-1], groups[i]] + f[i]
        j = int(np.flatnonzero(step <= remaining + tol)[0])
        remaining = f[i][j]
        choice.append(groups[i][j])
    return opt, choice


def _cluster_nodes(inst: GtspInstance):
    cache = inst.__dict__.get("_cluster_nodes")
    if cache is None:
        cache = [np.flatnonzero(inst.node_cluster == c) for c in range(inst.n_clusters)]
        object.__setattr__(inst, "_cluster_nodes", cache)
    return cache
