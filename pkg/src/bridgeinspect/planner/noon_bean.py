"""Reduction of the clustered tour problem to an asymmetric TSP.

Nodes of each cluster are chained into a zero-cost cycle; every arc leaving a
node u is re-attached to u's cycle predecessor and offset by a constant M
that exceeds the sum of all finite costs. An optimal ATSP tour then enters
each cluster once, sweeps its cycle and leaves, and the first node it visits
in each cluster is that cluster's entry in an optimal clustered tour.

The open-path depot is added as one more single-node cluster.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass

import numpy as np

from bridgeinspect import kernels
from bridgeinspect.planner.instance import GtspInstance, Tour


@dataclass(frozen=True)
class NoonBeanMapping:
    index_to_node: tuple  # ATSP index -> node id, None for the depot
    index_to_cluster: tuple
    big_m: float
    n_clusters: int  # includes the depot cluster

    @property
    def depot(self) -> int:
        return self.index_to_node.index(None)

    def gtsp_cost(self, atsp_cost: float) -> float:
        return atsp_cost - self.n_clusters * self.big_m

    def to_tour(self, order, inst: GtspInstance) -> Tour:
        """Entry node per cluster, read off an ATSP tour (any rotation)."""
        order = list(order)
        d = order.index(self.depot)
        order = order[d + 1 :] + order[:d]
        entries = []
        seen = []
        for idx in order:
            cl = self.index_to_cluster[idx]
            if not seen or seen[-1] != cl:
                if cl in seen:
                    raise ValueError("ATSP tour revisits a cluster; not a valid image")
                seen.append(cl)
                entries.append(self.index_to_node[idx])
        entries = tuple(entries)
        return Tour(entries, inst.path_cost(entries))


def noon_bean_transform(inst: GtspInstance):
    """Return ``(atsp_cost_matrix, mapping)``; missing arcs are ``inf``."""
    n = len(inst.nodes)
    depot = n
    size = n + 1
    finite = np.isfinite(inst.cost_matrix)
    big_m = float(inst.cost_matrix[finite].sum() + inst.end_cost.sum() + 1.0)

    pred = np.arange(size)
    out = np.full((size, size), np.inf)
    for cid, members in inst.clusters.items():
        idx = sorted(v - 1 for v in members)
        k = len(idx)
        for j in range(k):
            if k > 1:
                out[idx[j], idx[(j + 1) % k]] = 0.0
            pred[idx[j]] = idx[(j - 1) % k]

    us, vs = np.nonzero(finite)
    out[pred[us], vs] = inst.cost_matrix[us, vs] + big_m
    out[depot, :n] = big_m
    out[pred[np.arange(n)], depot] = inst.end_cost + big_m

    index_to_node = tuple(range(1, n + 1)) + (None,)
    index_to_cluster = tuple(inst.cluster_of(v) for v in range(1, n + 1)) + ("<depot>",)
    mapping = NoonBeanMapping(index_to_node, index_to_cluster, big_m, inst.n_clusters + 1)
    return out, mapping


def solve_atsp(cost) -> tuple[float, list[int]]:
    """Exact ATSP optimum via the Held-Karp kernel."""
    return kernels.held_karp_atsp(np.asarray(cost, dtype=float))


def solve_atsp_bruteforce(cost) -> tuple[float, list[int]]:
    """Enumerate every cyclic order fixing node 0; small matrices only."""
    cost = np.asarray(cost, dtype=float)
    n = cost.shape[0]
    best, best_order = math.inf, []
    for perm in itertools.permutations(range(1, n)):
        order = (0,) + perm
        total = 0.0
        for a, b in zip(order, order[1:] + (0,)):
            total += cost[a, b]
            if total >= best:
                break
        else:
            if total < best:
                best, best_order = total, list(order)
    return best, best_order


def solve_via_noon_bean(inst: GtspInstance) -> Tour:
    matrix, mapping = noon_bean_transform(inst)
    total, order = solve_atsp(matrix)
    if not math.isfinite(total):
        raise ValueError("transformed instance has no tour")
    return mapping.to_tour(order, inst)
