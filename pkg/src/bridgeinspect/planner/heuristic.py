"""Large neighborhood search for the clustered coverage tour.

Each iteration removes a share of the clusters (scattered or as one
contiguous run), reinserts them one at a time at their cheapest position and
node, re-picks the best node per cluster for the resulting order, and accepts
the result under a simulated annealing rule with geometric cooling. Missing
arcs carry a penalty larger than any feasible tour so that insertion always
succeeds; a final tour that still uses one is rejected.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from bridgeinspect.planner.exact import _cluster_nodes, _tol, best_nodes_for_order
from bridgeinspect.planner.instance import GtspInstance, InfeasibleCoverageError, Tour


@dataclass(frozen=True)
class SolverParams:
    seed: int = 0
    iterations: int = 300
    removal_fraction_range: tuple[float, float] = (0.1, 0.5)
    initial_temperature: float = 0.1
    cooling_rate: float = 0.99
    restarts: int = 3
    max_stall: int = 120

    def __post_init__(self):
        lo, hi = self.removal_fraction_range
        if self.iterations < 1:
            raise ValueError("iterations must be >= 1")
        if not (0.0 < lo <= hi < 1.0):
            raise ValueError("removal_fraction_range must satisfy 0 < low <= high < 1")
        if self.initial_temperature <= 0:
            raise ValueError("initial_temperature must be positive")
        if not (0.0 < self.cooling_rate < 1.0):
            raise ValueError("cooling_rate must lie in (0, 1)")
        if self.restarts < 1:
            raise ValueError("restarts must be >= 1")


class _Search:
    def __init__(self, inst: GtspInstance):
        self.inst = inst
        finite = np.isfinite(inst.cost_matrix)
        top = inst.cost_matrix[finite].max() if finite.any() else 0.0
        self.penalty = (inst.n_clusters + 1) * (top + inst.end_cost.max()) + 1.0
        self.cost = np.where(finite, inst.cost_matrix, self.penalty)
        self.end = inst.end_cost
        self.groups = _cluster_nodes(inst)
        self.scale = float(inst.cost_matrix[finite].mean()) if finite.any() else 1.0

    def path_cost(self, path) -> float:
        if not path:
            return 0.0
        p = np.asarray(path)
        return float(self.cost[p[:-1], p[1:]].sum() + self.end[p[-1]])

    def insertion(self, path, cluster):
        """Cheapest ``(delta, node, position)`` for inserting ``cluster``."""
        best = None
        for v in self.groups[cluster]:
            if not path:
                deltas = np.array([self.end[v]])
            else:
                p = np.asarray(path)
                c = self.cost
                deltas = np.empty(len(p) + 1)
                deltas[0] = c[v, p[0]]
                if len(p) > 1:
                    deltas[1:-1] = c[p[:-1], v] + c[v, p[1:]] - c[p[:-1], p[1:]]
                deltas[-1] = c[p[-1], v] + self.end[v] - self.end[p[-1]]
            pos = int(np.argmin(deltas))
            cand = (float(deltas[pos]), int(v), pos)
            if best is None or cand[0] < best[0] - _tol(best[0]):
                best = cand
        return best

    def greedy(self):
        path = []
        remaining = list(range(self.inst.n_clusters))
        while remaining:
            best = None
            for cl in remaining:
                cand = self.insertion(path, cl) + (cl,)
                if best is None or cand[0] < best[0] - _tol(best[0]):
                    best = cand
            _, v, pos, cl = best
            path.insert(pos, v)
            remaining.remove(cl)
        return path

    def reoptimize(self, path):
        order = [int(self.inst.node_cluster[v]) for v in path]
        cost, nodes = best_nodes_for_order(self.inst, order, self.cost, self.end)
        return cost, [int(v) for v in nodes]

    def run(self, start, params: SolverParams, rng: np.random.Generator):
        m = self.inst.n_clusters
        cur = list(start)
        cur_cost = self.path_cost(cur)
        best, best_cost = list(cur), cur_cost
        if m < 2:
            return best, best_cost
        lo, hi = params.removal_fraction_range
        k_lo = max(1, int(math.floor(lo * m)))
        k_hi = max(k_lo, min(m - 1, int(math.ceil(hi * m))))
        temp = params.initial_temperature * self.scale
        stall = 0
        for _ in range(params.iterations):
            k = int(rng.integers(k_lo, k_hi + 1))
            if rng.random() < 0.5:
                drop = set(rng.choice(m, size=k, replace=False).tolist())
            else:
                s = int(rng.integers(0, m - k + 1))
                drop = set(range(s, s + k))
            partial = [v for i, v in enumerate(cur) if i not in drop]
            removed = [int(self.inst.node_cluster[cur[i]]) for i in sorted(drop)]
            for cl in rng.permutation(removed):
                _, v, pos = self.insertion(partial, int(cl))
                partial.insert(pos, v)
            new_cost, new = self.reoptimize(partial)
            delta = new_cost - cur_cost
            if delta < -_tol(cur_cost) or rng.random() < math.exp(-max(delta, 0.0) / max(temp, 1e-300)):
                cur, cur_cost = new, new_cost
            temp *= params.cooling_rate
            if _better(cur_cost, cur, best_cost, best):
                best, best_cost = list(cur), cur_cost
                stall = 0
            else:
                stall += 1
                if stall >= params.max_stall:
                    break
        return best, best_cost


def _better(cost_a, path_a, cost_b, path_b) -> bool:
    tol = _tol(min(cost_a, cost_b))
    if cost_a < cost_b - tol:
        return True
    if cost_a > cost_b + tol:
        return False
    return list(path_a) < list(path_b)


def greedy_tour(inst: GtspInstance) -> Tour:
    """Deterministic cheapest-insertion construction (may use penalized arcs)."""
    s = _Search(inst)
    path = s.greedy()
    entries = tuple(v + 1 for v in path)
    return Tour(entries, s.path_cost(path))


def solve_heuristic(inst: GtspInstance, params: SolverParams = SolverParams()) -> Tour:
    search = _Search(inst)
    start = search.greedy()
    best, best_cost = list(start), search.path_cost(start)
    for seq in np.random.SeedSequence(params.seed).spawn(params.restarts):
        path, cost = search.run(start, params, np.random.default_rng(seq))
        if _better(cost, path, best_cost, best):
            best, best_cost = path, cost

    # orientation polish: the reversed cluster order may tie or win
    for order_path in (best, best[::-1]):
        cost, path = search.reoptimize(order_path)
        if _better(cost, path, best_cost, best):
            best, best_cost = path, cost

    if best_cost >= search.penalty:
        raise InfeasibleCoverageError("search found no tour along feasible arcs", inst.cluster_ids)
    entries = tuple(v + 1 for v in best)
    return Tour(entries, inst.path_cost(entries))
