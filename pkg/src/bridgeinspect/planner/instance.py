"""Clustered node graph for the coverage tour.

Each surface becomes a cluster holding its two coverage nodes. Node ids are
1-based: node_a of the i-th surface gets id i, node_b gets id n + i, so the
partner of node k is k + n (or k - n).

Tours are open paths: a virtual depot with free arcs to and from every node
closes them. The cost of arriving at the depot from node u is the coverage
length of u's surface, so a path ``e1, ..., ek`` costs
``sum C(e_i, e_{i+1}) + end_cost(e_k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from bridgeinspect.geometry import BridgeModel, Point3, node_distance


class InstanceTooSmallError(ValueError):
    pass


class InstanceTooLargeError(ValueError):
    pass


class InfeasibleCoverageError(ValueError):
    def __init__(self, message, clusters=()):
        self.clusters = tuple(clusters)
        super().__init__(message)


@dataclass(frozen=True)
class GtspNode:
    node_id: int
    cluster_id: str
    position: Point3
    partner_id: int


@dataclass(frozen=True, eq=False)
class GtspInstance:
    nodes: tuple[GtspNode, ...]
    clusters: dict[str, tuple[int, int]]
    cost_matrix: np.ndarray
    end_cost: np.ndarray

    def __post_init__(self):
        self.cost_matrix.setflags(write=False)
        self.end_cost.setflags(write=False)
        object.__setattr__(self, "_cluster_ids", tuple(self.clusters))
        index = {cid: i for i, cid in enumerate(self._cluster_ids)}
        node_cluster = np.array([index[n.cluster_id] for n in self.nodes], dtype=np.int64)
        object.__setattr__(self, "node_cluster", node_cluster)

    @property
    def cluster_ids(self) -> tuple[str, ...]:
        return self._cluster_ids

    @property
    def n_clusters(self) -> int:
        return len(self.clusters)

    def node(self, node_id: int) -> GtspNode:
        return self.nodes[node_id - 1]

    def partner(self, node_id: int) -> int:
        return self.nodes[node_id - 1].partner_id

    def cluster_of(self, node_id: int) -> str:
        return self.nodes[node_id - 1].cluster_id

    def cost(self, u: int, v: int) -> float:
        return float(self.cost_matrix[u - 1, v - 1])

    def is_feasible(self, u: int, v: int) -> bool:
        return bool(np.isfinite(self.cost_matrix[u - 1, v - 1]))

    @property
    def feasible(self) -> frozenset[tuple[int, int]]:
        us, vs = np.nonzero(np.isfinite(self.cost_matrix))
        return frozenset((int(u) + 1, int(v) + 1) for u, v in zip(us, vs))

    def path_cost(self, entries) -> float:
        entries = list(entries)
        if not entries:
            return 0.0
        idx = np.asarray(entries, dtype=np.int64) - 1
        legs = self.cost_matrix[idx[:-1], idx[1:]].sum() if len(idx) > 1 else 0.0
        return float(legs + self.end_cost[idx[-1]])

    def check_tour(self, entries):
        """Raise ValueError unless ``entries`` visits every cluster once via feasible arcs."""
        seen = [self.cluster_of(e) for e in entries]
        if sorted(seen) != sorted(self.cluster_ids):
            raise ValueError(f"tour does not visit each cluster exactly once: {seen}")
        for u, v in zip(entries, entries[1:]):
            if not self.is_feasible(u, v):
                raise ValueError(f"arc {u}->{v} is not feasible")

    def scaled(self, k: float) -> GtspInstance:
        nodes = tuple(
            GtspNode(n.node_id, n.cluster_id, Point3(*(c * k for c in n.position)), n.partner_id)
            for n in self.nodes
        )
        return GtspInstance(nodes, dict(self.clusters), self.cost_matrix * k, self.end_cost * k)


@dataclass(frozen=True)
class Tour:
    entries: tuple[int, ...]
    total_cost: float


def instance_from_positions(clusters, adjacency=None, scale: float = 1.0) -> GtspInstance:
    """Build an instance from ``[(cluster_id, pos_a, pos_b), ...]``.

    ``adjacency`` is an iterable of cluster-id pairs; ``None`` keeps every
    inter-cluster arc.
    """
    clusters = list(clusters)
    n = len(clusters)
    nodes = []
    for i, (cid, pa, _) in enumerate(clusters):
        nodes.append(GtspNode(i + 1, cid, Point3(*map(float, pa)), n + i + 1))
    for i, (cid, _, pb) in enumerate(clusters):
        nodes.append(GtspNode(n + i + 1, cid, Point3(*map(float, pb)), i + 1))
    pos = np.array([n_.position for n_ in nodes], dtype=float)
    dist = np.linalg.norm(pos[:, None, :] - pos[None, :, :], axis=2) * scale
    partner = np.array([n_.partner_id - 1 for n_ in nodes])
    cover = dist[np.arange(2 * n), partner]
    cost = cover[:, None] + dist[partner, :]
    cluster_idx = np.concatenate([np.arange(n), np.arange(n)])
    same = cluster_idx[:, None] == cluster_idx[None, :]
    cost[same] = np.inf
    if adjacency is not None:
        index = {cid: i for i, (cid, _, _) in enumerate(clusters)}
        adj = np.zeros((n, n), dtype=bool)
        for pair in adjacency:
            a, b = tuple(pair)
            adj[index[a], index[b]] = adj[index[b], index[a]] = True
        cost[~adj[cluster_idx[:, None], cluster_idx[None, :]]] = np.inf
    mapping = {cid: (i + 1, n + i + 1) for i, (cid, _, _) in enumerate(clusters)}
    return GtspInstance(tuple(nodes), mapping, cost, cover.copy())


def build_instance(m: BridgeModel, prune: bool = True) -> GtspInstance:
    """One cluster per surface; directed costs cover the current surface then
    transfer to the next entry node."""
    if len(m.surfaces) < 2:
        raise InstanceTooSmallError(
            f"need at least 2 surfaces to plan a tour, got {len(m.surfaces)}"
        )
    inst = instance_from_positions(
        [(s.id, s.node_a, s.node_b) for s in m.surfaces], None, m.distance_scale
    )
    # cross-check the vectorized costs against the scalar distance helper
    a, b = m.surfaces[0], m.surfaces[1]
    expected = node_distance(m, a.node_a, a.node_b) + node_distance(m, a.node_b, b.node_a)
    assert math.isclose(inst.cost(1, 2), expected, rel_tol=1e-12, abs_tol=1e-12)
    return prune_infeasible(inst, m) if prune else inst


def _components(ids, edges):
    parent = {i: i for i in ids}

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in edges:
        ra, rb = find(a), find(b)
        if ra != rb:
            parent[max(ra, rb)] = min(ra, rb)
    groups = {}
    for i in ids:
        groups.setdefault(find(i), []).append(i)
    return sorted(groups.values(), key=lambda g: (-len(g), ids.index(g[0])))


def restrict_to_adjacency(inst: GtspInstance, adjacency) -> GtspInstance:
    """Drop every arc whose clusters are not an adjacent pair; no checks."""
    ids = list(inst.cluster_ids)
    index = {cid: i for i, cid in enumerate(ids)}
    adj = np.zeros((len(ids), len(ids)), dtype=bool)
    for pair in adjacency:
        a, b = tuple(pair)
        if a in index and b in index:
            adj[index[a], index[b]] = adj[index[b], index[a]] = True
    nc = inst.node_cluster
    cost = np.where(adj[nc[:, None], nc[None, :]], inst.cost_matrix, np.inf)
    return GtspInstance(inst.nodes, dict(inst.clusters), cost, inst.end_cost.copy())


def prune_infeasible(inst: GtspInstance, m: BridgeModel) -> GtspInstance:
    """Keep only arcs between clusters declared adjacent in the bridge model."""
    pruned = restrict_to_adjacency(inst, m.adjacency)
    ids = list(pruned.cluster_ids)
    edges = [tuple(sorted(p)) for p in m.adjacency if all(c in ids for c in p)]
    comps = _components(ids, edges)
    if len(comps) > 1:
        isolated = [c for comp in comps[1:] for c in comp]
        listing = ", ".join("{" + ", ".join(c) + "}" for c in comps)
        raise InfeasibleCoverageError(
            f"pruning disconnects the cluster graph: components {listing}; "
            f"isolated clusters: {', '.join(isolated)}",
            isolated,
        )
    from bridgeinspect.planner.exact import EXACT_CLUSTER_LIMIT, has_complete_tour

    if pruned.n_clusters <= EXACT_CLUSTER_LIMIT and not has_complete_tour(pruned):
        raise InfeasibleCoverageError(
            "no ordering of the surfaces visits each exactly once along adjacent surfaces",
            ids,
        )
    return pruned


def random_instance(seed: int, n_clusters: int, edge_prob: float = 0.5, extent: float = 100.0):
    """Seeded random instance whose adjacency admits a complete open tour."""
    from bridgeinspect.planner.exact import has_complete_tour

    rng = np.random.default_rng(seed)
    ids = [chr(ord("A") + i) for i in range(n_clusters)]
    while True:
        pos = rng.uniform(0.0, extent, size=(n_clusters, 2, 3))
        adjacency = [
            (ids[i], ids[j])
            for i in range(n_clusters)
            for j in range(i + 1, n_clusters)
            if rng.random() < edge_prob
        ]
        inst = instance_from_positions(
            [(ids[i], pos[i, 0], pos[i, 1]) for i in range(n_clusters)], adjacency
        )
        if has_complete_tour(inst):
            return inst
