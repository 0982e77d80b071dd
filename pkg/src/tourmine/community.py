"""Community detection over the similarity matrix via Louvain modularity.

The asymmetric similarity matrix is symmetrized into an undirected weighted
graph, then clustered with the classic two-phase Louvain procedure: local
moves to a modularity fixed point, aggregation of communities into
supernodes, repeated until no move improves anything. Node visit order is
shuffled from an explicit seed, which makes runs reproducible.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, replace
from pathlib import Path

import networkx as nx

from .graph import NodeInfo
from .influence import SimilarityMatrix

SYMMETRIZE_MODES = ("mean", "max", "min")


@dataclass(frozen=True, slots=True)
class ClusterAssignment:
    """A partition of the mainstream nodes into kept and dropped communities."""

    communities: tuple[frozenset[str], ...]
    modularity: float
    dropped: tuple[frozenset[str], ...]
    parameters: dict

    def all_nodes(self) -> set[str]:
        out: set[str] = set()
        for com in self.communities + self.dropped:
            out |= com
        return out


def matrix_to_weighted_graph(
    matrix: SimilarityMatrix, symmetrize: str = "mean"
) -> nx.Graph:
    """Undirected weighted view of the similarity matrix.

    Each unordered pair {i, j} combines M(i,j) and M(j,i) by the chosen mode
    (mean by default); zero-weight pairs get no edge and the diagonal is
    discarded. Every mainstream node becomes a graph node even if isolated.
    """
    if symmetrize not in SYMMETRIZE_MODES:
        raise ValueError(f"unknown symmetrize mode {symmetrize!r}")
    combine = {"mean": lambda a, b: (a + b) / 2.0, "max": max, "min": min}[symmetrize]
    graph = nx.Graph()
    graph.add_nodes_from(matrix.order)
    n = len(matrix.order)
    for i in range(n):
        for j in range(i + 1, n):
            w = combine(float(matrix.entries[i, j]), float(matrix.entries[j, i]))
            if w > 0.0:
                graph.add_edge(matrix.order[i], matrix.order[j], weight=w)
    return graph


def modularity(graph: nx.Graph, communities, resolution: float = 1.0) -> float:
    """Weighted undirected modularity of a partition, with a resolution factor."""
    m = graph.size(weight="weight")
    if m <= 0:
        return 0.0
    node2com: dict = {}
    for ci, com in enumerate(communities):
        for node in com:
            node2com[node] = ci
    intra = [0.0] * len(communities)
    degree = [0.0] * len(communities)
    for u, v, data in graph.edges(data=True):
        w = float(data.get("weight", 1.0))
        cu, cv = node2com[u], node2com[v]
        if cu == cv:
            intra[cu] += w
        degree[cu] += w
        degree[cv] += w
    two_m = 2.0 * m
    return sum(
        intra[c] / m - resolution * (degree[c] / two_m) ** 2
        for c in range(len(communities))
    )


def _local_phase(adj, self_w, m, resolution, order):
    """One Louvain level: greedy local moves until no move improves modularity.

    Returns (moved_any, node-to-community map). Gains are compared with a
    small epsilon so float noise cannot cycle forever.
    """
    n = len(adj)
    k = [sum(neigh.values()) + 2.0 * self_w[i] for i, neigh in enumerate(adj)]
    node2com = list(range(n))
    com_tot = k.copy()
    two_m = 2.0 * m
    moved_any = False
    improved = True
    while improved:
        improved = False
        for v in order:
            cv = node2com[v]
            neigh_w: dict[int, float] = {}
            for u, w in adj[v].items():
                cu = node2com[u]
                neigh_w[cu] = neigh_w.get(cu, 0.0) + w
            com_tot[cv] -= k[v]
            best_c = cv
            best_gain = neigh_w.get(cv, 0.0) - resolution * com_tot[cv] * k[v] / two_m
            for c in sorted(neigh_w):
                if c == cv:
                    continue
                gain = neigh_w[c] - resolution * com_tot[c] * k[v] / two_m
                if gain > best_gain + 1e-12:
                    best_c, best_gain = c, gain
            com_tot[best_c] += k[v]
            node2com[v] = best_c
            if best_c != cv:
                improved = True
                moved_any = True
    return moved_any, node2com


def _aggregate(adj, self_w, members, node2com):
    """Collapse communities into supernodes, summing weights.

    Intra-community weight moves into the supernode's self-loop; supernode
    ids are ordered by their smallest original member for determinism.
    """
    n = len(adj)
    com_min: dict[int, int] = {}
    for v in range(n):
        c = node2com[v]
        least = min(members[v])
        com_min[c] = min(com_min.get(c, least), least)
    coms = sorted(com_min, key=com_min.get)
    remap = {c: i for i, c in enumerate(coms)}

    new_n = len(coms)
    new_members = [set() for _ in range(new_n)]
    new_self = [0.0] * new_n
    new_adj: list[dict[int, float]] = [dict() for _ in range(new_n)]
    for v in range(n):
        cv = remap[node2com[v]]
        new_members[cv] |= members[v]
        new_self[cv] += self_w[v]
        for u, w in adj[v].items():
            if u < v:
                continue  # visit each undirected edge once
            cu = remap[node2com[u]]
            if cu == cv:
                new_self[cv] += w
            else:
                new_adj[cv][cu] = new_adj[cv].get(cu, 0.0) + w
                new_adj[cu][cv] = new_adj[cu].get(cv, 0.0) + w
    return new_adj, new_self, new_members


def louvain(
    graph: nx.Graph, resolution: float = 1.0, seed: int = 42
) -> ClusterAssignment:
    """Two-phase Louvain community detection on an undirected weighted graph.

    An edgeless graph yields singleton communities with modularity 0. The
    reported modularity is recomputed from the final partition on the input
    graph, not accumulated from move gains.
    """
    params = {"resolution": resolution, "seed": seed}
    base_nodes = sorted(graph.nodes)
    if not base_nodes:
        return ClusterAssignment((), 0.0, (), params)

    index = {node: i for i, node in enumerate(base_nodes)}
    adj: list[dict[int, float]] = [dict() for _ in base_nodes]
    m = 0.0
    for u, v, data in graph.edges(data=True):
        if u == v:
            continue  # self-loops carry no between-node structure
        w = float(data.get("weight", 1.0))
        iu, iv = index[u], index[v]
        adj[iu][iv] = adj[iu].get(iv, 0.0) + w
        adj[iv][iu] = adj[iv].get(iu, 0.0) + w
        m += w

    singletons = tuple(frozenset({node}) for node in base_nodes)
    if m == 0.0:
        return ClusterAssignment(singletons, 0.0, (), params)

    rng = random.Random(seed)
    members = [{i} for i in range(len(base_nodes))]
    self_w = [0.0] * len(base_nodes)
    while True:
        order = list(range(len(adj)))
        rng.shuffle(order)
        moved, node2com = _local_phase(adj, self_w, m, resolution, order)
        if not moved:
            break
        adj, self_w, members = _aggregate(adj, self_w, members, node2com)
        if len(adj) == 1:
            break

    communities = tuple(
        frozenset(base_nodes[i] for i in mem)
        for mem in sorted(members, key=min)
    )
    q = modularity(graph, communities, resolution)
    return ClusterAssignment(communities, q, (), params)


def best_louvain(
    graph: nx.Graph,
    resolution: float = 1.0,
    seed: int = 42,
    n_runs: int = 1,
) -> ClusterAssignment:
    """Run Louvain with consecutive seeds and keep the highest-modularity result."""
    best = None
    for i in range(max(n_runs, 1)):
        result = louvain(graph, resolution=resolution, seed=seed + i)
        if best is None or result.modularity > best.modularity:
            best = result
    return best


def filter_clusters(
    assignment: ClusterAssignment, min_cluster_size: int = 3
) -> ClusterAssignment:
    """Move communities smaller than min_cluster_size into the dropped list."""
    kept = tuple(c for c in assignment.communities if len(c) >= min_cluster_size)
    small = tuple(c for c in assignment.communities if len(c) < min_cluster_size)
    params = dict(assignment.parameters)
    params["min_cluster_size"] = min_cluster_size
    return replace(
        assignment,
        communities=kept,
        dropped=assignment.dropped + small,
        parameters=params,
    )


def profile_report(
    assignment: ClusterAssignment,
    matrix: SimilarityMatrix,
    nodes: dict[str, NodeInfo] | None = None,
) -> dict:
    """Per-cluster profile: members, supports, and similarity statistics.

    Intra-cluster similarity averages the directed matrix entries over
    ordered member pairs; similarity to another cluster averages entries
    from this cluster's members toward the other's.
    """
    nodes = nodes or {}
    idx = {center: i for i, center in enumerate(matrix.order)}

    ordered = sorted(assignment.communities, key=lambda c: (-len(c), min(c)))
    cluster_ids = {cid: com for cid, com in enumerate(ordered, start=1)}

    def mean_between(src: frozenset[str], dst: frozenset[str], exclude_same: bool) -> float | None:
        values = [
            float(matrix.entries[idx[a], idx[b]])
            for a in src
            for b in dst
            if not (exclude_same and a == b)
        ]
        return sum(values) / len(values) if values else None

    clusters = []
    for cid, com in cluster_ids.items():
        members = sorted(com)
        clusters.append(
            {
                "id": cid,
                "size": len(com),
                "members": [
                    {
                        "location_id": loc,
                        "name": nodes[loc].name if loc in nodes else loc,
                        "support": nodes[loc].support if loc in nodes else None,
                    }
                    for loc in members
                ],
                "mean_intra_similarity": mean_between(com, com, exclude_same=True),
                "mean_similarity_to": {
                    str(other_id): mean_between(com, other, exclude_same=False)
                    for other_id, other in cluster_ids.items()
                    if other_id != cid
                },
            }
        )

    return {
        "parameters": assignment.parameters,
        "modularity": assignment.modularity,
        "n_communities": len(assignment.communities),
        "clusters": clusters,
        "dropped": [sorted(c) for c in sorted(assignment.dropped, key=lambda c: (-len(c), min(c)))],
    }


def write_report_json(report: dict, path) -> None:
    Path(path).write_text(
        json.dumps(report, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )
