"""Spheres of influence around mainstream nodes and their pairwise similarity.

A sphere collects every node reachable from its center within D directed
hops of the thresholded movement graph (the center itself excluded). The
similarity matrix entry M(i, j) is the fraction of sphere i's members that
also belong to sphere j; it is not symmetric.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError
from .graph import MovementGraph
from .trips import SequenceDataset


@dataclass(frozen=True, slots=True)
class SphereOfInfluence:
    center: str
    distance: int
    members: frozenset[str]


@dataclass
class SimilarityMatrix:
    """Row-stochastic-style overlap matrix over mainstream nodes.

    entries[i, j] = |S_i & S_j| / |S_i|. Rows of empty spheres are zero and
    their centers are listed in `empty_centers`; the diagonal is stored as
    1.0 but carries no information for clustering.
    """

    order: list[str]
    entries: np.ndarray
    empty_centers: list[str]

    def value(self, center_i: str, center_j: str) -> float:
        return float(
            self.entries[self.order.index(center_i), self.order.index(center_j)]
        )


def sphere_distance(dataset: SequenceDataset) -> int:
    """Neighbor distance D: average sequence length, rounded, minus one.

    Rounds half up; never returns less than 1. Raises on an empty dataset.
    """
    if dataset.count == 0:
        raise DataError("sphere distance is undefined for an empty sequence dataset")
    return max(math.floor(dataset.avg_length + 0.5) - 1, 1)


def sphere_of_influence(
    subgraph: MovementGraph, center: str, distance: int
) -> SphereOfInfluence:
    """Directed breadth-first reachability from the center, up to `distance` hops."""
    if center not in subgraph.nodes:
        raise ValueError(f"center {center!r} is not a node of the graph")
    adjacency = subgraph.out_adjacency()
    return _bfs_sphere(adjacency, center, distance)


def _bfs_sphere(
    adjacency: dict[str, list[str]], center: str, distance: int
) -> SphereOfInfluence:
    visited = {center}
    frontier = [center]
    members: set[str] = set()
    for _ in range(distance):
        nxt = []
        for node in frontier:
            for succ in adjacency.get(node, ()):
                if succ not in visited:
                    visited.add(succ)
                    members.add(succ)
                    nxt.append(succ)
        if not nxt:
            break
        frontier = nxt
    members.discard(center)
    return SphereOfInfluence(center, distance, frozenset(members))


def compute_spheres(
    subgraph: MovementGraph, centers: list[str], distance: int
) -> list[SphereOfInfluence]:
    """Spheres for all centers, sharing one adjacency build."""
    adjacency = subgraph.out_adjacency()
    for center in centers:
        if center not in subgraph.nodes:
            raise ValueError(f"center {center!r} is not a node of the graph")
    return [_bfs_sphere(adjacency, center, distance) for center in centers]


def similarity_matrix(spheres: list[SphereOfInfluence]) -> SimilarityMatrix:
    """Pairwise overlap fractions between spheres computed at one distance."""
    distances = {s.distance for s in spheres}
    if len(distances) > 1:
        raise ValueError(f"spheres computed at mixed distances: {sorted(distances)}")
    order = [s.center for s in spheres]
    n = len(spheres)
    entries = np.zeros((n, n), dtype=float)
    empty = []
    for i, si in enumerate(spheres):
        if not si.members:
            empty.append(si.center)
        for j, sj in enumerate(spheres):
            if i == j:
                entries[i, j] = 1.0
            elif si.members:
                entries[i, j] = len(si.members & sj.members) / len(si.members)
    return SimilarityMatrix(order=order, entries=entries, empty_centers=empty)


def write_spheres_json(spheres: list[SphereOfInfluence], path) -> None:
    payload = [
        {"center": s.center, "D": s.distance, "members": sorted(s.members)}
        for s in spheres
    ]
    Path(path).write_text(
        json.dumps(payload, ensure_ascii=False, indent=2) + "\n", encoding="utf-8"
    )


def read_spheres_json(path) -> list[SphereOfInfluence]:
    payload = json.loads(Path(path).read_text(encoding="utf-8"))
    return [
        SphereOfInfluence(item["center"], item["D"], frozenset(item["members"]))
        for item in payload
    ]


def write_similarity_csv(matrix: SimilarityMatrix, path) -> None:
    import csv

    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["location_id"] + matrix.order)
        for i, center in enumerate(matrix.order):
            writer.writerow([center] + [f"{v:.6f}" for v in matrix.entries[i]])


def read_similarity_csv(path) -> SimilarityMatrix:
    import csv

    with open(path, "r", encoding="utf-8", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        return SimilarityMatrix(order=[], entries=np.zeros((0, 0)), empty_centers=[])
    order = rows[0][1:]
    entries = np.array(
        [[float(v) for v in row[1:]] for row in rows[1:]], dtype=float
    ).reshape(len(order), len(order))
    # Emptiness is a sphere-level fact; it is not reconstructed from entries.
    return SimilarityMatrix(order=order, entries=entries, empty_centers=[])
