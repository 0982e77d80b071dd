"""The weighted directed movement graph and mainstream-node selection.

Nodes are locations appearing in at least one rule; an arc per rule carries
the selected interest measure as its weight. Node support is the
occurrence-level count of the location over the sequence dataset (repeats
within a sequence count), which is a different quantity from the
sequence-level rule supports.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .measures import MeasuredRule
from .trips import SequenceDataset

log = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class NodeInfo:
    location_id: str
    name: str
    support: int


@dataclass
class MovementGraph:
    """Directed weighted graph: at most one arc per ordered pair, no self-arcs."""

    nodes: dict[str, NodeInfo] = field(default_factory=dict)
    arcs: dict[tuple[str, str], float] = field(default_factory=dict)

    def out_adjacency(self) -> dict[str, list[str]]:
        adj: dict[str, list[str]] = {node: [] for node in self.nodes}
        for src, dst in self.arcs:
            adj[src].append(dst)
        for succ in adj.values():
            succ.sort()
        return adj

    def validate(self) -> None:
        for (src, dst), _ in self.arcs.items():
            if src == dst:
                raise ValueError(f"self-arc on {src!r}")
            if src not in self.nodes or dst not in self.nodes:
                raise ValueError(f"arc ({src!r}, {dst!r}) has an unknown endpoint")


@dataclass(frozen=True, slots=True)
class MainstreamSelection:
    """Split of the node set into the k highest-support nodes and the rest."""

    mainstream: tuple[str, ...]
    secondary: frozenset[str]
    k: int
    coverage_fraction: float


def node_supports(dataset: SequenceDataset) -> dict[str, int]:
    """Occurrence counts per location over all sequences (repeats included)."""
    counts: dict[str, int] = {}
    for seq in dataset.sequences:
        for loc in seq:
            counts[loc] = counts.get(loc, 0) + 1
    return counts


def build_graph(
    measured: list[MeasuredRule],
    supports: dict[str, int],
    weight_measure: str = "klosgen",
    names: dict[str, str] | None = None,
) -> MovementGraph:
    """One node per rule endpoint, one weighted arc per rule."""
    names = names or {}
    graph = MovementGraph()
    for mr in measured:
        for loc in (mr.rule.antecedent, mr.rule.consequent):
            if loc not in graph.nodes:
                graph.nodes[loc] = NodeInfo(
                    location_id=loc,
                    name=names.get(loc, loc),
                    support=supports.get(loc, 0),
                )
        graph.arcs[(mr.rule.antecedent, mr.rule.consequent)] = mr.measures.by_name(
            weight_measure
        )
    return graph


def build_graph_from_rows(
    rows: list[dict],
    supports: dict[str, int],
    weight_measure: str = "klosgen",
    names: dict[str, str] | None = None,
) -> MovementGraph:
    """Same as build_graph but from measures-CSV rows."""
    names = names or {}
    column = "support_rel" if weight_measure == "support" else weight_measure
    graph = MovementGraph()
    for row in rows:
        for loc in (row["X"], row["Y"]):
            if loc not in graph.nodes:
                graph.nodes[loc] = NodeInfo(loc, names.get(loc, loc), supports.get(loc, 0))
        graph.arcs[(row["X"], row["Y"])] = row[column]
    return graph


def threshold_subgraph(graph: MovementGraph, threshold: float) -> MovementGraph:
    """Keep arcs with weight strictly above the threshold; keep every node."""
    return MovementGraph(
        nodes=dict(graph.nodes),
        arcs={arc: w for arc, w in graph.arcs.items() if w > threshold},
    )


def _elbow_index(coverage: np.ndarray) -> int:
    """Index of the maximum perpendicular distance to the chord of the curve.

    The curve is (k, coverage_k) for k = 1..N; the chord joins its first and
    last points. Ties resolve to the smallest k; a flat (linear) curve has no
    usable elbow and falls back to keeping everything.
    """
    n = len(coverage)
    if n <= 2:
        return n - 1
    ks = np.arange(1, n + 1, dtype=float)
    x1, y1 = 1.0, coverage[0]
    x2, y2 = float(n), coverage[-1]
    dist = np.abs((y2 - y1) * (ks - x1) - (x2 - x1) * (coverage - y1)) / math.hypot(
        x2 - x1, y2 - y1
    )
    if dist.max() <= 1e-12:
        return n - 1
    return int(np.argmax(dist))


def select_mainstream(
    graph: MovementGraph,
    supports: dict[str, int] | None = None,
    k: int | None = None,
) -> MainstreamSelection:
    """Pick the k highest-support nodes as mainstream.

    With k omitted, k comes from elbow detection on the support-sorted
    cumulative coverage curve (maximum distance to the chord). Ties at the
    boundary break lexicographically by location id. Raises on an empty node
    set.
    """
    if supports is None:
        supports = {loc: info.support for loc, info in graph.nodes.items()}
    order = sorted(graph.nodes, key=lambda loc: (-supports.get(loc, 0), loc))
    if not order:
        raise ValueError("cannot select mainstream nodes from an empty graph")

    total = sum(supports.get(loc, 0) for loc in order)
    sorted_supports = np.array([supports.get(loc, 0) for loc in order], dtype=float)
    cumulative = np.cumsum(sorted_supports)
    coverage = cumulative / total if total > 0 else np.ones(len(order))

    if k is None:
        k = _elbow_index(coverage) + 1
    elif k > len(order):
        log.warning("k=%d exceeds node count %d; clamping", k, len(order))
        k = len(order)
    elif k < 1:
        raise ValueError(f"k must be >= 1, got {k}")

    mainstream = tuple(order[:k])
    return MainstreamSelection(
        mainstream=mainstream,
        secondary=frozenset(order[k:]),
        k=k,
        coverage_fraction=float(coverage[k - 1]),
    )
