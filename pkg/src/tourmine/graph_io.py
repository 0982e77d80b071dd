"""Serialize movement graphs to DOT, GraphML, and CSV edge lists.

Writers emit node name/support/mainstream attributes and arc weights;
readers parse exactly what the writers emit. Weights are written with
`repr`, so float values survive a round-trip bit-for-bit.
"""

from __future__ import annotations

import csv
import re
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import Iterable, Union

from .errors import DataError
from .graph import MovementGraph, NodeInfo

PathLike = Union[str, Path]

_GRAPHML_NS = "http://graphml.graphdrawing.org/xmlns"


def _dot_escape(s: str) -> str:
    return s.replace("\\", "\\\\").replace('"', '\\"')


def _dot_unescape(s: str) -> str:
    return re.sub(r"\\(.)", r"\1", s)


_QUOTED = r'"((?:[^"\\]|\\.)*)"'
_NODE_RE = re.compile(
    rf"^\s*{_QUOTED}\s+\[label={_QUOTED},\s*support=(\d+),\s*mainstream=(true|false)\];$"
)
_EDGE_RE = re.compile(rf"^\s*{_QUOTED}\s*->\s*{_QUOTED}\s+\[weight=([^\]]+)\];$")


def write_dot(graph: MovementGraph, path: PathLike, mainstream: Iterable[str] = ()) -> None:
    flags = set(mainstream)
    lines = ["digraph movement {"]
    for loc in sorted(graph.nodes):
        info = graph.nodes[loc]
        lines.append(
            f'  "{_dot_escape(loc)}" [label="{_dot_escape(info.name)}", '
            f"support={info.support}, mainstream={'true' if loc in flags else 'false'}];"
        )
    for (src, dst) in sorted(graph.arcs):
        weight = graph.arcs[(src, dst)]
        lines.append(
            f'  "{_dot_escape(src)}" -> "{_dot_escape(dst)}" [weight={weight!r}];'
        )
    lines.append("}")
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def read_dot(path: PathLike) -> tuple[MovementGraph, set[str]]:
    graph = MovementGraph()
    mainstream: set[str] = set()
    for raw in Path(path).read_text(encoding="utf-8").splitlines():
        line = raw.strip()
        if not line or line.startswith("digraph") or line == "}":
            continue
        edge = _EDGE_RE.match(raw)
        if edge:
            src, dst, weight = edge.groups()
            graph.arcs[(_dot_unescape(src), _dot_unescape(dst))] = float(weight)
            continue
        node = _NODE_RE.match(raw)
        if node:
            loc, name, support, flag = node.groups()
            loc = _dot_unescape(loc)
            graph.nodes[loc] = NodeInfo(loc, _dot_unescape(name), int(support))
            if flag == "true":
                mainstream.add(loc)
            continue
        raise DataError(f"unrecognized DOT line: {raw!r}")
    graph.validate()
    return graph, mainstream


def write_graphml(
    graph: MovementGraph, path: PathLike, mainstream: Iterable[str] = ()
) -> None:
    flags = set(mainstream)
    root = ET.Element("graphml", xmlns=_GRAPHML_NS)
    for key_id, target, name, typ in (
        ("d0", "node", "name", "string"),
        ("d1", "node", "support", "long"),
        ("d2", "node", "mainstream", "boolean"),
        ("d3", "edge", "weight", "double"),
    ):
        ET.SubElement(
            root,
            "key",
            id=key_id,
            attrib={"for": target, "attr.name": name, "attr.type": typ},
        )
    g = ET.SubElement(root, "graph", edgedefault="directed")
    for loc in sorted(graph.nodes):
        info = graph.nodes[loc]
        node = ET.SubElement(g, "node", id=loc)
        ET.SubElement(node, "data", key="d0").text = info.name
        ET.SubElement(node, "data", key="d1").text = str(info.support)
        ET.SubElement(node, "data", key="d2").text = (
            "true" if loc in flags else "false"
        )
    for (src, dst) in sorted(graph.arcs):
        edge = ET.SubElement(g, "edge", source=src, target=dst)
        ET.SubElement(edge, "data", key="d3").text = repr(graph.arcs[(src, dst)])
    tree = ET.ElementTree(root)
    ET.indent(tree)
    tree.write(path, encoding="utf-8", xml_declaration=True)


def read_graphml(path: PathLike) -> tuple[MovementGraph, set[str]]:
    try:
        root = ET.parse(path).getroot()
    except ET.ParseError as exc:
        raise DataError(f"invalid GraphML in {path}: {exc}") from exc

    ns = {"g": _GRAPHML_NS}
    key_names = {
        key.get("id"): key.get("attr.name") for key in root.findall("g:key", ns)
    }
    graph_el = root.find("g:graph", ns)
    if graph_el is None:
        raise DataError(f"no <graph> element in {path}")

    graph = MovementGraph()
    mainstream: set[str] = set()
    for node in graph_el.findall("g:node", ns):
        loc = node.get("id")
        attrs = {
            key_names.get(d.get("key")): (d.text or "")
            for d in node.findall("g:data", ns)
        }
        graph.nodes[loc] = NodeInfo(
            loc, attrs.get("name", loc), int(attrs.get("support", 0))
        )
        if attrs.get("mainstream") == "true":
            mainstream.add(loc)
    for edge in graph_el.findall("g:edge", ns):
        attrs = {
            key_names.get(d.get("key")): (d.text or "")
            for d in edge.findall("g:data", ns)
        }
        graph.arcs[(edge.get("source"), edge.get("target"))] = float(
            attrs.get("weight", "1.0")
        )
    graph.validate()
    return graph, mainstream


def write_edges_csv(graph: MovementGraph, path: PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["src", "dst", "weight"])
        for (src, dst) in sorted(graph.arcs):
            writer.writerow([src, dst, repr(graph.arcs[(src, dst)])])
