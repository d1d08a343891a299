"""Text and JSON serialisation for graphs and matchings."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Iterable

from hamcore.graph_core import Edge, Graph, norm_edge


class FormatError(ValueError):
    pass


def format_edge_list(g: Graph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v}" for u, v in g.edge_list())
    return "\n".join(lines) + "\n"


def parse_edge_list(text: str) -> Graph:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows:
        raise FormatError("empty edge-list file")
    try:
        n, m = (int(x) for x in rows[0])
        edges = [(int(a), int(b)) for a, b in rows[1:]]
    except ValueError as exc:
        raise FormatError(f"malformed edge list: {exc}") from None
    if len(edges) != m:
        raise FormatError(f"header promises {m} edges, found {len(edges)}")
    for u, v in edges:
        if not 0 <= u < v < n:
            raise FormatError(f"edge line '{u} {v}' violates 0 <= u < v < n")
    try:
        return Graph(n, edges)
    except ValueError as exc:
        raise FormatError(str(exc)) from None


def graph_to_json(g: Graph) -> dict:
    return {"n": g.n, "m": g.m, "edges": [list(e) for e in g.edge_list()]}


def graph_from_json(data: dict) -> Graph:
    try:
        g = Graph(int(data["n"]), [tuple(e) for e in data["edges"]])
    except (KeyError, TypeError, ValueError) as exc:
        raise FormatError(f"malformed JSON graph: {exc}") from None
    if "m" in data and int(data["m"]) != g.m:
        raise FormatError("JSON graph 'm' disagrees with its edge list")
    return g


def read_graph(path: str | Path) -> Graph:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as exc:
        raise FormatError(str(exc)) from None
    if path.suffix == ".json":
        try:
            return graph_from_json(json.loads(text))
        except json.JSONDecodeError as exc:
            raise FormatError(f"bad JSON: {exc}") from None
    return parse_edge_list(text)


def write_graph(g: Graph, path: str | Path) -> None:
    path = Path(path)
    if path.suffix == ".json":
        path.write_text(json.dumps(graph_to_json(g)) + "\n", encoding="utf-8", newline="\n")
    else:
        path.write_text(format_edge_list(g), encoding="utf-8", newline="\n")


def format_matching(edges: Iterable[Edge], k: int, n: int) -> str:
    """Matching file: header ``matching k n size`` then one edge per line."""
    es = sorted(norm_edge(u, v) for u, v in edges)
    return "\n".join([f"matching {k} {n} {len(es)}"] + [f"{u} {v}" for u, v in es]) + "\n"


def parse_matching(text: str) -> tuple[int, int, list[Edge]]:
    rows = [ln.split() for ln in text.splitlines() if ln.strip()]
    if not rows or rows[0][0] != "matching" or len(rows[0]) != 4:
        raise FormatError("matching file must start with 'matching k n size'")
    k, n, size = (int(x) for x in rows[0][1:])
    edges = [norm_edge(int(a), int(b)) for a, b in rows[1:]]
    if len(edges) != size:
        raise FormatError(f"header promises {size} edges, found {len(edges)}")
    return k, n, edges
