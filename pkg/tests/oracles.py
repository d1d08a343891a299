"""Independent reference implementations used only by the tests."""

import itertools

import networkx as nx

from hamcore.graph_core import Graph


def to_nx(g: Graph) -> nx.Graph:
    h = nx.Graph()
    h.add_nodes_from(range(g.n))
    h.add_edges_from(g.edges)
    return h


def matching_number_enum(g: Graph) -> int:
    """Branch on the lowest unmatched vertex: leave it single or pair it with a neighbour."""
    memo = {}

    def best(free: frozenset) -> int:
        if not free:
            return 0
        if free in memo:
            return memo[free]
        v = min(free)
        rest = free - {v}
        val = best(rest)
        for w in g.adj[v]:
            if w in rest:
                val = max(val, 1 + best(rest - {w}))
        memo[free] = val
        return val

    return best(frozenset(range(g.n)))


def matching_number_nx(g: Graph) -> int:
    return len(nx.max_weight_matching(to_nx(g), maxcardinality=True))


def b_matching_number(g: Graph, b: int) -> int:
    """Max simple b-matching through the vertex-copy/edge-split gadget and networkx."""
    h = nx.Graph()
    for u, v in g.edges:
        eu, ev = ("e", u, v, u), ("e", u, v, v)
        h.add_edge(eu, ev)
        for i in range(b):
            h.add_edge(eu, ("c", u, i))
            h.add_edge(ev, ("c", v, i))
    return len(nx.max_weight_matching(h, maxcardinality=True)) - g.m


def is_matching(n: int, edges) -> bool:
    seen = set()
    for u, v in edges:
        if u in seen or v in seen:
            return False
        seen.update((u, v))
    return True


def max_disjoint_cycles(g: Graph) -> int:
    """Exact vertex-disjoint cycle packing; chordless cycles suffice since every
    cycle contains one on a subset of its vertices."""
    cycles = sorted({frozenset(c) for c in nx.chordless_cycles(to_nx(g)) if len(c) >= 3}, key=len)
    best = 0

    def rec(i: int, used: frozenset, count: int) -> None:
        nonlocal best
        best = max(best, count)
        if count + (g.n - len(used)) // 3 <= best:
            return
        for j in range(i, len(cycles)):
            if not cycles[j] & used:
                rec(j + 1, used | cycles[j], count + 1)

    rec(0, frozenset(), 0)
    return best


def rotation_endpoints(g: Graph, path, depth: int, forbidden=frozenset()) -> list[set]:
    """Endpoint sets reachable within 0..depth rotations fixing path[0], by
    exhaustive depth-first search of the rotation tree."""
    by_depth = [set() for _ in range(depth + 1)]
    best_left: dict = {}

    def dfs(p: tuple, d: int) -> None:
        left = depth - d
        if best_left.get(p, -1) >= left:
            return
        best_left[p] = left
        for dd in range(d, depth + 1):
            by_depth[dd].add(p[-1])
        if not left:
            return
        s = len(p)
        for i in range(1, s - 2):  # pivot strictly inside, not the predecessor of the end
            if g.has_edge(p[-1], p[i]) and tuple(sorted((p[-1], p[i]))) not in forbidden:
                dfs(p[: i + 1] + tuple(reversed(p[i + 1:])), d + 1)

    dfs(tuple(path), 0)
    return by_depth


def all_graphs_with(n: int, m: int, k: int) -> list[frozenset]:
    pairs = list(itertools.combinations(range(n), 2))
    out = []
    for es in itertools.combinations(pairs, m):
        deg = [0] * n
        for u, v in es:
            deg[u] += 1
            deg[v] += 1
        if min(deg) >= k:
            out.append(frozenset(es))
    return out
