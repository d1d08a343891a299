"""Simple undirected graphs, the random graph process and k-cores."""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Sequence

import numpy as np

Edge = tuple[int, int]


def norm_edge(u: int, v: int) -> Edge:
    return (u, v) if u < v else (v, u)


class Graph:
    """Immutable simple undirected graph on vertices ``0..n-1``.

    Adjacency is kept as a tuple of frozensets so membership tests and
    neighbour iteration are both cheap.
    """

    __slots__ = ("n", "edges", "adj", "_degree")

    def __init__(self, n: int, edges: Iterable[Sequence[int]] = ()):
        if n < 0:
            raise ValueError("vertex count must be non-negative")
        adj: list[set[int]] = [set() for _ in range(n)]
        es: set[Edge] = set()
        for e in edges:
            u, v = int(e[0]), int(e[1])
            if u == v:
                raise ValueError(f"self-loop at vertex {u}")
            if not (0 <= u < n and 0 <= v < n):
                raise ValueError(f"edge {(u, v)} out of range for n={n}")
            p = norm_edge(u, v)
            if p in es:
                raise ValueError(f"parallel edge {p}")
            es.add(p)
            adj[u].add(v)
            adj[v].add(u)
        self.n = n
        self.edges: frozenset[Edge] = frozenset(es)
        self.adj: tuple[frozenset[int], ...] = tuple(frozenset(a) for a in adj)
        self._degree = tuple(len(a) for a in adj)

    @classmethod
    def _trusted(cls, n: int, adj: Sequence[Iterable[int]]) -> Graph:
        # caller guarantees a symmetric loop-free adjacency
        g = cls.__new__(cls)
        g.n = n
        g.adj = tuple(frozenset(a) for a in adj)
        g._degree = tuple(len(a) for a in g.adj)
        g.edges = frozenset((u, v) for u in range(n) for v in g.adj[u] if u < v)
        return g

    @property
    def m(self) -> int:
        return len(self.edges)

    @property
    def degree(self) -> tuple[int, ...]:
        return self._degree

    def has_edge(self, u: int, v: int) -> bool:
        return v in self.adj[u]

    def neighbors(self, v: int) -> frozenset[int]:
        return self.adj[v]

    def min_degree(self) -> int:
        return min(self._degree) if self.n else 0

    def max_degree(self) -> int:
        return max(self._degree) if self.n else 0

    def edge_list(self) -> list[Edge]:
        return sorted(self.edges)

    def add_edges(self, edges: Iterable[Sequence[int]]) -> Graph:
        return Graph(self.n, list(self.edges) + [norm_edge(int(u), int(v)) for u, v in edges])

    def remove_edges(self, edges: Iterable[Sequence[int]]) -> Graph:
        drop = {norm_edge(int(u), int(v)) for u, v in edges}
        adj = [set(a) for a in self.adj]
        for u, v in drop:
            if v in adj[u]:
                adj[u].discard(v)
                adj[v].discard(u)
        return Graph._trusted(self.n, adj)

    def induced(self, vertices: Iterable[int]) -> tuple[Graph, list[int]]:
        """Induced subgraph relabelled to ``0..len-1``; returns it with the label map."""
        keep = sorted(set(vertices))
        index = {v: i for i, v in enumerate(keep)}
        adj = [[index[w] for w in self.adj[v] if w in index] for v in keep]
        return Graph._trusted(len(keep), adj), keep

    def connected_components(self) -> list[list[int]]:
        seen = [False] * self.n
        comps = []
        for s in range(self.n):
            if seen[s]:
                continue
            seen[s] = True
            comp = [s]
            stack = [s]
            while stack:
                u = stack.pop()
                for w in self.adj[u]:
                    if not seen[w]:
                        seen[w] = True
                        comp.append(w)
                        stack.append(w)
            comps.append(comp)
        return comps

    def __eq__(self, other: object) -> bool:
        return isinstance(other, Graph) and self.n == other.n and self.edges == other.edges

    def __hash__(self) -> int:
        return hash((self.n, self.edges))

    def __repr__(self) -> str:
        return f"Graph(n={self.n}, m={self.m})"


@dataclass(frozen=True)
class MultiGraph:
    """Multigraph from a configuration pairing; loops count twice towards degree."""

    n: int
    edges: tuple[Edge, ...]

    @property
    def m(self) -> int:
        return len(self.edges)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for u, v in self.edges:
            deg[u] += 1
            deg[v] += 1
        return deg

    def is_simple(self) -> bool:
        seen = set()
        for u, v in self.edges:
            if u == v:
                return False
            p = norm_edge(u, v)
            if p in seen:
                return False
            seen.add(p)
        return True

    def to_graph(self) -> Graph:
        return Graph(self.n, self.edges)


@dataclass(frozen=True)
class CoreResult:
    """k-core of a graph.

    ``core_graph`` is relabelled: its vertex ``i`` is ``core_vertices[i]`` of
    the input graph.
    """

    k: int
    core_vertices: tuple[int, ...]
    core_graph: Graph
    peel_order: tuple[int, ...]

    @property
    def size(self) -> int:
        return len(self.core_vertices)

    @property
    def empty(self) -> bool:
        return not self.core_vertices


def k_core(g: Graph, k: int) -> CoreResult:
    """Peel vertices of degree < k, lowest degree first, ties by smallest id."""
    if k < 1:
        raise ValueError("k must be >= 1")
    deg = list(g.degree)
    alive = [True] * g.n
    heap = [(d, v) for v, d in enumerate(deg) if d < k]
    heapq.heapify(heap)
    order = []
    while heap:
        d, v = heapq.heappop(heap)
        if not alive[v] or d != deg[v]:
            continue
        alive[v] = False
        order.append(v)
        for w in g.adj[v]:
            if alive[w]:
                deg[w] -= 1
                if deg[w] < k:
                    heapq.heappush(heap, (deg[w], w))
    keep = [v for v in range(g.n) if alive[v]]
    core, labels = g.induced(keep)
    return CoreResult(k, tuple(labels), core, tuple(order))


def core_is_nonempty(n: int, edges: Sequence[Edge], k: int) -> bool:
    """Cheap emptiness test on an edge prefix; no Graph object is built."""
    adj: list[list[int]] = [[] for _ in range(n)]
    for u, v in edges:
        adj[u].append(v)
        adj[v].append(u)
    deg = [len(a) for a in adj]
    if sum(1 for d in deg if d >= k) <= k:
        return False
    stack = [v for v in range(n) if deg[v] < k]
    dead = [False] * n
    for v in stack:
        dead[v] = True
    remaining = n - len(stack)
    while stack:
        v = stack.pop()
        for w in adj[v]:
            if not dead[w]:
                deg[w] -= 1
                if deg[w] < k:
                    dead[w] = True
                    remaining -= 1
                    stack.append(w)
    return remaining > 0


class RandomGraphProcess:
    """The random graph process on ``n`` vertices.

    Each step adds a uniformly random non-edge.  While the graph is sparse the
    non-edge is found by rejection against the current edge set; once half of
    all pairs are used the remaining pairs are materialised and shuffled.
    """

    def __init__(self, n: int, seed: int | np.random.SeedSequence | None = None):
        if n < 2:
            raise ValueError("process needs n >= 2")
        self.n = n
        self.seed = seed
        self.total = n * (n - 1) // 2
        self.rng = np.random.default_rng(seed)
        self.edges: list[Edge] = []
        self._present: set[Edge] = set()
        self._tail: list[Edge] | None = None
        self._buf: list[tuple[int, int]] = []

    @property
    def t(self) -> int:
        return len(self.edges)

    def _draw_pair(self) -> Edge:
        while True:
            if not self._buf:
                u = self.rng.integers(0, self.n, size=1024)
                v = self.rng.integers(0, self.n - 1, size=1024)
                v = v + (v >= u)
                self._buf = list(zip(v.tolist(), u.tolist()))
            u, v = self._buf.pop()
            p = norm_edge(u, v)
            if p not in self._present:
                return p

    def step(self) -> Edge:
        if self.t >= self.total:
            raise StopIteration("process exhausted: graph is complete")
        if self._tail is None and 2 * self.t >= self.total:
            rest = [(u, v) for u in range(self.n) for v in range(u + 1, self.n) if (u, v) not in self._present]
            order = self.rng.permutation(len(rest))
            self._tail = [rest[i] for i in order[::-1]]
        p = self._tail.pop() if self._tail is not None else self._draw_pair()
        self._present.add(p)
        self.edges.append(p)
        return p

    def advance_to(self, t: int) -> None:
        t = min(t, self.total)
        while self.t < t:
            self.step()

    def graph_at(self, t: int) -> Graph:
        self.advance_to(t)
        return Graph(self.n, self.edges[:t])


@dataclass(frozen=True)
class ProcessState:
    """Snapshot handle for G_t; the graph itself is built lazily."""

    t: int
    last_edge: Edge | None
    rng_seed: object
    _log: list[Edge] = field(repr=False, compare=False)
    n: int = 0

    @property
    def graph(self) -> Graph:
        return Graph(self.n, self._log[: self.t])

    @property
    def remaining(self) -> int:
        return self.n * (self.n - 1) // 2 - self.t


def process_stream(n: int, seed: int | None = None) -> Iterator[ProcessState]:
    """Yield G_0, G_1, ..., G_{n(n-1)/2}."""
    proc = RandomGraphProcess(n, seed)
    yield ProcessState(0, None, seed, proc.edges, n)
    while proc.t < proc.total:
        e = proc.step()
        yield ProcessState(proc.t, e, seed, proc.edges, n)


def find_tau_k(proc: RandomGraphProcess, k: int) -> int:
    """Smallest t with a nonempty k-core, by galloping then bisection on t.

    Core nonemptiness is monotone in t, so O(log t) batch checks suffice.
    """
    n = proc.n
    lo = max(k * (k + 1) // 2 - 1, 0)  # G_lo has an empty core
    hi = max(lo + 1, n // 2)
    while True:
        hi = min(hi, proc.total)
        proc.advance_to(hi)
        if core_is_nonempty(n, proc.edges[:hi], k):
            break
        if hi == proc.total:
            raise RuntimeError(f"complete graph on {n} vertices has an empty {k}-core")
        lo, hi = hi, 2 * hi
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if core_is_nonempty(n, proc.edges[:mid], k):
            hi = mid
        else:
            lo = mid
    return hi


def tau_k(n: int, k: int, seed: int | None = None) -> tuple[int, CoreResult]:
    if k < 3:
        raise ValueError("tau_k is defined for k >= 3")
    proc = RandomGraphProcess(n, seed)
    t = find_tau_k(proc, k)
    return t, k_core(proc.graph_at(t), k)
