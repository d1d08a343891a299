"""Maximum matchings, Tutte-Berge certificates, matching peeling and 2-matchings.

The engine is Edmonds' blossom search (BFS forest with base contraction).
Simple b-matchings reduce to ordinary matchings through the usual gadget:
``b`` copies per vertex and a two-vertex gadget per edge.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from hamcore.graph_core import Edge, Graph, norm_edge

# ---------------------------------------------------------------- blossom core


class _Blossom:
    """Edmonds' augmenting-path search over a fixed adjacency list.

    ``mate`` is updated in place.  Scratch arrays are allocated once and only
    the entries touched by a search are reset afterwards.
    """

    def __init__(self, adj: Sequence[Sequence[int]], mate: list[int]):
        n = len(adj)
        self.adj = adj
        self.mate = mate
        self.parent = [-1] * n
        self.base = list(range(n))
        self.used = [False] * n

    def _lca(self, a: int, b: int) -> int:
        base, mate, parent = self.base, self.mate, self.parent
        seen = set()
        while True:
            a = base[a]
            seen.add(a)
            if mate[a] == -1:
                break
            a = parent[mate[a]]
        while True:
            b = base[b]
            if b in seen:
                return b
            b = parent[mate[b]]

    def _mark(self, v: int, b: int, child: int, blossom: set) -> None:
        base, mate, parent = self.base, self.mate, self.parent
        while base[v] != b:
            blossom.add(base[v])
            blossom.add(base[mate[v]])
            parent[v] = child
            child = mate[v]
            v = parent[mate[v]]

    def search(self, root: int) -> bool:
        """Try to augment from free vertex ``root``; True on success."""
        adj, mate, parent, base, used = self.adj, self.mate, self.parent, self.base, self.used
        touched = [root]
        used[root] = True
        queue = deque([root])
        found = -1
        while queue and found < 0:
            v = queue.popleft()
            for to in adj[v]:
                if base[v] == base[to] or mate[v] == to:
                    continue
                if to == root or (mate[to] != -1 and parent[mate[to]] != -1):
                    cur = self._lca(v, to)
                    blossom: set = set()
                    self._mark(v, cur, to, blossom)
                    self._mark(to, cur, v, blossom)
                    for i in list(touched):
                        if base[i] in blossom:
                            base[i] = cur
                            if not used[i]:
                                used[i] = True
                                queue.append(i)
                elif parent[to] == -1:
                    parent[to] = v
                    touched.append(to)
                    if mate[to] == -1:
                        found = to
                        break
                    nxt = mate[to]
                    used[nxt] = True
                    touched.append(nxt)
                    queue.append(nxt)
        if found >= 0:
            v = found
            while v != -1:
                pv = parent[v]
                ppv = mate[pv]
                mate[v] = pv
                mate[pv] = v
                v = ppv
        for i in touched:
            parent[i] = -1
            base[i] = i
            used[i] = False
        return found >= 0


def _greedy_mate(adj: Sequence[Sequence[int]]) -> list[int]:
    n = len(adj)
    mate = [-1] * n
    for v in sorted(range(n), key=lambda x: len(adj[x])):
        if mate[v] != -1:
            continue
        best = -1
        for w in adj[v]:
            if mate[w] == -1 and w != v and (best < 0 or len(adj[w]) < len(adj[best])):
                best = w
        if best >= 0:
            mate[v] = best
            mate[best] = v
    return mate


def _maximise(adj: Sequence[Sequence[int]], mate: list[int], roots: Iterable[int] | None = None) -> list[int]:
    # a root with no augmenting path never gets one later, so one pass suffices
    engine = _Blossom(adj, mate)
    for r in range(len(adj)) if roots is None else roots:
        if mate[r] == -1:
            engine.search(r)
    return mate


# ---------------------------------------------------------------- matchings


@dataclass(frozen=True)
class Matching:
    n: int
    edges: frozenset

    def __post_init__(self):
        seen = set()
        for u, v in self.edges:
            if u in seen or v in seen:
                raise ValueError(f"vertex shared by two matching edges at {(u, v)}")
            seen.add(u)
            seen.add(v)

    @property
    def size(self) -> int:
        return len(self.edges)

    @property
    def saturated(self) -> list[bool]:
        sat = [False] * self.n
        for u, v in self.edges:
            sat[u] = sat[v] = True
        return sat

    def mate_of(self) -> dict[int, int]:
        out = {}
        for u, v in self.edges:
            out[u] = v
            out[v] = u
        return out


def max_matching(g: Graph, initial: Matching | None = None) -> Matching:
    """Maximum-cardinality matching by blossom search."""
    adj = [sorted(a) for a in g.adj]
    if initial is None:
        mate = _greedy_mate(adj)
    else:
        mate = [-1] * g.n
        for u, v in initial.edges:
            mate[u], mate[v] = v, u
    _maximise(adj, mate)
    return Matching(g.n, frozenset((u, w) for u, w in enumerate(mate) if u < w))


def brute_force_matching_number(g: Graph) -> int:
    """Exhaustive maximum matching size; exponential, for oracles only."""
    edges = g.edge_list()
    best = 0

    def rec(i: int, used: int, size: int) -> None:
        nonlocal best
        if size + (len(edges) - i) <= best:
            return
        if size > best:
            best = size
        if i == len(edges):
            return
        u, v = edges[i]
        if not (used >> u) & 1 and not (used >> v) & 1:
            rec(i + 1, used | (1 << u) | (1 << v), size + 1)
        rec(i + 1, used, size)

    rec(0, 0, 0)
    return best


# ---------------------------------------------------------------- Tutte-Berge


@dataclass(frozen=True)
class TutteBergeCertificate:
    witness_set: frozenset
    odd_components: int
    value: int

    @property
    def matching_number(self) -> int:
        return self.value // 2


def odd_components(g: Graph, removed: Iterable[int]) -> int:
    gone = set(removed)
    seen = set(gone)
    odd = 0
    for s in range(g.n):
        if s in seen:
            continue
        seen.add(s)
        size, stack = 1, [s]
        while stack:
            u = stack.pop()
            for w in g.adj[u]:
                if w not in seen:
                    seen.add(w)
                    size += 1
                    stack.append(w)
        odd += size & 1
    return odd


def tutte_berge_oracle(g: Graph, limit: int = 22) -> TutteBergeCertificate:
    """Minimise n + |S| - o(G - S) over all S (largest S on ties)."""
    n = g.n
    if n > limit:
        raise ValueError(f"Tutte-Berge enumeration limited to n <= {limit}, got {n}")
    nbr = [sum(1 << w for w in g.adj[v]) for v in range(n)]
    full = (1 << n) - 1
    best = None
    for s_mask in range(1 << n):
        rest = full & ~s_mask
        odd = 0
        while rest:
            low = rest & -rest
            comp = low
            frontier = low
            while frontier:
                b = frontier & -frontier
                frontier ^= b
                new = nbr[b.bit_length() - 1] & rest & ~comp
                comp |= new
                frontier |= new
            rest &= ~comp
            odd += bin(comp).count("1") & 1
        s_size = bin(s_mask).count("1")
        key = (n + s_size - odd, -s_size)
        if best is None or key < best[0]:
            best = (key, s_mask, odd)
    (value, _), s_mask, odd = best
    witness = frozenset(v for v in range(n) if (s_mask >> v) & 1)
    return TutteBergeCertificate(witness, odd, value)


# ---------------------------------------------------------------- peeling


def loglog(n: float) -> float:
    return math.log(math.log(n)) if n > math.e else float("nan")


@dataclass(frozen=True)
class PeelConfig:
    ell: int
    r: float = 0.0
    cycle_budget: float | None = None

    def __post_init__(self):
        if self.ell < 1 or self.r < 0:
            raise ValueError("need ell >= 1 and r >= 0")


@dataclass
class PeelAudit:
    sizes: list[int] = field(default_factory=list)
    max_degrees: list[int] = field(default_factory=list)
    edge_counts: list[int] = field(default_factory=list)
    bound: list[float] = field(default_factory=list)
    disjoint_cycles_lb: int = 0
    cycle_budget: float = float("nan")


def _degree_first_matching(g: Graph) -> Matching:
    """Greedy matching that serves high-degree vertices first.

    Augmentation never unsaturates a vertex, so a maximum matching grown from
    this start tends to cover the vertices that would otherwise lose an edge.
    """
    mate = [-1] * g.n
    deg = g.degree
    edges = []
    for v in sorted(range(g.n), key=lambda x: (-deg[x], x)):
        if mate[v] >= 0 or not deg[v]:
            continue
        free = [w for w in g.adj[v] if mate[w] < 0]
        if free:
            w = max(free, key=lambda x: (deg[x], -x))
            mate[v], mate[w] = w, v
            edges.append(norm_edge(v, w))
    return Matching(g.n, frozenset(edges))


def peel_matchings(h: Graph, k: int, cfg: PeelConfig | None = None) -> tuple[list[Matching], PeelAudit]:
    """Peel k-1 edge-disjoint matchings from a graph of max degree <= k-1.

    Layer i is a maximum matching of H_i; H_{i+1} drops that matching and,
    for each vertex it leaves unsaturated whose degree is still the maximum,
    the incident edge whose other end has the largest residual degree (ties
    to the smaller id).
    """
    if h.max_degree() > k - 1:
        raise ValueError(f"max degree {h.max_degree()} exceeds k-1={k - 1}")
    cfg = cfg or PeelConfig(ell=max(k - 1, 1))
    n = h.n
    ll6 = loglog(n) ** 6
    audit = PeelAudit()
    audit.disjoint_cycles_lb = count_disjoint_cycles_lb(h)
    audit.cycle_budget = cfg.cycle_budget if cfg.cycle_budget is not None else 2 * n / ll6
    layers = []
    cur = h
    for i in range(1, k):
        mi = max_matching(cur, _degree_first_matching(cur))
        layers.append(mi)
        audit.sizes.append(mi.size)
        audit.max_degrees.append(cur.max_degree())
        audit.edge_counts.append(cur.m)
        audit.bound.append(n / 2 - (cfg.r + 2) * n / (2 * ll6))
        adj = [set(a) for a in cur.adj]
        for u, v in mi.edges:
            adj[u].discard(v)
            adj[v].discard(u)
        sat = mi.saturated
        cap = max(cur.max_degree() - 1, 0)
        for v in range(n):
            # only vertices still at the old maximum need to give up an edge
            if sat[v] or len(adj[v]) <= cap:
                continue
            w = max(adj[v], key=lambda x: (len(adj[x]), -x))
            adj[v].discard(w)
            adj[w].discard(v)
        cur = Graph._trusted(n, adj)
    return layers, audit


def count_disjoint_cycles_lb(g: Graph) -> int:
    """Greedy lower bound on the number of vertex-disjoint cycles.

    Strip vertices of degree < 2, find a cycle by DFS, delete its vertices,
    repeat.
    """
    alive = [True] * g.n
    deg = list(g.degree)
    count = 0

    def strip(stack):
        while stack:
            v = stack.pop()
            if not alive[v]:
                continue
            alive[v] = False
            for w in g.adj[v]:
                if alive[w]:
                    deg[w] -= 1
                    if deg[w] < 2:
                        stack.append(w)

    strip([v for v in range(g.n) if deg[v] < 2])
    while True:
        start = next((v for v in range(g.n) if alive[v]), -1)
        if start < 0:
            return count
        cycle = _find_cycle(g, alive, start)
        count += 1
        for v in cycle:
            alive[v] = False
        dropped = []
        for v in cycle:
            for w in g.adj[v]:
                if alive[w]:
                    deg[w] -= 1
                    if deg[w] < 2:
                        dropped.append(w)
        strip(dropped)


def _find_cycle(g: Graph, alive: list[bool], start: int) -> list[int]:
    # min degree >= 2 in the alive part, so a DFS from start meets a back edge
    parent = {start: -1}
    depth = {start: 0}
    stack = [(start, iter(g.adj[start]))]
    while stack:
        v, it = stack[-1]
        for w in it:
            if not alive[w] or w == parent[v]:
                continue
            if w in depth:
                if depth[w] < depth[v]:
                    cyc = [v]
                    while cyc[-1] != w:
                        cyc.append(parent[cyc[-1]])
                    return cyc
                continue
            parent[w] = v
            depth[w] = depth[v] + 1
            stack.append((w, iter(g.adj[w])))
            break
        else:
            stack.pop()
    raise AssertionError("no cycle in a graph of minimum degree 2")


def max_disjoint_cycles_exact(g: Graph) -> int:
    """Exhaustive maximum vertex-disjoint cycle packing; oracle for n <= 12."""
    cycles = _all_cycle_vertex_sets(g)
    best = 0

    def rec(i: int, used: int, count: int) -> None:
        nonlocal best
        best = max(best, count)
        for j in range(i, len(cycles)):
            if not cycles[j] & used:
                rec(j + 1, used | cycles[j], count + 1)

    rec(0, 0, 0)
    return best


def _all_cycle_vertex_sets(g: Graph) -> list[int]:
    """Bitmasks of vertex sets that carry at least one cycle (as a cycle's vertex set)."""
    found = set()
    n = g.n
    for s in range(n):
        # cycles whose smallest vertex is s
        stack = [(s, 1 << s, -1)]
        while stack:
            v, mask, prev = stack.pop()
            for w in g.adj[v]:
                if w < s or w == prev:
                    continue
                if w == s:
                    if bin(mask).count("1") >= 3:
                        found.add(mask)
                    continue
                if not (mask >> w) & 1:
                    stack.append((w, mask | (1 << w), v))
    # minimal sets are enough for a packing
    return sorted(found, key=lambda x: bin(x).count("1"))


# ---------------------------------------------------------------- 2-matchings


@dataclass(frozen=True)
class TwoMatching:
    """Edge set in which every vertex has degree at most 2."""

    n: int
    edges: frozenset

    def __post_init__(self):
        deg = [0] * self.n
        for u, v in self.edges:
            if u == v:
                raise ValueError("loop in 2-matching")
            deg[u] += 1
            deg[v] += 1
        bad = [v for v, d in enumerate(deg) if d > 2]
        if bad:
            raise ValueError(f"vertices {bad[:5]} have 2-matching degree > 2")
        object.__setattr__(self, "_deg", tuple(deg))

    @classmethod
    def from_edges(cls, n: int, edges: Iterable[Sequence[int]]) -> TwoMatching:
        return cls(n, frozenset(norm_edge(int(u), int(v)) for u, v in edges))

    @property
    def deg_in(self) -> tuple[int, ...]:
        return self._deg

    @property
    def size(self) -> int:
        return len(self.edges)

    def deficient(self) -> list[int]:
        return [v for v, d in enumerate(self._deg) if d < 2]

    def is_two_factor(self) -> bool:
        return all(d == 2 for d in self._deg)


class _Gadget:
    """Matching instance whose maximum matchings are maximum simple b-matchings."""

    def __init__(self, g: Graph, b: int, start: Iterable[Edge]):
        n = g.n
        self.n, self.b = n, b
        self.edges = g.edge_list()
        nb = n * b
        size = nb + 2 * len(self.edges)
        adj: list[list[int]] = [[] for _ in range(size)]
        for j, (u, v) in enumerate(self.edges):
            eu, ev = nb + 2 * j, nb + 2 * j + 1
            adj[eu].append(ev)
            adj[ev].append(eu)
            for c in range(b):
                adj[eu].append(u * b + c)
                adj[u * b + c].append(eu)
                adj[ev].append(v * b + c)
                adj[v * b + c].append(ev)
        self.adj = adj
        mate = [-1] * size
        used = [0] * n
        chosen = {norm_edge(u, v) for u, v in start}
        for j, (u, v) in enumerate(self.edges):
            eu, ev = nb + 2 * j, nb + 2 * j + 1
            if (u, v) in chosen and used[u] < b and used[v] < b:
                cu, cv = u * b + used[u], v * b + used[v]
                used[u] += 1
                used[v] += 1
                mate[eu], mate[cu] = cu, eu
                mate[ev], mate[cv] = cv, ev
            else:
                mate[eu], mate[ev] = ev, eu
        self.mate = mate
        self.engine = _Blossom(adj, mate)

    def free_copies(self, v: int) -> list[int]:
        return [v * self.b + c for c in range(self.b) if self.mate[v * self.b + c] == -1]

    def chosen_edges(self) -> frozenset:
        nb = self.n * self.b
        return frozenset(e for j, e in enumerate(self.edges) if self.mate[nb + 2 * j] < nb)


def _shortest_alternating_augment(
    adj: Sequence[Iterable[int]], chosen: set, deg: list[int], b: int, root: int, max_depth: int
) -> list[int] | None:
    """Shortest alternating walk from ``root`` that is a valid augmentation.

    Odd steps leave on unchosen edges, even steps on chosen ones.  A walk of
    odd length ending at a vertex with spare capacity augments provided it
    never reuses an edge.  Returns the vertex sequence or None.
    """
    parent = {(root, 0): None}
    frontier = [(root, 0)]
    depth = 0
    while frontier and depth < max_depth:
        depth += 1
        nxt = []
        for state in frontier:
            u, parity = state
            for w in adj[u]:
                in_m = norm_edge(u, w) in chosen
                if parity == 0 and in_m or parity == 1 and not in_m:
                    continue
                child = (w, 1 - parity)
                if child in parent:
                    continue
                parent[child] = state
                if parity == 0:
                    room = deg[w] + (2 if w == root else 1)
                    if room <= b:
                        walk = [w]
                        s = state
                        while s is not None:
                            walk.append(s[0])
                            s = parent[s]
                        walk.reverse()
                        es = [norm_edge(a, c) for a, c in zip(walk, walk[1:])]
                        if len(set(es)) == len(es):
                            return walk
                nxt.append(child)
        frontier = nxt
    return None


def _apply_walk(walk: Sequence[int], chosen: set, deg: list[int]) -> None:
    for i, (a, c) in enumerate(zip(walk, walk[1:])):
        e = norm_edge(a, c)
        if i % 2 == 0:
            chosen.add(e)
        else:
            chosen.discard(e)
    deg[walk[0]] += 1
    deg[walk[-1]] += 1


def min_degree_greedy_b_matching(g: Graph, b: int) -> set:
    """Greedy b-matching that always serves the vertex with fewest open options.

    Ties go to the smaller vertex id, so the result is deterministic.
    """
    import heapq

    n = g.n
    cap = [b] * n
    avail = [set(a) for a in g.adj]
    heap = [(len(avail[v]), v) for v in range(n) if avail[v]]
    heapq.heapify(heap)
    chosen = set()

    def close(v):
        for w in avail[v]:
            avail[w].discard(v)
            if avail[w] and cap[w] > 0:
                heapq.heappush(heap, (len(avail[w]), w))
        avail[v].clear()

    while heap:
        d, v = heapq.heappop(heap)
        if cap[v] == 0 or not avail[v] or d != len(avail[v]):
            continue
        w = min(avail[v], key=lambda x: (len(avail[x]), x))
        chosen.add(norm_edge(v, w))
        avail[v].discard(w)
        avail[w].discard(v)
        for x in (v, w):
            cap[x] -= 1
            if cap[x] == 0:
                close(x)
            elif avail[x]:
                heapq.heappush(heap, (len(avail[x]), x))
    return chosen


def max_b_matching(g: Graph, b: int, initial: Iterable[Edge] | None = None, exact: bool = True,
                   local_depth: int = 12) -> frozenset:
    """Maximum simple b-matching (every vertex in at most b chosen edges).

    Short alternating augmentations run first; with ``exact`` the remaining
    deficient vertices go through blossom search on the gadget graph, which
    certifies maximality.
    """
    chosen = set(min_degree_greedy_b_matching(g, b) if initial is None else (norm_edge(u, v) for u, v in initial))
    deg = [0] * g.n
    for u, v in chosen:
        deg[u] += 1
        deg[v] += 1
    if local_depth > 0:
        for v in range(g.n):
            while deg[v] < b:
                walk = _shortest_alternating_augment(g.adj, chosen, deg, b, v, local_depth)
                if walk is None:
                    break
                _apply_walk(walk, chosen, deg)
    if not exact:
        return frozenset(chosen)
    gad = _Gadget(g, b, chosen)
    for v in range(g.n):
        for c in gad.free_copies(v):
            if gad.mate[c] == -1:
                gad.engine.search(c)
    return gad.chosen_edges()


def greedy_b_matching(g: Graph, b: int, order: Sequence[Edge]) -> set:
    deg = [0] * g.n
    out = set()
    for u, v in order:
        if deg[u] < b and deg[v] < b:
            out.add(norm_edge(u, v))
            deg[u] += 1
            deg[v] += 1
    return out


@dataclass(frozen=True)
class AugmentFailure:
    """Alternating reachability from a deficient vertex with no augmenting path.

    ``q_even`` holds vertices reachable by an even alternating walk
    (including the root), ``w_odd`` the vertices whose shortest alternating
    walk is odd, ``q_shortest_even`` those whose shortest walk is even.
    """

    root: int
    q_shortest_even: frozenset
    w_odd: frozenset
    q_even: frozenset


def alternating_reach(g: Graph, m: TwoMatching, v: int) -> AugmentFailure:
    """BFS over alternating walks: odd steps leave on non-m edges, even steps on m edges."""
    dist_even = {v: 0}
    dist_odd: dict[int, int] = {}
    queue = deque([(v, 0)])
    while queue:
        u, parity = queue.popleft()
        d = dist_even[u] if parity == 0 else dist_odd[u]
        for w in g.adj[u]:
            in_m = norm_edge(u, w) in m.edges
            if parity == 0 and not in_m and w not in dist_odd:
                dist_odd[w] = d + 1
                queue.append((w, 1))
            elif parity == 1 and in_m and w not in dist_even:
                dist_even[w] = d + 1
                queue.append((w, 0))
    q_short = {u for u, d in dist_even.items() if u == v or d < dist_odd.get(u, math.inf)}
    w_odd = {u for u, d in dist_odd.items() if u != v and d < dist_even.get(u, math.inf)}
    return AugmentFailure(v, frozenset(q_short), frozenset(w_odd), frozenset(dist_even))


def augment_two_matching(g: Graph, m: TwoMatching, v: int | None = None) -> TwoMatching | AugmentFailure:
    """One augmentation step from a deficient vertex.

    Returns a 2-matching of size |m|+1, or the alternating reachability sets
    as a failure witness when no augmenting path starts at ``v``.
    """
    if m.n != g.n or any(not g.has_edge(a, b) for a, b in m.edges):
        raise ValueError("2-matching is not a subgraph of g")
    if v is None:
        defic = m.deficient()
        if not defic:
            return alternating_reach(g, m, 0)
        v = defic[0]
    if m.deg_in[v] >= 2:
        raise ValueError(f"vertex {v} is not deficient")
    chosen = set(m.edges)
    deg = list(m.deg_in)
    walk = _shortest_alternating_augment(g.adj, chosen, deg, 2, v, 2 * g.n + 2)
    if walk is not None:
        _apply_walk(walk, chosen, deg)
        return TwoMatching(g.n, frozenset(chosen))
    # no simple shortest walk: fall back to an exact blossom search
    gad = _Gadget(g, 2, m.edges)
    root = gad.free_copies(v)[0]
    if gad.engine.search(root):
        return TwoMatching(g.n, gad.chosen_edges())
    return alternating_reach(g, m, v)


def max_two_matching(g: Graph, initial: TwoMatching | Iterable[Edge] | None = None) -> TwoMatching:
    """Maximum 2-matching; augments from every deficient vertex until none succeeds."""
    if isinstance(initial, TwoMatching):
        initial = initial.edges
    return TwoMatching(g.n, max_b_matching(g, 2, initial))


def brute_force_two_matching_number(g: Graph) -> int:
    """Largest edge subset of max degree 2, by exhaustive branch and bound."""
    edges = g.edge_list()
    best = 0
    deg = [0] * g.n

    def rec(i: int, size: int) -> None:
        nonlocal best
        if size + len(edges) - i <= best:
            return
        best = max(best, size)
        if i == len(edges):
            return
        u, v = edges[i]
        if deg[u] < 2 and deg[v] < 2:
            deg[u] += 1
            deg[v] += 1
            rec(i + 1, size + 1)
            deg[u] -= 1
            deg[v] -= 1
        rec(i + 1, size)

    rec(0, 0)
    return best
