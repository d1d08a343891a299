"""Path covers, fake-edge gluing, Posa rotations and reservoir-driven closure.

A vertex-disjoint path cover is glued into one Hamilton path with artificial
("fake") edges.  Rotations that fix one end move the other end around; a
rotation that deletes a fake edge, or a closing edge between the two ends,
shrinks the cover by one.  When the host graph alone makes no progress,
reservoir edges are added one at a time and any that lands on a closable
endpoint pair is used to close the path.

Rotation searches never copy paths: a rotated path is the base path plus the
list of cut positions, and positions are mapped through the cuts on demand.
"""

from __future__ import annotations

import json
import logging
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from hamcore.graph_core import Edge, Graph, norm_edge
from hamcore.matching import TwoMatching

log = logging.getLogger(__name__)

LEFT, RIGHT = "left", "right"


# ---------------------------------------------------------------- path covers


@dataclass(frozen=True)
class PathCover:
    """Vertex-disjoint paths covering every vertex; ``size == 0`` means ``cycle`` is Hamiltonian."""

    n: int
    paths: tuple[tuple[int, ...], ...]
    fake_edges: frozenset = frozenset()
    m_intersection: int = 0
    cycle: tuple[int, ...] | None = None

    @property
    def size(self) -> int:
        return 0 if self.cycle is not None else len(self.paths)

    @property
    def real_edges(self) -> frozenset:
        if self.cycle is not None:
            c = self.cycle
            return frozenset(norm_edge(c[i], c[(i + 1) % len(c)]) for i in range(len(c)))
        return frozenset(norm_edge(a, b) for p in self.paths for a, b in zip(p, p[1:]))

    def check(self) -> None:
        if self.cycle is not None:
            if sorted(self.cycle) != list(range(self.n)):
                raise AssertionError("cycle is not spanning")
            return
        seen = [v for p in self.paths for v in p]
        if sorted(seen) != list(range(self.n)):
            raise AssertionError("paths do not partition the vertex set")
        if self.fake_edges & self.real_edges:
            raise AssertionError("fake and real edges overlap")


def vdpc_from_two_matching(m: TwoMatching) -> PathCover:
    """Break each cycle of a 2-matching at its smallest edge; paths plus singletons cover V."""
    adj: list[list[int]] = [[] for _ in range(m.n)]
    for u, v in m.edges:
        adj[u].append(v)
        adj[v].append(u)
    seen = [False] * m.n
    paths = []
    cycles = 0
    for s in range(m.n):
        if seen[s]:
            continue
        comp = []
        stack = [s]
        seen[s] = True
        while stack:
            u = stack.pop()
            comp.append(u)
            for w in adj[u]:
                if not seen[w]:
                    seen[w] = True
                    stack.append(w)
        ends = [v for v in comp if len(adj[v]) < 2]
        banned = None
        if ends:
            start = min(ends)
        else:
            cycles += 1
            banned = min(norm_edge(u, w) for u in comp for w in adj[u])
            start = banned[0]
        path = [start]
        prev, cur = -1, start
        while True:
            nxt = [w for w in adj[cur] if w != prev and norm_edge(cur, w) != banned]
            if not nxt:
                break
            prev, cur = cur, nxt[0]
            path.append(cur)
        paths.append(tuple(path))
    paths.sort(key=lambda p: min(p))
    return PathCover(m.n, tuple(paths), frozenset(), m.size - cycles)


def glue_with_fake_edges(pc: PathCover, i: int, j: int) -> tuple[list[int], frozenset]:
    """Concatenate all cover paths into one Hamilton path.

    Starts with path ``i`` (from its first vertex) and ends with path ``j``
    (at its last vertex); the remaining paths go in between in index order.
    Uses exactly ``size - 1`` fake edges.
    """
    s = pc.size
    if s < 1:
        raise ValueError("nothing to glue: cover is already a cycle")
    if s > 1 and i == j:
        raise ValueError("start and end path must differ when there are several paths")
    if s == 1:
        return list(pc.paths[0]), frozenset()
    order = [i] + [x for x in range(s) if x not in (i, j)] + [j]
    path: list[int] = []
    fakes = set()
    for x in order:
        if path:
            fakes.add(norm_edge(path[-1], pc.paths[x][0]))
        path.extend(pc.paths[x])
    return path, frozenset(fakes)


def split_at_fakes(path: Sequence[int], fakes: frozenset | set) -> list[tuple[int, ...]]:
    if not fakes:
        return [tuple(path)]
    pos = dict(zip(path, range(len(path))))
    cuts = sorted(min(pos[a], pos[b]) for a, b in fakes)
    out = []
    prev = 0
    for c in cuts:
        if c + 1 >= len(path) or norm_edge(path[c], path[c + 1]) not in fakes:
            raise ValueError("fake edge is not a path edge")
        out.append(tuple(path[prev: c + 1]))
        prev = c + 1
    out.append(tuple(path[prev:]))
    return out


# ---------------------------------------------------------------- rotations


def rotate(path: Sequence[int], fixed_end: int, inserted: Edge) -> tuple[list[int], int, Edge]:
    """One Posa rotation fixing ``fixed_end``.

    For path (x_1..x_s) and inserted edge {x_s, x_i} with 1 < i < s-1 returns
    (x_1..x_i, x_s, x_{s-1}..x_{i+1}), the pivot x_i and the deleted edge
    {x_i, x_{i+1}}.
    """
    p = list(path)
    if p[0] != fixed_end:
        if p[-1] != fixed_end:
            raise ValueError("fixed_end is not an endpoint of the path")
        p.reverse()
    s = len(p)
    a, b = inserted
    far = p[-1]
    if far not in (a, b):
        raise ValueError("inserted edge must be incident to the moving endpoint")
    xi = b if a == far else a
    try:
        j = p.index(xi)
    except ValueError:
        raise ValueError("inserted edge leaves the path") from None
    if not 1 <= j <= s - 3:
        raise ValueError(f"pivot index {j + 1} is outside (1, {s - 1})")
    out = p[: j + 1] + p[:j:-1]
    return out, xi, norm_edge(xi, p[j + 1])


def l_depth(n: int, s: int, cap: int = 60) -> int:
    """log_1.1(n / max(s-1, 1)) + 4, rounded up and capped."""
    return min(cap, math.ceil(math.log(n / max(s - 1, 1), 1.1)) + 4) if n > 1 else 4


def l_depth_right(n: int, s: int, cap: int = 60) -> int:
    extra = math.log(math.log(n), 1.1) if n > math.e else 0.0
    return min(cap, math.ceil(math.log(n / max(s - 1, 1), 1.1) + 4 + extra)) if n > 1 else 4


@dataclass
class GrowthCheck:
    """Literal growth/density disjunction for one expansion step ell -> ell+1."""

    ell: int
    end_before: int
    end_after: int
    union_size: int
    union_edges: int

    @property
    def holds(self) -> bool:
        return (
            self.ell <= 4
            or self.end_after >= 1.1 * self.end_before
            or self.union_edges >= 1.1 * self.union_size
        )


@dataclass
class Expansion:
    """Result of a breadth-first rotation search from one family of base paths."""

    fixed: int
    bases: list[list[int]]
    base_depth: list[int]
    nodes: list[tuple[int, tuple[int, ...], int]]  # (base index, cuts, endpoint)
    end_node: dict[int, int]
    pivots: set
    layer_ends: list[int]
    checks: list[GrowthCheck]
    base_fakes: list = field(default_factory=list)
    event: str | None = None  # "fake" or "close"
    event_node: int = -1
    deleted_fake: Edge | None = None
    saturated: bool = False

    def fakes_of(self, node: int) -> frozenset:
        return self.base_fakes[self.nodes[node][0]]

    def depth_of(self, node: int) -> int:
        b, cuts, _ = self.nodes[node]
        return self.base_depth[b] + len(cuts)

    def path_of(self, node: int) -> list[int]:
        b, cuts, end = self.nodes[node]
        p = list(self.bases[b])
        for c in cuts:
            p[c + 1:] = p[: c: -1]
        assert p[-1] == end
        return p

    @property
    def endpoints(self) -> frozenset:
        return frozenset(self.end_node)


def expand_family(
    adj: Sequence[Iterable[int]],
    bases: list[list[int]],
    fakes: frozenset | set | list,
    depth_limit: int,
    base_depth: list[int] | None = None,
    stop_on_event: bool = True,
    closing: bool = True,
) -> Expansion:
    """BFS over rotations that fix ``bases[*][0]``, keeping one witness per endpoint.

    Inserted edges come from ``adj`` (never fake).  Stops at the first
    rotation that deletes a fake edge, or (with ``closing``) at the first
    endpoint adjacent to the fixed vertex.
    """
    fixed = bases[0][0]
    s = len(bases[0])
    poss = []
    for p in bases:
        pos = [0] * len(adj)
        for idx, v in enumerate(p):
            pos[v] = idx
        poss.append(pos)
    per_base = [frozenset(f) for f in fakes] if isinstance(fakes, list) else [frozenset(fakes)] * len(bases)
    exp = Expansion(fixed, bases, base_depth or [0] * len(bases), [], {}, set(), [], [], per_base)
    union: set = set()
    union_edges = 0

    def add_union(x):
        nonlocal union_edges
        if x in union:
            return
        union_edges += sum(1 for w in adj[x] if w in union)
        union.add(x)

    can_close = closing and s >= 3
    frontier = []
    for b, p in enumerate(bases):
        end = p[-1]
        if end in exp.end_node:
            continue
        exp.end_node[end] = len(exp.nodes)
        frontier.append(len(exp.nodes))
        exp.nodes.append((b, (), end))
        add_union(end)
        if can_close and fixed in adj[end] and stop_on_event:
            exp.event, exp.event_node = "close", frontier[-1]
            exp.layer_ends.append(len(exp.end_node))
            return exp
    exp.layer_ends.append(len(exp.end_node))
    depth = 0
    lo, hi = 1, s - 3
    while frontier and depth < depth_limit:
        nxt = []
        before = len(exp.end_node)
        for nid in frontier:
            b, cuts, u = exp.nodes[nid]
            pos, base, fk = poss[b], bases[b], per_base[b]
            rcuts = cuts[::-1]
            for w in adj[u]:
                p = pos[w]
                for c in cuts:
                    if p > c:
                        p = s + c - p
                if p < lo or p > hi:
                    continue
                q = p + 1
                for c in rcuts:
                    if q > c:
                        q = s + c - q
                y = base[q]
                if w not in exp.pivots:
                    exp.pivots.add(w)
                    add_union(w)
                if (w, y) in fk or (y, w) in fk:
                    if stop_on_event:
                        exp.nodes.append((b, cuts + (p,), y))
                        exp.event, exp.event_node = "fake", len(exp.nodes) - 1
                        exp.deleted_fake = norm_edge(w, y)
                        return exp
                    continue
                if y in exp.end_node:
                    continue
                exp.end_node[y] = len(exp.nodes)
                exp.nodes.append((b, cuts + (p,), y))
                nxt.append(exp.end_node[y])
                add_union(y)
                if can_close and stop_on_event and fixed in adj[y]:
                    exp.event, exp.event_node = "close", exp.end_node[y]
                    return exp
        exp.checks.append(GrowthCheck(depth, before, len(exp.end_node), len(union), union_edges))
        exp.layer_ends.append(len(exp.end_node))
        frontier = nxt
        depth += 1
    exp.saturated = not frontier
    return exp


@dataclass
class RotationState:
    """Endpoint/pivot sets reachable by rotations that fix ``fixed_end``."""

    current_path: tuple[int, ...]
    fixed_end: int
    endpoints: frozenset = frozenset()
    pivots: frozenset = frozenset()
    depth: int = 0
    depth_limits: tuple[int, int] = (0, 0)
    side: str = LEFT
    forbidden: frozenset = frozenset()
    layers: list[frozenset] = field(default_factory=list)
    fake_deletion: tuple[int, ...] | None = None
    witnesses: dict = field(default_factory=dict)


def expand_endpoints(g: Graph, state: RotationState, depth_limit: int, dedup: str = "path") -> RotationState:
    """Endpoints and pivots of all paths within ``depth_limit`` rotations.

    ``dedup="path"`` keeps every distinct path (exact End sets);
    ``dedup="endpoint"`` keeps the first witness per endpoint, which is what
    the packing engine uses.  Inserted edges never belong to ``forbidden``;
    a rotation that deletes a forbidden edge is reported in
    ``fake_deletion`` together with the resulting path.
    """
    path = list(state.current_path)
    if path[0] != state.fixed_end:
        path.reverse()
    if path[0] != state.fixed_end:
        raise ValueError("fixed_end must be an endpoint of current_path")
    forb = state.forbidden
    if dedup == "endpoint":
        exp = expand_family(g.adj, [path], forb, depth_limit, stop_on_event=False, closing=False)
        layers = []
        for count in exp.layer_ends:
            layers.append(frozenset(e for e, nid in exp.end_node.items() if nid < _nodes_upto(exp, count)))
        return RotationState(
            tuple(path), state.fixed_end, exp.endpoints, frozenset(exp.pivots), len(exp.layer_ends) - 1,
            state.depth_limits, state.side, forb, layers, None,
            {e: tuple(exp.path_of(nid)) for e, nid in exp.end_node.items()},
        )
    if dedup != "path":
        raise ValueError(f"unknown dedup mode {dedup!r}")
    seen = {tuple(path)}
    frontier = [tuple(path)]
    ends = {path[-1]}
    pivots: set = set()
    layers = [frozenset(ends)]
    witnesses = {path[-1]: tuple(path)}
    fake_hit = None
    for _ in range(depth_limit):
        nxt = []
        for p in frontier:
            s = len(p)
            where = {v: i for i, v in enumerate(p)}
            for w in g.adj[p[-1]]:
                j = where[w]
                if not 1 <= j <= s - 3 or norm_edge(w, p[-1]) in forb:
                    continue
                new = p[: j + 1] + p[:j:-1]
                pivots.add(w)
                if norm_edge(w, p[j + 1]) in forb and fake_hit is None:
                    fake_hit = new
                if new not in seen:
                    seen.add(new)
                    nxt.append(new)
                    ends.add(new[-1])
                    witnesses.setdefault(new[-1], new)
        layers.append(frozenset(ends))
        frontier = nxt
        if not frontier:
            break
    return RotationState(
        tuple(path), state.fixed_end, frozenset(ends), frozenset(pivots), len(layers) - 1,
        state.depth_limits, state.side, forb, layers, fake_hit, witnesses,
    )


def _nodes_upto(exp: Expansion, end_count: int) -> int:
    # node ids are allocated in discovery order, so the first end_count endpoints are a prefix
    ids = sorted(exp.end_node.values())
    return ids[end_count - 1] + 1 if end_count else 0


# ---------------------------------------------------------------- closure targets


@dataclass
class ClosureTargets:
    """Endpoint pairs {v', u} closable after rotations, with witness paths.

    ``v'`` ranges over V_right; its rotation family is expanded lazily the
    first time a pair touching it is queried, or eagerly by ``materialize``.
    """

    adj: Sequence[Iterable[int]]
    n: int
    s: int
    right: dict  # v' -> list of (path, depth, fakes)
    depth_right: int
    expansions: dict = field(default_factory=dict)
    checks: list[GrowthCheck] = field(default_factory=list)
    host_closure: Expansion | None = None
    fake_event: Expansion | None = None

    @property
    def v_right(self) -> list[int]:
        return sorted(self.right)

    def _expand(self, v: int) -> Expansion:
        if v not in self.expansions:
            fam = self.right[v]
            exp = expand_family(
                self.adj, [p for p, _, _ in fam], [f for _, _, f in fam], self.depth_right,
                base_depth=[d for _, d, _ in fam], stop_on_event=True,
            )
            self.expansions[v] = exp
            self.checks.extend(exp.checks)
            if exp.event == "fake" and self.fake_event is None:
                self.fake_event = exp
            elif exp.event == "close" and self.host_closure is None:
                self.host_closure = exp
        return self.expansions[v]

    def witness(self, a: int, b: int):
        """(path from one end of the pair to the other, rotations used, fakes) or None."""
        for x, y in ((a, b), (b, a)):
            if x in self.right:
                exp = self._expand(x)
                if exp.event == "fake":
                    continue
                nid = exp.end_node.get(y)
                if nid is not None:
                    return exp.path_of(nid), exp.depth_of(nid), exp.fakes_of(nid)
        return None

    def __contains__(self, pair) -> bool:
        return self.witness(*pair) is not None

    def materialize(self) -> set:
        out = set()
        for v in self.v_right:
            exp = self._expand(v)
            if exp.event == "fake":
                continue
            out.update(norm_edge(v, u) for u in exp.end_node if u != v)
        return out


def _families_for_cover(paths: Sequence[Sequence[int]], limit: int):
    """Glued Hamilton paths H_{i,j}, one per left end v_{i,1} (j = the path before i), lazily."""
    s = len(paths)
    ends = [norm_edge(paths[x - 1][-1], paths[x][0]) for x in range(s)]  # glue into path x
    every = frozenset(ends) if s > 1 else frozenset()
    for i in range(min(s, limit)):
        path: list[int] = []
        for d in range(s):
            path.extend(paths[(i + d) % s])
        yield paths[i][0], path, (every - {ends[i]}) if s > 1 else every


def build_closure_targets(
    g: Graph | Sequence[Iterable[int]],
    cover: PathCover | Sequence[Sequence[int]],
    n: int | None = None,
    depth_cap: int = 60,
    left_limit: int = 16,
    right_probe: int = 0,
) -> tuple[ClosureTargets, list[Expansion]]:
    """Expand every left family, pick V_right and return the lazy target set Q_t.

    Returns the targets and the left expansions.  A left expansion that hit
    a fake edge or found a closing chord is reported through its ``event``;
    callers should act on it before consulting the targets.
    """
    adj = g.adj if isinstance(g, Graph) else g
    paths = [list(p) for p in (cover.paths if isinstance(cover, PathCover) else cover)]
    n = n if n is not None else len(adj)
    s = len(paths)
    lt = l_depth(n, s, depth_cap)
    lt2 = l_depth_right(n, s, depth_cap)
    fams = _families_for_cover(paths, left_limit)
    n_fams = min(s, left_limit)
    lefts = []
    hits: dict[int, list] = {}
    for v, path, fakes in fams:
        exp = expand_family(adj, [path], fakes, lt)
        lefts.append(exp)
        if exp.event is not None:
            break
        for u, nid in exp.end_node.items():
            hits.setdefault(u, []).append((exp, nid, fakes))
    threshold = max(n_fams / math.log(n), 1) if n > 1 else 1
    right = {}
    if not any(e.event for e in lefts):
        for u in sorted(hits):
            fam = hits[u]
            if len(fam) < threshold:
                continue
            want = max(1, math.floor(max(s / math.log(n), 1))) if n > 1 else 1
            chosen = []
            used_ends = set()
            for exp, nid, fakes in sorted(fam, key=lambda x: x[0].fixed):
                if exp.fixed in used_ends:
                    continue
                used_ends.add(exp.fixed)
                p = exp.path_of(nid)
                p.reverse()
                chosen.append((p, exp.depth_of(nid), fakes))
                if len(chosen) >= want:
                    break
            right[u] = chosen
    targets = ClosureTargets(adj, n, s, right, lt2)
    for e in lefts:
        targets.checks.extend(e.checks)
    for v in targets.v_right[:right_probe]:
        targets._expand(v)
        if targets.fake_event or targets.host_closure:
            break
    return targets, lefts


# ---------------------------------------------------------------- closure schedule


@dataclass
class ClosureSchedule:
    """Cover size s_t and matching-loss budget r_t along reservoir time t."""

    n: int
    s: int
    r: float
    t: int = 0
    history: list[tuple[int, int, float]] = field(default_factory=list)

    @classmethod
    def start(cls, n: int, s0: int, epsilon: float = 0.0) -> ClosureSchedule:
        ll = math.log(math.log(n)) if n > math.e else 1.0
        r0 = 2 * n / ll ** (6 - epsilon) if ll > 0 else 0.0
        sch = cls(n, s0, r0)
        sch.history.append((0, s0, r0))
        return sch

    def increment(self, s_new: int) -> float:
        n = self.n
        if n <= math.e ** math.e:
            return 0.0
        ln = math.log(n)
        lln = math.log(ln)
        llln = math.log(lln) if lln > 1 else 0.0
        if s_new >= n / lln**8:
            return llln**2
        if s_new > n / ln**8:
            return lln**2
        return ln**2

    def drop(self, s_new: int) -> None:
        if s_new >= self.s:
            raise ValueError("cover size must strictly drop")
        self.r += self.increment(s_new)
        self.s = s_new
        self.history.append((self.t, self.s, self.r))

    def consume(self) -> None:
        self.t += 1


# ---------------------------------------------------------------- engine


@dataclass
class ClosureEvent:
    t: int
    s_t: int
    r_t: float
    depth_used: int
    fake_edges_remaining: int
    kind: str
    m_intersection: int
    delta_real: int
    depth_bound: int

    def as_json(self) -> dict:
        return {
            "t": self.t, "s_t": self.s_t, "r_t": self.r_t, "depth_used": self.depth_used,
            "fake_edges_remaining": self.fake_edges_remaining, "kind": self.kind,
            "m_intersection": self.m_intersection, "delta_real": self.delta_real,
        }


@dataclass
class PackStepResult:
    status: str  # "cycle" or "exhausted"
    cycle: tuple[int, ...] | None
    cover: PathCover
    reservoir_used: int
    events: list[ClosureEvent]
    schedule: ClosureSchedule
    growth_checks: int
    growth_violations: list[GrowthCheck]
    used_reservoir_edges: list[Edge]

    @property
    def success(self) -> bool:
        return self.status == "cycle"


@dataclass
class EngineConfig:
    depth_cap: int = 60
    left_limit: int = 16
    right_probe: int = 4
    final_probe: int = 64
    rebuild_after: int = 2048
    epsilon: float = 0.0
    max_rounds: int = 1_000_000
    audit: bool = False  # per-event real-edge diffs, O(n) each


def _trace_enabled() -> bool:
    return os.environ.get("HAMCORE_LOG", "").lower() in ("trace", "debug")


def consume_reservoir(
    g: Graph | Sequence[Iterable[int]],
    pc: PathCover,
    target_m: TwoMatching | Iterable[Edge],
    reservoir: Sequence[Edge],
    sched: ClosureSchedule | None = None,
    cfg: EngineConfig | None = None,
) -> PackStepResult:
    """Drive a path cover to a Hamilton cycle of host + consumed reservoir edges.

    Progress comes from, in order: rotations deleting a fake edge, closing
    chords already present in the host, and reservoir edges landing on the
    closable pair set.  Every reservoir edge read joins the host whether or
    not it closes anything.
    """
    cfg = cfg or EngineConfig()
    n = pc.n
    adj = [set(a) for a in (g.adj if isinstance(g, Graph) else g)]
    target = frozenset(target_m.edges if isinstance(target_m, TwoMatching) else (norm_edge(*e) for e in target_m))
    trace = _trace_enabled()
    if pc.cycle is not None or n < 3:
        sched = sched or ClosureSchedule.start(max(n, 3), 0, cfg.epsilon)
        return PackStepResult("cycle" if pc.cycle is not None else "exhausted", pc.cycle, pc, 0, [], sched, 0, [], [])
    path, fakes = glue_with_fake_edges(pc, 0, pc.size - 1)
    sched = sched or ClosureSchedule.start(n, pc.size, cfg.epsilon)
    events: list[ClosureEvent] = []
    checks: list[GrowthCheck] = []
    used: list[Edge] = []
    res_iter = iter(reservoir)
    res_left = len(reservoir)

    def real_edges(p, f):
        return {e for e in (norm_edge(a, b) for a, b in zip(p, p[1:])) if e not in f}

    prev_real = real_edges(path, fakes) if cfg.audit else set()

    def record(kind: str, new_path, new_fakes, depth: int, cycle=False):
        nonlocal path, fakes, prev_real
        if cfg.audit or cycle:
            real = real_edges(new_path, new_fakes)
            if cycle:
                real.add(norm_edge(new_path[0], new_path[-1]))
        else:
            real = prev_real
        s_new = 0 if cycle else len(new_fakes) + 1
        sched.drop(s_new)
        lt, lt2 = l_depth(n, s_new + 1, cfg.depth_cap), l_depth_right(n, s_new + 1, cfg.depth_cap)
        audited = cfg.audit or cycle
        ev = ClosureEvent(
            sched.t, s_new, sched.r, depth, len(new_fakes), kind,
            len(real & target) if audited else -1,
            len(real ^ prev_real) if cfg.audit else -1, 2 * (lt + lt2) + 1,
        )
        events.append(ev)
        if trace:
            log.debug(json.dumps(ev.as_json()))
        path, fakes, prev_real = new_path, frozenset(new_fakes), real

    def promote() -> bool:
        real_now = [f for f in fakes if f[1] in adj[f[0]]]
        if not real_now:
            return False
        f = min(real_now)
        record("promote", path, fakes - {f}, 0)
        return True

    def close_with(p, f, depth, kind):
        if not f:
            record(kind, p, frozenset(), depth, cycle=True)
            return
        cyc = p
        for idx in range(len(cyc) - 1):
            e = norm_edge(cyc[idx], cyc[idx + 1])
            if e in f:
                new = cyc[idx + 1:] + cyc[: idx + 1]
                record(kind, new, f - {e}, depth)
                return
        raise AssertionError("fake edge set not on the path")

    def act_on(exp: Expansion) -> None:
        f = exp.fakes_of(exp.event_node)
        p = exp.path_of(exp.event_node)
        d = exp.depth_of(exp.event_node)
        if exp.event == "fake":
            record("rotation", p, f - {exp.deleted_fake}, d)
        else:
            close_with(p, f, d, "host_close")

    def host_progress(targets: ClosureTargets, lefts: list[Expansion], paths) -> bool:
        hit = next((e for e in lefts if e.event), None)
        if hit is not None:
            act_on(hit)
            return True
        found = targets.fake_event or targets.host_closure
        if found:
            act_on(found)
            return True
        return False

    rounds = 0
    while sched.s > 0 and rounds < cfg.max_rounds:
        rounds += 1
        if promote():
            continue
        cover_paths = split_at_fakes(path, fakes)
        targets, lefts = build_closure_targets(adj, cover_paths, n, cfg.depth_cap, cfg.left_limit, cfg.right_probe)
        if host_progress(targets, lefts, cover_paths):
            checks.extend(targets.checks)
            continue
        progressed = False
        misses = 0
        while res_left > 0:
            a, b = norm_edge(*next(res_iter))
            res_left -= 1
            sched.consume()
            used.append((a, b))
            if b in adj[a]:
                continue
            adj[a].add(b)
            adj[b].add(a)
            if (a, b) in fakes:
                progressed = promote()
                break
            wit = targets.witness(a, b)
            if targets.fake_event or targets.host_closure:
                act_on(targets.fake_event or targets.host_closure)
                progressed = True
                break
            if wit is not None:
                p, d, f = wit
                close_with(p, f, d, "reservoir_close")
                progressed = True
                break
            misses += 1
            if misses >= cfg.rebuild_after:
                break
        checks.extend(targets.checks)
        if progressed or misses >= cfg.rebuild_after:
            continue
        # reservoir is spent: one last look with every consumed edge in the host
        targets, lefts = build_closure_targets(adj, cover_paths, n, cfg.depth_cap, cfg.left_limit, cfg.final_probe)
        checks.extend(targets.checks)
        if not host_progress(targets, lefts, cover_paths):
            break
    violations = [c for c in checks if not c.holds]
    if sched.s == 0:
        cyc = tuple(path)
        cover = PathCover(n, (), frozenset(), len(prev_real & target), cyc)
        return PackStepResult("cycle", cyc, cover, len(used), events, sched, len(checks), violations, used)
    cover = PathCover(n, tuple(split_at_fakes(path, fakes)), fakes, len(real_edges(path, fakes) & target))
    return PackStepResult("exhausted", None, cover, len(used), events, sched, len(checks), violations, used)
