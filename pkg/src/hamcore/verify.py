"""Expansion-property checkers, parameter inequalities and certificate validation.

Exact checkers enumerate vertex subsets with bitmasks (small n only).
Heuristic checkers are one-sided: any witness they return is replayed on
the graph before it is reported, so a violation is always real, while a pass
is only evidence.
"""

from __future__ import annotations

import functools
import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from hamcore.graph_core import Graph, norm_edge
from hamcore.matching import count_disjoint_cycles_lb, loglog
from hamcore.random_models import f_k, solve_lambda

EXACT_DENSITY_LIMIT = 24
EXACT_EXPANSION_LIMIT = 20


# ---------------------------------------------------------------- parameters


def density_inequality(beta: float, gamma: float, k: int, c: float, lam: float) -> float:
    """Left side of the first hypothesis; must be < 1/2."""
    del beta
    return 9 * math.exp(1 + lam) * lam**2 / (c * f_k(k, lam)) * (gamma * lam / c) ** 0.1


def incidence_inequality(beta: float, gamma: float, k: int, lam: float) -> tuple[float, float]:
    """(left, right) of [2(k+lam) + log2(beta*gamma) + 3] * beta < 2(1 - beta)."""
    return (2 * (k + lam) + math.log2(beta * gamma) + 3) * beta, 2 * (1 - beta)


@dataclass(frozen=True)
class ExpansionParams:
    beta: float
    gamma: float
    k: int
    c: float
    lam: float

    def __post_init__(self):
        if not (0 < self.beta < 0.1 and 0 < self.gamma < 0.1):
            raise ValueError("beta and gamma must lie in (0, 0.1)")
        lhs = density_inequality(self.beta, self.gamma, self.k, self.c, self.lam)
        if not lhs < 0.5:
            raise ValueError(f"density hypothesis fails: {lhs:.4g} >= 1/2")
        left, right = incidence_inequality(self.beta, self.gamma, self.k, self.lam)
        if not left < right:
            raise ValueError(f"incidence hypothesis fails: {left:.4g} >= {right:.4g}")

    @classmethod
    def for_model(cls, k: int, c: float, beta: float | None = None, gamma: float | None = None) -> ExpansionParams:
        lam = solve_lambda(k, 2 * c)
        if beta is None or gamma is None:
            b0, g0 = default_beta_gamma(k, c)
            beta = b0 if beta is None else beta
            gamma = g0 if gamma is None else gamma
        return cls(beta, gamma, k, c, lam)

    def as_dict(self) -> dict:
        return {"beta": self.beta, "gamma": self.gamma, "k": self.k, "c": self.c, "lambda": self.lam}


@functools.lru_cache(maxsize=None)
def default_beta_gamma(k: int, c: float) -> tuple[float, float]:
    """Half of the largest gamma allowed by the density hypothesis, then the largest beta on a grid."""
    lam = solve_lambda(k, 2 * c)
    base = c * f_k(k, lam) / (18 * math.exp(1 + lam) * lam**2)
    # (gamma*lam/c)^0.1 < base  <=>  gamma < (c/lam) * base^10
    gamma = min(0.099, 0.5 * (c / lam) * base**10)
    if gamma <= 0:
        raise ValueError(f"no admissible gamma for k={k}, c={c}")
    for beta in np.linspace(0.099, 1e-4, 990):
        left, right = incidence_inequality(float(beta), gamma, k, lam)
        if left < right:
            return float(beta), float(gamma)
    raise ValueError(f"no admissible beta for k={k}, c={c}")


# ---------------------------------------------------------------- verdicts


@dataclass
class ViolationWitness:
    property_id: str
    vertex_set: tuple[int, ...]
    measured: float
    threshold: float
    detail: str = ""

    def replay(self, g: Graph) -> float:
        s = set(self.vertex_set)
        if self.property_id == "density":
            return float(edges_within(g, s))
        if self.property_id == "incidence":
            return float(incidence(g, s))
        if self.property_id == "neighborhood_expansion":
            return float(len(neighborhood(g, s)))
        raise ValueError(f"no replay for {self.property_id}")

    def as_dict(self) -> dict:
        out = {
            "property": self.property_id, "vertex_set": list(self.vertex_set),
            "measured": self.measured, "threshold": self.threshold,
        }
        if self.detail:
            out["detail"] = self.detail
        return out


@dataclass
class Verdict:
    property: str
    mode: str
    status: str  # "pass", "violation" or "inconclusive"
    witness: ViolationWitness | None = None
    params: dict = field(default_factory=dict)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    @property
    def violated(self) -> bool:
        return self.status == "violation"

    def to_json(self) -> dict:
        out = {"property": self.property, "mode": self.mode, "pass": self.passed, "params": self.params}
        if self.status == "inconclusive":
            out["inconclusive"] = True
        if self.witness is not None:
            out["witness"] = self.witness.as_dict()
        if self.notes:
            out["notes"] = self.notes
        return out


# ---------------------------------------------------------------- set helpers


def edges_within(g: Graph, s: set) -> int:
    return sum(1 for v in s for w in g.adj[v] if w in s) // 2


def incidence(g: Graph, s: set) -> int:
    return sum(g.degree[v] for v in s) - edges_within(g, s)


def neighborhood(g: Graph, s: set) -> set:
    return {w for v in s for w in g.adj[v]} - s


def _masks(g: Graph) -> list[int]:
    return [sum(1 << w for w in g.adj[v]) for v in range(g.n)]


def _subset_tables(g: Graph) -> tuple[np.ndarray, np.ndarray]:
    """Edge count spanned by and size of every vertex subset, indexed by bitmask."""
    n = g.n
    adj = _masks(g)
    edges = np.zeros(1 << n, dtype=np.int16)
    sizes = np.zeros(1 << n, dtype=np.int8)
    for i in range(n):
        lo = 1 << i
        idx = np.arange(lo, dtype=np.int64)
        edges[lo: 2 * lo] = edges[:lo] + np.bitwise_count(idx & adj[i]).astype(np.int16)
        sizes[lo: 2 * lo] = sizes[:lo] + 1
    return edges, sizes


def _mask_to_set(mask: int) -> tuple[int, ...]:
    return tuple(i for i in range(mask.bit_length()) if mask >> i & 1)


# ---------------------------------------------------------------- density


def density_threshold(size: int) -> float:
    return 1.1 * size + 1


def max_density_excess_exact(g: Graph, smax: int) -> tuple[int, int] | None:
    """Smallest violating set (by size, then bitmask) spanning >= 1.1|S|+1 edges, or None."""
    if g.n > EXACT_DENSITY_LIMIT:
        raise ValueError(f"exact density check limited to n <= {EXACT_DENSITY_LIMIT}")
    edges, sizes = _subset_tables(g)
    bad = (sizes <= smax) & (sizes >= 1) & (edges >= 1.1 * sizes.astype(np.float64) + 1)
    hits = np.flatnonzero(bad)
    if not hits.size:
        return None
    best = min(hits.tolist(), key=lambda m: (int(sizes[m]), m))
    return best, int(edges[best])


def _grow_dense(g: Graph, seed: Sequence[int], smax: int):
    """Greedy densest growth from a seed, yielding (set, edges) at each size."""
    s = set(seed)
    inside = edges_within(g, s)
    gain: dict[int, int] = {}
    for v in s:
        for w in g.adj[v]:
            if w not in s:
                gain[w] = gain.get(w, 0) + 1
    yield frozenset(s), inside
    while len(s) < smax and gain:
        x = max(gain, key=lambda w: (gain[w], -w))
        inside += gain.pop(x)
        s.add(x)
        for w in g.adj[x]:
            if w not in s:
                gain[w] = gain.get(w, 0) + 1
        yield frozenset(s), inside


def _two_swap(g: Graph, s: set, passes: int = 2) -> set:
    s = set(s)
    for _ in range(passes):
        improved = False
        cur = edges_within(g, s)
        outside = neighborhood(g, s)
        for v in sorted(s):
            for w in sorted(outside):
                t = (s - {v}) | {w}
                e = edges_within(g, t)
                if e > cur:
                    s, cur, improved = t, e, True
                    break
            if improved:
                break
        if not improved:
            break
    return s


def check_density(g: Graph, gamma: float, mode: str = "exact", max_seeds: int = 500, grow_cap: int = 200) -> Verdict:
    """Every S with |S| <= gamma*n spans fewer than 1.1|S| + 1 edges."""
    smax = math.floor(gamma * g.n)
    params = {"gamma": gamma, "max_size": smax}
    if mode == "exact":
        found = max_density_excess_exact(g, smax)
        if found is None:
            return Verdict("density", mode, "pass", params=params)
        mask, e = found
        s = _mask_to_set(mask)
        return Verdict("density", mode, "violation", ViolationWitness("density", s, e, density_threshold(len(s))), params)
    if mode != "sampled":
        raise ValueError(f"unknown mode {mode!r}")
    seeds = g.edge_list()
    if len(seeds) > max_seeds:
        step = len(seeds) / max_seeds
        seeds = [seeds[int(i * step)] for i in range(max_seeds)]
    best = None
    limit = min(smax, grow_cap)
    for seed in seeds:
        if limit < 2:
            break
        for s, e in _grow_dense(g, seed, limit):
            if e >= density_threshold(len(s)):
                cand = (len(s), tuple(sorted(s)))
                if best is None or cand < best:
                    best = cand
                break
            if len(s) == limit and best is None:
                t = _two_swap(g, set(s))
                if edges_within(g, t) >= density_threshold(len(t)):
                    best = (len(t), tuple(sorted(t)))
    notes = ["sampled pass is evidence, not proof"]
    if best is None:
        return Verdict("density", mode, "pass", params=params, notes=notes)
    s = best[1]
    w = ViolationWitness("density", s, edges_within(g, set(s)), density_threshold(len(s)))
    if w.replay(g) < w.threshold:  # a heuristic witness must replay
        return Verdict("density", mode, "pass", params=params, notes=notes)
    return Verdict("density", mode, "violation", w, params, notes)


# ---------------------------------------------------------------- incidence


def incidence_upper_bound(g: Graph, size: int) -> int:
    """Sum of the top ``size`` degrees; dominates the incidence of every S of that size."""
    return sum(sorted(g.degree, reverse=True)[:size])


def max_incidence_exact(g: Graph, size: int) -> tuple[int, tuple[int, ...]]:
    best = (-1, ())
    for s in itertools.combinations(range(g.n), size):
        val = incidence(g, set(s))
        if val > best[0]:
            best = (val, s)
    return best


def check_incidence(g: Graph, beta: float, gamma: float, mode: str = "auto") -> Verdict:
    """Every S with |S| <= beta*gamma*n is incident to fewer than 2(1-beta)*gamma*n edges.

    Incidence only grows when S grows, so the largest allowed size decides.
    """
    n = g.n
    size = math.floor(beta * gamma * n)
    thr = 2 * (1 - beta) * gamma * n
    params = {"beta": beta, "gamma": gamma, "max_size": size, "threshold": thr}
    if mode == "auto":
        mode = "exact" if n <= EXACT_DENSITY_LIMIT else "greedy"
    if size < 1:
        return Verdict("incidence", mode, "pass", params=params, notes=["no nonempty set is small enough"])
    if incidence_upper_bound(g, size) < thr:
        return Verdict("incidence", mode, "pass", params=params)
    if mode == "exact":
        val, s = max_incidence_exact(g, size)
        if val >= thr:
            # report the smallest violating set
            for sz in range(1, size + 1):
                v2, s2 = max_incidence_exact(g, sz)
                if v2 >= thr:
                    return Verdict("incidence", mode, "violation", ViolationWitness("incidence", s2, v2, thr), params)
        return Verdict("incidence", mode, "pass", params=params)
    if mode != "greedy":
        raise ValueError(f"unknown mode {mode!r}")
    order = sorted(range(n), key=lambda v: (-g.degree[v], v))
    for sz in range(1, size + 1):
        s = set(order[:sz])
        val = incidence(g, s)
        if val >= thr:
            return Verdict("incidence", mode, "violation", ViolationWitness("incidence", tuple(sorted(s)), val, thr), params)
    return Verdict("incidence", mode, "inconclusive", params=params, notes=["top-degree bound exceeded without a witness"])


# ---------------------------------------------------------------- neighbourhood expansion


def expansion_size_range(n: int, k: int) -> tuple[int, int]:
    """Default size window n/log^2 n <= |S| <= n/(100k); empty at desk scale."""
    if n < 3:
        return 1, 0
    return math.ceil(n / math.log(n) ** 2), math.floor(n / (100 * k))


def _closure_connected(g: Graph, s: set) -> bool:
    closed = s | neighborhood(g, s)
    start = next(iter(closed))
    seen = {start}
    stack = [start]
    while stack:
        v = stack.pop()
        for w in g.adj[v]:
            if w in closed and w not in seen:
                seen.add(w)
                stack.append(w)
    return len(seen) == len(closed)


def _expansion_exact(g: Graph, k: int, lo: int, hi: int) -> ViolationWitness | None:
    n = g.n
    if n > EXACT_EXPANSION_LIMIT:
        raise ValueError(f"exact expansion check limited to n <= {EXACT_EXPANSION_LIMIT}")
    closed = [m | (1 << v) for v, m in enumerate(_masks(g))]
    cl = np.zeros(1 << n, dtype=np.int64)
    for i in range(n):
        b = 1 << i
        cl[b: 2 * b] = cl[:b] | closed[i]
    masks = np.arange(1 << n, dtype=np.int64)
    sizes = np.bitwise_count(masks)
    nbr = np.bitwise_count(cl & ~masks)
    cand = np.flatnonzero((sizes >= lo) & (sizes <= hi) & (nbr < k * sizes))
    for m in sorted(cand.tolist(), key=lambda x: (int(sizes[x]), x)):
        s = set(_mask_to_set(m))
        if _closure_connected(g, s):
            return ViolationWitness("neighborhood_expansion", tuple(sorted(s)), int(nbr[m]), k * len(s))
    return None


def _expansion_heuristic(g: Graph, k: int, lo: int, hi: int, max_seeds: int) -> ViolationWitness | None:
    n = g.n
    seeds = range(n) if n <= max_seeds else [int(i * n / max_seeds) for i in range(max_seeds)]
    for v in seeds:
        # breadth-first ball prefixes are connected, so their closures are too
        order = [v]
        seen = {v}
        for x in order:
            if len(order) >= hi:
                break
            for w in sorted(g.adj[x]):
                if w not in seen:
                    seen.add(w)
                    order.append(w)
        for size in range(max(lo, 1), min(hi, len(order)) + 1):
            s = set(order[:size])
            nb = len(neighborhood(g, s))
            if nb < k * size:
                return ViolationWitness("neighborhood_expansion", tuple(sorted(s)), nb, k * size)
        # greedy: add the boundary vertex that adds the fewest new neighbours
        s = {v}
        nb = set(g.adj[v])
        while len(s) < hi and nb:
            x = min(nb, key=lambda w: (len(set(g.adj[w]) - s - nb), w))
            s.add(x)
            nb = (nb | set(g.adj[x])) - s
            if lo <= len(s) and len(nb) < k * len(s):
                return ViolationWitness("neighborhood_expansion", tuple(sorted(s)), len(nb), k * len(s))
    return None


def check_neighborhood_expansion(
    g: Graph, k: int, lo: int | None = None, hi: int | None = None, mode: str = "auto", max_seeds: int = 200,
) -> Verdict:
    """No S in the size window has S + N(S) connected and |N(S)| < k|S|."""
    d_lo, d_hi = expansion_size_range(g.n, k)
    lo = d_lo if lo is None else lo
    hi = d_hi if hi is None else hi
    params = {"k": k, "min_size": lo, "max_size": hi}
    if mode == "auto":
        mode = "exact" if g.n <= EXACT_EXPANSION_LIMIT else "heuristic"
    notes = []
    if hi < max(lo, 1):
        notes.append("size window is empty")
        return Verdict("neighborhood_expansion", mode, "pass", params=params, notes=notes)
    if mode == "exact":
        w = _expansion_exact(g, k, max(lo, 1), hi)
    elif mode == "heuristic":
        w = _expansion_heuristic(g, k, max(lo, 1), hi, max_seeds)
        notes.append("heuristic pass is evidence, not proof")
    else:
        raise ValueError(f"unknown mode {mode!r}")
    if w is None:
        return Verdict("neighborhood_expansion", mode, "pass", params=params, notes=notes)
    return Verdict("neighborhood_expansion", mode, "violation", w, params, notes)


# ---------------------------------------------------------------- core size and cycles


@dataclass
class CoreSizeRow:
    i: int
    core_size: int
    bound: float
    printed_bound: float

    @property
    def satisfied(self) -> bool:
        return self.core_size >= self.bound


def core_size_bound(i: int, n: int) -> float:
    return (1 - math.exp(-i / (40 * n))) * n


def check_core_size(checkpoints: Iterable[tuple[int, int]], n: int) -> list[CoreSizeRow]:
    """Compare measured core sizes at step offsets i with (1 - e^{-i/40n}) n.

    The bound with a positive exponent is negative and is reported alongside
    for comparison only.
    """
    def printed(i: int) -> float:
        x = i / (40 * n)
        return (1 - math.exp(x)) * n if x < 700 else -math.inf

    return [CoreSizeRow(i, size, core_size_bound(i, n), printed(i)) for i, size in checkpoints]


def disjoint_cycles_report(g: Graph) -> dict:
    return {
        "disjoint_cycles_lb": count_disjoint_cycles_lb(g),
        "reference": 2 * g.n / loglog(g.n) ** 6 if g.n > 15 else float("nan"),
    }


# ---------------------------------------------------------------- certificates


def validate_certificate(g: Graph, cert, standalone: bool = False) -> Verdict:
    """Check cycles are spanning simple cycles of g, everything is edge-disjoint,
    and the tail has the right shape for the parity of k.

    ``standalone`` waives the k-parity and cycle-count requirements.
    """
    n = g.n
    params = {"n": n, "k": cert.k, "standalone": standalone}

    def fail(pid, vs, measured, thr, detail):
        return Verdict("certificate", "exact", "violation", ViolationWitness(pid, tuple(vs), measured, thr, detail), params)

    if cert.n != n:
        return fail("vertex_count", (), cert.n, n, f"certificate has n={cert.n}, graph has n={n}")
    seen_edges: dict = {}
    for idx, cyc in enumerate(cert.cycles):
        if len(cyc) != n or len(set(cyc)) != n or (n and (min(cyc) < 0 or max(cyc) >= n)):
            return fail("hamiltonicity", cyc[:10], len(set(cyc)), n, f"cycle {idx} does not visit every vertex exactly once")
        if n < 3:
            return fail("hamiltonicity", cyc, n, 3, "no Hamilton cycle on fewer than 3 vertices")
        for j in range(n):
            e = norm_edge(cyc[j], cyc[(j + 1) % n])
            if e not in g.edges:
                return fail("containment", e, 0, 1, f"cycle {idx} uses non-edge {e[0]}-{e[1]}")
            if e in seen_edges:
                return fail("edge_disjointness", e, 2, 1, f"edge {e[0]}-{e[1]} in cycle {seen_edges[e]} and cycle {idx}")
            seen_edges[e] = idx
    deg = [0] * n
    for u, v in cert.tail_edges:
        e = norm_edge(u, v)
        if e not in g.edges:
            return fail("containment", e, 0, 1, f"tail uses non-edge {e[0]}-{e[1]}")
        if e in seen_edges:
            return fail("edge_disjointness", e, 2, 1, f"edge {e[0]}-{e[1]} in cycle {seen_edges[e]} and the tail")
        seen_edges[e] = "tail"
        deg[u] += 1
        deg[v] += 1
    expect_type = "two_factor" if cert.k % 2 else "matching"
    if not standalone and cert.tail_type != expect_type:
        return fail("tail_type", (), 0, 0, f"k={cert.k} needs a {expect_type} tail, got {cert.tail_type}")
    if cert.tail_type == "matching":
        bad = [v for v in range(n) if deg[v] > 1]
        if bad:
            return fail("tail_regularity", bad[:10], max(deg), 1, "tail matching has a vertex of degree >= 2")
    elif cert.tail_type == "two_factor":
        bad = [v for v in range(n) if deg[v] != 2]
        if bad:
            return fail("tail_regularity", bad[:10], deg[bad[0]], 2, "tail is not a spanning 2-regular subgraph")
    else:
        return fail("tail_type", (), 0, 0, f"unknown tail type {cert.tail_type!r}")
    want = (cert.k - 3) // 2 if cert.k % 2 else (cert.k - 2) // 2
    if not standalone and len(cert.cycles) != want:
        return fail("cycle_count", (), len(cert.cycles), want, f"expected {want} Hamilton cycles")
    v = Verdict("certificate", "exact", "pass", params=params)
    v.params["tail_size"] = len(cert.tail_edges)
    v.params["tail_vs_half_n"] = len(cert.tail_edges) / (n / 2) if n else 0.0
    return v
