"""Packing edge-disjoint Hamilton cycles plus a matching or 2-factor tail.

Pipeline: hold out a random reservoir of excess edges, peel k-1 edge-disjoint
matchings from a (k-1)-matching of what is left, then turn consecutive pairs
of matchings into Hamilton cycles with the rotation engine, feeding each
cycle its own slice of the reservoir.  The last layer(s) become the tail.
"""

from __future__ import annotations

import logging
import math
import warnings
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from hamcore.graph_core import Edge, Graph, RandomGraphProcess, find_tau_k, k_core, norm_edge
from hamcore.matching import (
    Matching, PeelAudit, PeelConfig, TwoMatching, max_b_matching, max_two_matching, peel_matchings,
)
from hamcore.posa import ClosureSchedule, EngineConfig, consume_reservoir, vdpc_from_two_matching

log = logging.getLogger(__name__)


class PreconditionError(ValueError):
    """Input graph or parameters do not meet the packer's hypotheses."""


class DecomposeFailure(RuntimeError):
    def __init__(self, sizes: list[int], threshold: float):
        super().__init__(f"layer sizes {sizes} below {threshold:.1f}")
        self.sizes = sizes
        self.threshold = threshold


@dataclass
class PackerConfig:
    k: int
    c: float
    n: int = 0
    seed: int = 0
    reservoir_fraction: float = 0.5
    reservoir_cap: float = 0.2  # fraction of m
    beta: float = 0.05
    gamma: float = 0.05
    epsilon: float = 0.0
    depth_cap: int = 60
    trial_budget: int = 3
    min_layer_fraction: float = 0.4
    check_hypotheses: bool = True
    engine: EngineConfig = field(default_factory=EngineConfig)

    def __post_init__(self):
        if self.k < 4:
            raise PreconditionError(f"k={self.k} must be at least 4")
        if not (0 < self.beta < 0.1 and 0 < self.gamma < 0.1):
            raise PreconditionError("beta and gamma must lie in (0, 0.1)")
        if self.check_hypotheses and not self.c > self.k / 2:
            raise PreconditionError(f"c={self.c} must exceed k/2={self.k / 2}")
        if self.check_hypotheses and self.c <= self.k:
            warnings.warn("c <= k: outside the regime where layer sizes are guaranteed", RuntimeWarning, stacklevel=3)
        if self.trial_budget < 1:
            raise PreconditionError("trial_budget must be positive")
        self.engine.depth_cap = self.depth_cap
        self.engine.epsilon = self.epsilon

    @property
    def n_cycles(self) -> int:
        return (self.k - 3) // 2 if self.k % 2 else (self.k - 2) // 2


@dataclass
class Decomposition:
    work_graph: Graph
    reservoir: list[Edge]
    excluded: frozenset
    layers: list[Matching]
    excluded_vertices: frozenset = frozenset()
    peel_audit: PeelAudit | None = None


def reservoir_target(n: int, m: int, cfg: PackerConfig) -> int:
    want = cfg.reservoir_fraction * (2 * cfg.c - cfg.k) * n / 4
    return max(0, int(min(want, cfg.reservoir_cap * m)))


def decompose(g: Graph, cfg: PackerConfig, rng: np.random.Generator) -> Decomposition:
    """Split g into a reservoir, the work graph and k-1 peeled matchings.

    Raises DecomposeFailure when fewer than k-1 layers reach the minimum size.
    """
    k, n = cfg.k, g.n
    if g.min_degree() < k:
        raise PreconditionError(f"minimum degree {g.min_degree()} < k={k}")
    target = reservoir_target(n, g.m, cfg)
    deg = list(g.degree)
    edges = g.edge_list()
    reservoir: list[Edge] = []
    hit_k: set = set()
    if target:
        for idx in rng.permutation(len(edges)).tolist():
            u, v = edges[idx]
            if deg[u] > k and deg[v] > k:
                reservoir.append((u, v))
                deg[u] -= 1
                deg[v] -= 1
                if deg[u] == k:
                    hit_k.add(u)
                if deg[v] == k:
                    hit_k.add(v)
                if len(reservoir) >= target:
                    break
    work = g.remove_edges(reservoir)
    excluded = frozenset(e for e in work.edges if e[0] in hit_k or e[1] in hit_k)
    h_edges = max_b_matching(work, k - 1, exact=False)
    h = Graph._trusted(n, _adjacency(n, h_edges))
    layers, audit = peel_matchings(h, k, PeelConfig(ell=k - 1))
    threshold = cfg.min_layer_fraction * n
    if len(layers) < k - 1 or any(m.size < threshold for m in layers):
        raise DecomposeFailure([m.size for m in layers], threshold)
    return Decomposition(work, reservoir, excluded, layers, frozenset(hit_k), audit)


def _adjacency(n: int, edges) -> list[set]:
    adj: list[set] = [set() for _ in range(n)]
    for u, v in edges:
        adj[u].add(v)
        adj[v].add(u)
    return adj


def canonical_cycle(cycle: Sequence[int]) -> tuple[int, ...]:
    """Start at the minimum vertex, head toward its smaller neighbour."""
    c = list(cycle)
    i = c.index(min(c))
    c = c[i:] + c[:i]
    if len(c) > 2 and c[-1] < c[1]:
        c = [c[0]] + c[:0:-1]
    return tuple(c)


def cycle_edges(cycle: Sequence[int]) -> list[Edge]:
    return [norm_edge(cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle))]


@dataclass
class PackingCertificate:
    n: int
    k: int
    cycles: list[tuple[int, ...]]
    tail_type: str  # "matching" or "two_factor"
    tail_edges: list[Edge]
    audit: dict = field(default_factory=dict)
    status: str = "complete"  # complete, partial or failed

    def __post_init__(self):
        self.cycles = [canonical_cycle(c) for c in self.cycles]
        self.tail_edges = sorted(norm_edge(u, v) for u, v in self.tail_edges)

    @property
    def complete(self) -> bool:
        return self.status == "complete"

    @property
    def tail_size(self) -> int:
        return len(self.tail_edges)

    def to_json(self) -> dict:
        return {
            "n": self.n, "k": self.k, "status": self.status,
            "cycles": [list(c) for c in self.cycles],
            "tail_type": self.tail_type,
            "tail_edges": [list(e) for e in self.tail_edges],
            "audit": self.audit,
        }

    @classmethod
    def from_json(cls, data: dict) -> PackingCertificate:
        return cls(
            int(data["n"]), int(data["k"]), [tuple(c) for c in data["cycles"]], data["tail_type"],
            [tuple(e) for e in data["tail_edges"]], dict(data.get("audit", {})), data.get("status", "complete"),
        )


def _slices(reservoir: list[Edge], parts: int, rng: np.random.Generator) -> list[list[Edge]]:
    order = rng.permutation(len(reservoir)).tolist()
    shuffled = [reservoir[i] for i in order]
    bounds = np.linspace(0, len(shuffled), parts + 1).round().astype(int).tolist()
    return [shuffled[bounds[i]: bounds[i + 1]] for i in range(parts)]


def pack(g: Graph, cfg: PackerConfig, rng: np.random.Generator) -> PackingCertificate:
    """Hamilton cycles plus tail for a graph of minimum degree >= k."""
    k, n = cfg.k, g.n
    tail_type = "two_factor" if k % 2 else "matching"
    dec = None
    failures = []
    for _ in range(cfg.trial_budget):
        try:
            dec = decompose(g, cfg, rng)
            break
        except DecomposeFailure as exc:
            failures.append(exc.sizes)
    if dec is None:
        return PackingCertificate(n, k, [], tail_type, [], {"decompose_failures": failures}, "failed")
    slices = _slices(dec.reservoir, k - 1, rng)
    layers = [set(m.edges) for m in dec.layers]
    used: set = set()
    cycles = []
    per_cycle = []
    status = "complete"
    for i in range(cfg.n_cycles):
        target = (layers[2 * i] | layers[2 * i + 1]) - used
        tm = TwoMatching(n, frozenset(target))
        pc = vdpc_from_two_matching(tm)
        host = [set(a) for a in dec.work_graph.adj]
        for u, v in used:
            host[u].discard(v)
            host[v].discard(u)
        sched = ClosureSchedule.start(n, pc.size, cfg.epsilon)
        res = consume_reservoir(host, pc, target, slices[i], sched, cfg.engine)
        per_cycle.append({
            "initial_cover": pc.size,
            "target_size": len(target),
            "reservoir_slice": len(slices[i]),
            "reservoir_used": res.reservoir_used,
            "m_intersection": res.cover.m_intersection,
            "r_t": res.schedule.r,
            "events": len(res.events),
            "max_depth": max((e.depth_used for e in res.events), default=0),
            "growth_checks": res.growth_checks,
            "growth_violations": len(res.growth_violations),
            "final_cover": res.cover.size,
        })
        if not res.success:
            status = "partial"
            break
        cycles.append(res.cycle)
        used.update(cycle_edges(res.cycle))
    tail: list[Edge] = []
    tail_info: dict = {}
    if status == "complete":
        if k % 2 == 0:
            tail = sorted(layers[k - 2] - used)
            tail_info = {"layer_size": len(layers[k - 2]), "lost_to_cycles": len(layers[k - 2] & used)}
        else:
            last = dec.work_graph.remove_edges(used & dec.work_graph.edges).add_edges(
                e for e in slices[k - 2] if e not in used
            )
            start = (layers[k - 3] | layers[k - 2]) - used
            tm = max_two_matching(last, start)
            tail = sorted(tm.edges)
            tail_info = {"start_size": len(start), "deficient": len(tm.deficient())}
            if not tm.is_two_factor():
                status = "partial"
    audit = {
        "reservoir_size": len(dec.reservoir),
        "excluded_edges": len(dec.excluded),
        "layer_sizes": [m.size for m in dec.layers],
        "decompose_failures": failures,
        "cycles": per_cycle,
        "tail": tail_info,
        "reservoir_used_total": sum(c["reservoir_used"] for c in per_cycle),
    }
    return PackingCertificate(n, k, cycles, tail_type, tail, audit, status)


# ---------------------------------------------------------------- process mode


@dataclass
class EmptyCore:
    t: int
    tau: int


@dataclass
class ProcessCheckpoint:
    t: int
    tau: int
    core_graph: Graph
    labels: tuple[int, ...]
    certificate: PackingCertificate

    @property
    def core_size(self) -> int:
        return self.core_graph.n


def resolve_checkpoints(tokens: Sequence[str | int | float], tau: int, n: int) -> list[int]:
    """Turn tokens like ``tau``, ``1.1tau``, ``2tau``, ``nlogn`` or plain integers into sorted times."""
    cap = n * (n - 1) // 2
    out = set()
    for tok in tokens:
        if isinstance(tok, (int, np.integer)):
            t = int(tok)
        else:
            tok = str(tok).strip().lower()
            if tok == "nlogn":
                t = math.ceil(n * math.log(n))
            elif tok.endswith("tau"):
                mult = float(tok[:-3] or 1)
                t = math.ceil(round(mult * tau, 9))
            else:
                t = int(tok)
        out.add(min(t, cap))
    return sorted(out)


DEFAULT_CHECKPOINTS = ("tau", "1.1tau", "2tau", "nlogn")


def pack_process(
    n: int,
    k: int,
    cfg: PackerConfig | None,
    rng: np.random.Generator,
    checkpoints: Sequence[str | int] = DEFAULT_CHECKPOINTS,
) -> list[ProcessCheckpoint | EmptyCore]:
    """Run the random graph process and pack the k-core at each checkpoint."""
    if k < 4:
        raise PreconditionError("k must be at least 4")
    proc = RandomGraphProcess(n, int(rng.integers(2**63)))
    tau = find_tau_k(proc, k)
    out: list[ProcessCheckpoint | EmptyCore] = []
    for t in resolve_checkpoints(checkpoints, tau, n):
        if t < tau:
            out.append(EmptyCore(t, tau))
            continue
        core = k_core(proc.graph_at(t), k)
        cg = core.core_graph
        inner = PackerConfig(
            k=k, c=cg.m / cg.n, n=cg.n,
            reservoir_fraction=cfg.reservoir_fraction if cfg else 0.5,
            depth_cap=cfg.depth_cap if cfg else 60,
            trial_budget=cfg.trial_budget if cfg else 3,
            check_hypotheses=False,
        )
        cert = pack(cg, inner, rng)
        cert.audit["t"] = t
        cert.audit["tau"] = tau
        out.append(ProcessCheckpoint(t, tau, cg, tuple(core.core_vertices), cert))
    return out
