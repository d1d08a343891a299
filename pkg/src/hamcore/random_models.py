"""Truncated Poisson calibration and configuration-model sampling of G(n, m) with min degree >= k."""

from __future__ import annotations

import functools
import logging
import math
from dataclasses import dataclass

import numpy as np

from hamcore.graph_core import Graph, MultiGraph, norm_edge

log = logging.getLogger(__name__)


class SamplerError(RuntimeError):
    """A rejection sampler ran out of budget."""


def f_k(k: int, lam: float) -> float:
    """e^lam minus the first k terms of its series, i.e. sum_{i>=k} lam^i / i!.

    The tail is summed directly, so there is no cancellation even when lam is
    small next to k.
    """
    if lam <= 0:
        raise ValueError("lambda must be positive")
    if k < 0:
        raise ValueError("k must be non-negative")
    term = math.exp(k * math.log(lam) - math.lgamma(k + 1))
    terms = [term]
    running = term
    i = k
    # past the mode the terms shrink geometrically
    while not (i > lam and term <= 1e-18 * running):
        i += 1
        term *= lam / i
        terms.append(term)
        running += term
    return math.fsum(terms)


def truncated_mean(k: int, lam: float) -> float:
    """Mean of Poisson(lam) conditioned on being >= k."""
    if k == 0:
        return lam
    return lam * f_k(k - 1, lam) / f_k(k, lam)


@functools.lru_cache(maxsize=256)
def solve_lambda(k: int, mean_target: float, rtol: float = 1e-12) -> float:
    """The rate whose k-truncated Poisson has the given mean, by bisection."""
    if mean_target <= k:
        raise ValueError(f"mean_target={mean_target} must exceed k={k}")
    lo, hi = 0.0, float(mean_target)  # truncation only raises the mean, so mean(hi) >= target
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= 0.0:
            break
        if truncated_mean(k, mid) < mean_target:
            lo = mid
        else:
            hi = mid
        if hi - lo <= rtol * hi:
            break
    return 0.5 * (lo + hi)


@dataclass(frozen=True)
class TruncatedPoissonParams:
    k: int
    lam: float

    def __post_init__(self):
        if self.lam <= 0:
            raise ValueError("lambda must be positive")
        if self.k < 0:
            raise ValueError("k must be non-negative")

    @property
    def normaliser(self) -> float:
        return f_k(self.k, self.lam)

    @property
    def mean(self) -> float:
        return truncated_mean(self.k, self.lam)

    def pmf(self, t: int) -> float:
        if t < self.k:
            return 0.0
        return math.exp(t * math.log(self.lam) - math.lgamma(t + 1)) / self.normaliser

    def pair_ratio(self) -> float:
        """E[d(d-1)] / E[d], the configuration-model branching factor."""
        if self.k < 2:
            return self.lam
        return self.lam * f_k(self.k - 2, self.lam) / f_k(self.k - 1, self.lam)


@functools.lru_cache(maxsize=64)
def _truncated_cdf(params: TruncatedPoissonParams) -> tuple[np.ndarray, np.ndarray]:
    k, lam = params.k, params.lam
    support = [k]
    probs = [params.pmf(k)]
    while probs[-1] > 1e-18 or support[-1] < lam:
        support.append(support[-1] + 1)
        probs.append(probs[-1] * lam / support[-1])
    cdf = np.cumsum(probs)
    cdf /= cdf[-1]
    support_arr = np.asarray(support, dtype=np.int64)
    support_arr.flags.writeable = False  # cached and shared
    cdf.flags.writeable = False
    return support_arr, cdf


def sample_truncated_poisson(params: TruncatedPoissonParams, rng: np.random.Generator, size=None):
    """Draw from Poisson(lam) conditioned on >= k, by inversion of the truncated cdf."""
    support, cdf = _truncated_cdf(params)
    count = 1 if size is None else int(np.prod(size))
    idx = np.searchsorted(cdf, rng.random(count), side="right")
    out = support[np.minimum(idx, len(support) - 1)]
    if size is None:
        return int(out[0])
    return out.reshape(size)


@dataclass(frozen=True)
class DegreeSequence:
    degrees: tuple[int, ...]

    @property
    def total(self) -> int:
        return sum(self.degrees)

    @property
    def n(self) -> int:
        return len(self.degrees)


def sample_degree_sequence(
    n: int, m: int, k: int, rng: np.random.Generator, max_attempts: int = 10**6
) -> DegreeSequence:
    """n iid k-truncated Poisson degrees conditioned on summing to 2m (by rejection).

    When 2m == kn the conditioning forces every degree to equal k.
    """
    if n < 1:
        raise ValueError("n must be positive")
    if 2 * m < k * n:
        raise ValueError(f"2m={2 * m} < kn={k * n}: no degree sequence with min degree {k}")
    if 2 * m == k * n:
        return DegreeSequence((k,) * n)
    params = TruncatedPoissonParams(k, solve_lambda(k, 2 * m / n))
    attempts = 0
    # rows per batch ~ expected attempts, capped for memory
    var = max(params.mean * (1 + params.pair_ratio() - params.mean), 0.25)
    rows = max(1, min(int(math.sqrt(2 * math.pi * n * var)) + 1, max(1, 4_000_000 // n)))
    while attempts < max_attempts:
        batch = min(rows, max_attempts - attempts)
        draws = sample_truncated_poisson(params, rng, (batch, n))
        hits = np.flatnonzero(draws.sum(axis=1) == 2 * m)
        if hits.size:
            return DegreeSequence(tuple(int(x) for x in draws[hits[0]]))
        attempts += batch
    raise SamplerError(f"no degree sequence summing to {2 * m} after {max_attempts} attempts (n={n}, k={k})")


def pairing_to_multigraph(seq: DegreeSequence, rng: np.random.Generator) -> MultiGraph:
    """Uniform perfect pairing of the half-edges."""
    if seq.total % 2:
        raise ValueError("degree total must be even")
    points = np.repeat(np.arange(seq.n), seq.degrees)
    rng.shuffle(points)
    pairs = points.reshape(-1, 2).tolist()
    return MultiGraph(seq.n, tuple((a, b) for a, b in pairs))


def simple_probability_estimate(n: int, m: int, k: int) -> float:
    """Asymptotic P(pairing is simple) = exp(-nu/2 - nu^2/4)."""
    if 2 * m == k * n:
        nu = k - 1
    else:
        nu = TruncatedPoissonParams(k, solve_lambda(k, 2 * m / n)).pair_ratio()
    return math.exp(-nu / 2 - nu * nu / 4)


def direct_acceptance_estimate(n: int, m: int, k: int) -> float:
    """Rough P(min degree >= k) for a uniform m-edge graph, treating degrees as
    independent binomials."""
    if n < 2:
        return 0.0
    p = m / (n * (n - 1) / 2)
    if p >= 1.0:
        return 1.0
    lp, lq = math.log(p), math.log1p(-p)
    head = sum(
        math.exp(math.lgamma(n) - math.lgamma(d + 1) - math.lgamma(n - d) + d * lp + (n - 1 - d) * lq)
        for d in range(min(k, n))
    )
    if head >= 1.0:
        return 0.0
    return math.exp(n * math.log1p(-head))


def _repair_and_mix(mg: MultiGraph, rng: np.random.Generator, sweeps: float, budget: int) -> Graph:
    """Remove loops/multi-edges by degree-preserving switchings, then run
    double-edge-swap mixing for ``sweeps * m`` attempts."""
    edges = [norm_edge(u, v) for u, v in mg.edges]
    m = len(edges)
    count: dict = {}
    for e in edges:
        count[e] = count.get(e, 0) + 1
    defects = [i for i, e in enumerate(edges) if e[0] == e[1]]
    seen: set = set()
    for i, e in enumerate(edges):
        if e[0] != e[1]:
            if e in seen:
                defects.append(i)
            seen.add(e)

    def is_defect(e):
        return e[0] == e[1] or count[e] > 1

    tries = 0
    for i in defects:
        while is_defect(edges[i]):
            tries += 1
            if tries > budget:
                raise SamplerError("switching repair exceeded its budget")
            j = int(rng.integers(m))
            if j == i or is_defect(edges[j]):
                continue
            a, b = edges[i]
            c, d = edges[j] if rng.random() < 0.5 else edges[j][::-1]
            e1, e2 = norm_edge(a, c), norm_edge(b, d)
            if a == c or b == d or e1 == e2 or e1 in count or e2 in count:
                continue
            for old in (edges[i], edges[j]):
                count[old] -= 1
                if not count[old]:
                    del count[old]
            edges[i], edges[j] = e1, e2
            count[e1] = 1
            count[e2] = 1
    present = set(edges)
    steps = int(sweeps * m)
    if steps and m >= 2:
        picks = rng.integers(0, m, size=(steps, 2)).tolist()
        flips = (rng.random(steps) < 0.5).tolist()
        for (i, j), flip in zip(picks, flips):
            if i == j:
                continue
            a, b = edges[i]
            c, d = edges[j]
            if flip:
                c, d = d, c
            if a == c or a == d or b == c or b == d:
                continue
            e1, e2 = norm_edge(a, c), norm_edge(b, d)
            if e1 in present or e2 in present:
                continue
            present.discard(edges[i])
            present.discard(edges[j])
            present.add(e1)
            present.add(e2)
            edges[i], edges[j] = e1, e2
    return Graph(mg.n, edges)


def sample_gnm_min_degree(
    n: int,
    m: int,
    k: int,
    rng: np.random.Generator,
    method: str = "auto",
    max_pairings: int = 10**4,
    mix_sweeps: float = 2.0,
) -> Graph:
    """Random simple graph with n vertices, m edges and minimum degree >= k.

    ``method="rejection"`` repeats degree sequence + pairing until the pairing
    is simple, which is exactly uniform.  ``"switch"`` repairs the defects of
    one pairing with switchings and then mixes with double-edge swaps; it is
    approximate but usable when the simple-pairing probability is tiny.
    ``"direct"`` draws uniform m-subsets of pairs until the minimum degree is
    at least k, which is exact and cheap for dense inputs.  ``"auto"`` takes
    the first exact method whose budget should give a few hits, else switches.
    """
    if 2 * m < k * n:
        raise ValueError(f"2m={2 * m} < kn={k * n}")
    if m > n * (n - 1) // 2:
        raise ValueError(f"m={m} exceeds the number of vertex pairs")
    if method == "auto":
        if simple_probability_estimate(n, m, k) * max_pairings >= 20:
            method = "rejection"
        elif direct_acceptance_estimate(n, m, k) * max_pairings >= 20:
            method = "direct"
        else:
            method = "switch"
    if method == "direct":
        pairs = [(u, v) for u in range(n) for v in range(u + 1, n)]
        for _ in range(max_pairings):
            pick = rng.choice(len(pairs), size=m, replace=False)
            g = Graph(n, [pairs[i] for i in pick.tolist()])
            if g.min_degree() >= k:
                return g
        raise SamplerError(f"no min-degree-{k} edge set in {max_pairings} attempts (n={n}, m={m})")
    if method == "rejection":
        for _ in range(max_pairings):
            mg = pairing_to_multigraph(sample_degree_sequence(n, m, k, rng), rng)
            if mg.is_simple():
                return mg.to_graph()
        raise SamplerError(f"no simple pairing in {max_pairings} attempts (n={n}, m={m}, k={k})")
    if method == "switch":
        mg = pairing_to_multigraph(sample_degree_sequence(n, m, k, rng), rng)
        return _repair_and_mix(mg, rng, mix_sweeps, budget=200 * m + 1000)
    raise ValueError(f"unknown method {method!r}")
