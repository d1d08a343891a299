import itertools
import math

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings

from conftest import atlas, complete, cycle, from_nx, graphs, path_graph, random_graph
from hamcore.graph_core import Graph
from hamcore.packer import PackingCertificate
from hamcore.random_models import f_k, solve_lambda
from hamcore.verify import (
    ExpansionParams,
    ViolationWitness,
    check_core_size,
    check_density,
    check_incidence,
    check_neighborhood_expansion,
    core_size_bound,
    default_beta_gamma,
    density_inequality,
    disjoint_cycles_report,
    expansion_size_range,
    incidence_inequality,
    incidence_upper_bound,
    max_incidence_exact,
    validate_certificate,
)


def spanned(g, s):
    return sum(1 for u, v in g.edges if u in s and v in s)


def touching(g, s):
    return sum(1 for u, v in g.edges if u in s or v in s)


def density_oracle(g, gamma) -> bool:
    """True when some S with 1 <= |S| <= gamma*n spans >= 1.1|S| + 1 edges."""
    smax = math.floor(gamma * g.n)
    return any(
        spanned(g, set(s)) >= 1.1 * r + 1
        for r in range(1, smax + 1)
        for s in itertools.combinations(range(g.n), r)
    )


def incidence_oracle(g, beta, gamma) -> bool:
    smax = math.floor(beta * gamma * g.n)
    thr = 2 * (1 - beta) * gamma * g.n
    return any(
        touching(g, set(s)) >= thr for r in range(1, smax + 1) for s in itertools.combinations(range(g.n), r)
    )


def expansion_oracle(g, k, lo, hi) -> bool:
    h = nx.Graph(list(g.edges))
    h.add_nodes_from(range(g.n))
    for r in range(max(lo, 1), hi + 1):
        for s in itertools.combinations(range(g.n), r):
            s = set(s)
            nb = {w for v in s for w in g.adj[v]} - s
            if len(nb) < k * r and nx.is_connected(h.subgraph(s | nb)):
                return True
    return False


def assert_replays(g, verdict):
    if verdict.witness is not None:
        w = verdict.witness
        assert w.replay(g) == w.measured
        if w.property_id == "neighborhood_expansion":
            assert w.measured < w.threshold
        else:
            assert w.measured >= w.threshold


# ---------------------------------------------------------------- parameters


def test_expansion_params_defaults_satisfy_both_inequalities():
    for k, c in [(4, 3.0), (5, 3.5), (6, 4.0)]:
        beta, gamma = default_beta_gamma(k, c)
        p = ExpansionParams.for_model(k, c)
        lam = solve_lambda(k, 2 * c)
        assert p.lam == pytest.approx(lam)
        assert 9 * math.exp(1 + lam) * lam**2 / (c * f_k(k, lam)) * (gamma * lam / c) ** 0.1 < 0.5
        assert (2 * (k + lam) + math.log2(beta * gamma) + 3) * beta < 2 * (1 - beta)
        assert p.as_dict()["beta"] == beta


def test_expansion_params_fail_loudly():
    lam = solve_lambda(4, 6.0)
    with pytest.raises(ValueError):
        ExpansionParams(0.05, 0.05, 4, 3.0, lam)  # density side is far above 1/2
    with pytest.raises(ValueError):
        ExpansionParams(0.2, 0.05, 4, 3.0, lam)
    assert density_inequality(0.05, 0.05, 4, 3.0, lam) >= 0.5
    left, right = incidence_inequality(0.09, 1e-3, 4, lam)
    assert left == pytest.approx((2 * (4 + lam) + math.log2(0.09e-3) + 3) * 0.09)
    assert right == pytest.approx(2 * 0.91)


# ---------------------------------------------------------------- density


def test_density_tree_passes():
    tree = from_nx(nx.balanced_tree(2, 3))
    assert check_density(tree, 1.0, "exact").passed
    assert check_density(tree, 1.0, "sampled").passed


def test_density_k4_violation():
    v = check_density(complete(4), 1.0, "exact")
    assert v.violated and v.witness.vertex_set == (0, 1, 2, 3)
    assert v.witness.measured == 6 and v.witness.threshold == pytest.approx(5.4)
    assert check_density(complete(4), 1.0, "sampled").violated


def test_density_exact_limit_and_modes():
    with pytest.raises(ValueError):
        check_density(Graph(25), 0.5, "exact")
    with pytest.raises(ValueError):
        check_density(complete(4), 0.5, "bogus")
    assert "evidence" in check_density(cycle(30), 0.05, "sampled").notes[0]


@settings(max_examples=150, deadline=None)
@given(graphs(min_n=2, max_n=11))
def test_density_exact_matches_oracle_and_sampled_is_one_sided(g):
    for gamma in (0.3, 0.6, 1.0):
        exact = check_density(g, gamma, "exact")
        assert exact.violated == density_oracle(g, gamma)
        sampled = check_density(g, gamma, "sampled")
        assert not (sampled.violated and not exact.violated)
        assert_replays(g, exact)
        assert_replays(g, sampled)


def test_density_sampled_finds_planted_clique():
    rng = np.random.default_rng(3)
    base = random_graph(rng, 200, 0.01)
    g = base.add_edges(e for e in itertools.combinations(range(8), 2) if e not in base.edges)
    v = check_density(g, 0.1, "sampled")
    assert v.violated
    assert_replays(g, v)


# ---------------------------------------------------------------- incidence


def test_incidence_empty_graph_passes():
    assert check_incidence(Graph(40), 0.5, 0.5).passed


def test_incidence_star_violation():
    n = 30
    star = Graph(n, [(0, i) for i in range(1, n)])
    v = check_incidence(star, 0.5, 0.2, "exact")
    assert 0.5 * 0.2 * n >= 1 and 2 * 0.5 * 0.2 * n < n - 1
    assert v.violated and v.witness.vertex_set == (0,)
    assert check_incidence(star, 0.5, 0.2, "greedy").violated


@settings(max_examples=100, deadline=None)
@given(graphs(min_n=2, max_n=12))
def test_incidence_bound_dominates_exact(g):
    for size in range(1, g.n + 1):
        best, s = max_incidence_exact(g, size)
        assert incidence_upper_bound(g, size) >= best == touching(g, set(s))


@settings(max_examples=120, deadline=None)
@given(graphs(min_n=2, max_n=11))
def test_incidence_modes_against_oracle(g):
    for beta, gamma in [(0.5, 0.5), (0.9, 0.6), (0.3, 0.9)]:
        truth = incidence_oracle(g, beta, gamma)
        exact = check_incidence(g, beta, gamma, "exact")
        greedy = check_incidence(g, beta, gamma, "greedy")
        assert exact.violated == truth
        assert not (greedy.violated and not truth)
        assert not (greedy.passed and truth)
        assert_replays(g, exact)
        assert_replays(g, greedy)


# ---------------------------------------------------------------- neighbourhood expansion


def test_expansion_complete_graph_passes():
    assert check_neighborhood_expansion(complete(12), 3, 1, 3).passed


def test_expansion_disjoint_cliques_violate():
    g = Graph(12, [e for b in (0, 4, 8) for e in itertools.combinations(range(b, b + 4), 2)])
    v = check_neighborhood_expansion(g, 3, 4, 4, "exact")
    assert v.violated and v.witness.measured == 0
    h = check_neighborhood_expansion(g, 3, 4, 4, "heuristic")
    assert h.violated
    assert_replays(g, v)
    assert_replays(g, h)


def test_expansion_default_window_is_empty_at_small_n():
    lo, hi = expansion_size_range(5000, 4)
    assert hi < lo
    v = check_neighborhood_expansion(cycle(50), 3)
    assert v.passed and "empty" in v.notes[0]


def test_expansion_exact_limit():
    with pytest.raises(ValueError):
        check_neighborhood_expansion(Graph(21), 2, 1, 2, "exact")


def test_expansion_exact_and_heuristic_against_oracle():
    rng = np.random.default_rng(5)
    corpus = [g for g in atlas(6) if g.n >= 3]
    corpus += [random_graph(rng, int(rng.integers(7, 13)), rng.uniform(0.1, 0.5)) for _ in range(60)]
    for g in corpus:
        for k, lo, hi in [(1, 1, 2), (2, 1, 3), (2, 2, 4)]:
            truth = expansion_oracle(g, k, lo, hi)
            exact = check_neighborhood_expansion(g, k, lo, hi, "exact")
            heur = check_neighborhood_expansion(g, k, lo, hi, "heuristic")
            assert exact.violated == truth
            assert not (heur.violated and not truth)
            assert_replays(g, exact)
            assert_replays(g, heur)


# ---------------------------------------------------------------- core size, cycles


def test_core_size_rows():
    rows = check_core_size([(0, 0), (10**9, 990)], 1000)
    assert rows[0].bound == 0 and rows[0].satisfied
    assert rows[1].bound == pytest.approx(1000, rel=1e-6) and not rows[1].satisfied
    assert rows[1].printed_bound < 0
    assert core_size_bound(400, 10) == pytest.approx((1 - math.exp(-1)) * 10)


def test_disjoint_cycles_report():
    rep = disjoint_cycles_report(Graph(6, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)]))
    assert rep["disjoint_cycles_lb"] == 2


# ---------------------------------------------------------------- certificates


def test_certificate_cycle_standalone():
    g = cycle(7)
    cert = PackingCertificate(7, 4, [tuple(range(7))], "matching", [])
    assert validate_certificate(g, cert, standalone=True).passed
    v = validate_certificate(g, cert)
    assert v.passed  # k=4 asks for exactly one cycle and a matching tail


def test_certificate_repeated_edge_is_named():
    g = complete(5)
    cert = PackingCertificate(5, 6, [(0, 1, 2, 3, 4), (0, 2, 4, 1, 3)], "matching", [(0, 1)])
    v = validate_certificate(g, cert)
    assert v.violated and v.witness.property_id == "edge_disjointness"
    assert "0-1" in v.witness.detail


@pytest.mark.parametrize("cert,pid", [
    (PackingCertificate(6, 4, [(0, 1, 2, 3, 4, 5)], "matching", []), "vertex_count"),
    (PackingCertificate(5, 4, [(0, 1, 2, 3)], "matching", []), "hamiltonicity"),
    (PackingCertificate(5, 4, [(0, 2, 1, 3, 4)], "matching", []), "containment"),
    (PackingCertificate(5, 4, [(0, 1, 2, 3, 4)], "two_factor", []), "tail_type"),
    (PackingCertificate(5, 5, [], "two_factor", [(0, 1), (1, 2), (2, 3), (3, 4), (0, 4)]), "cycle_count"),
    (PackingCertificate(5, 4, [], "matching", [(0, 1), (1, 2)]), "tail_regularity"),
    (PackingCertificate(5, 4, [], "matching", [(0, 2)]), "containment"),
])
def test_certificate_violations(cert, pid):
    g = cycle(5)
    v = validate_certificate(g, cert)
    assert v.violated and v.witness.property_id == pid
    js = v.to_json()
    assert js["pass"] is False and js["witness"]["property"] == pid


def test_certificate_two_factor_tail_must_span():
    g = complete(6)
    bad = PackingCertificate(6, 5, [(0, 1, 2, 3, 4, 5)], "two_factor", [(0, 2), (2, 4), (0, 4)])
    v = validate_certificate(g, bad)
    assert v.violated and v.witness.property_id == "tail_regularity"


def test_witness_replay_unknown_property():
    with pytest.raises(ValueError):
        ViolationWitness("hamiltonicity", (0,), 0, 1).replay(path_graph(3))
