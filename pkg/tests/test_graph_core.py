import collections
import itertools

import networkx as nx
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import complete, from_nx, graphs, random_graph
from hamcore.graph_core import (
    Graph,
    MultiGraph,
    RandomGraphProcess,
    core_is_nonempty,
    find_tau_k,
    k_core,
    process_stream,
    tau_k,
)


def fixed_point_core(g: Graph, k: int) -> set:
    """Delete every vertex of degree < k at once, repeat until nothing changes."""
    alive = set(range(g.n))
    while True:
        low = {v for v in alive if len(g.adj[v] & alive) < k}
        if not low:
            return alive
        alive -= low


# ---------------------------------------------------------------- Graph


def test_graph_rejects_loops_parallel_and_range():
    with pytest.raises(ValueError):
        Graph(3, [(1, 1)])
    with pytest.raises(ValueError):
        Graph(3, [(0, 1), (1, 0)])
    with pytest.raises(ValueError):
        Graph(3, [(0, 3)])
    with pytest.raises(ValueError):
        Graph(-1)


@given(graphs(max_n=10))
def test_graph_adjacency_degree_consistency(g):
    for v in range(g.n):
        assert g.degree[v] == len(g.adj[v]) == sum(v in e for e in g.edges)
    for u, v in itertools.combinations(range(g.n), 2):
        assert ((u, v) in g.edges) == (v in g.adj[u]) == (u in g.adj[v])
    assert sum(g.degree) == 2 * g.m


@given(graphs(max_n=9), st.data())
def test_add_remove_roundtrip(g, data):
    if not g.m:
        return
    drop = data.draw(st.sets(st.sampled_from(g.edge_list())))
    h = g.remove_edges(drop)
    assert h.m == g.m - len(drop)
    assert h.add_edges(drop) == g


def test_induced_relabels():
    g = Graph(5, [(0, 2), (2, 4), (1, 3)])
    h, labels = g.induced([4, 2, 0])
    assert labels == [0, 2, 4]
    assert h == Graph(3, [(0, 1), (1, 2)])


def test_components():
    g = Graph(6, [(0, 1), (1, 2), (4, 5)])
    assert sorted(sorted(c) for c in g.connected_components()) == [[0, 1, 2], [3], [4, 5]]


def test_multigraph_degree_sum_counts_loops_twice():
    mg = MultiGraph(3, ((0, 0), (0, 1), (0, 1), (1, 2)))
    assert sum(mg.degrees()) == 2 * mg.m
    assert mg.degrees() == [4, 3, 1]
    assert not mg.is_simple()
    assert MultiGraph(3, ((0, 1), (1, 2))).is_simple()


# ---------------------------------------------------------------- k_core


def test_core_triangle_plus_pendant():
    g = Graph(4, [(0, 1), (1, 2), (0, 2), (2, 3)])
    core = k_core(g, 2)
    assert core.core_vertices == (0, 1, 2)
    assert core.core_graph == Graph(3, [(0, 1), (1, 2), (0, 2)])
    assert core.peel_order == (3,)


def test_core_petersen_is_whole_graph():
    g = from_nx(nx.petersen_graph())
    core = k_core(g, 3)
    assert core.size == 10 and core.core_graph == g and core.peel_order == ()


def test_core_can_be_empty():
    core = k_core(Graph(5, [(0, 1), (1, 2), (2, 3), (3, 4)]), 2)
    assert core.empty and core.core_graph.n == 0
    assert sorted(core.peel_order) == list(range(5))


def test_core_rejects_k_zero():
    with pytest.raises(ValueError):
        k_core(Graph(2), 0)


def test_core_random_n10_m15_matches_fixed_point():
    rng = np.random.default_rng(3)
    pairs = list(itertools.combinations(range(10), 2))
    for _ in range(50):
        pick = rng.choice(len(pairs), 15, replace=False)
        g = Graph(10, [pairs[i] for i in pick])
        assert set(k_core(g, 3).core_vertices) == fixed_point_core(g, 3)


@settings(max_examples=300)
@given(graphs(max_n=12), st.integers(1, 5))
def test_core_matches_fixed_point_oracle(g, k):
    core = k_core(g, k)
    assert set(core.core_vertices) == fixed_point_core(g, k)
    assert core.empty or core.core_graph.min_degree() >= k
    # idempotence
    again = k_core(core.core_graph, k)
    assert again.core_graph == core.core_graph
    assert core_is_nonempty(g.n, g.edge_list(), k) == (not core.empty)


@settings(max_examples=200)
@given(graphs(max_n=12), st.integers(1, 4))
def test_peel_order_replays(g, k):
    core = k_core(g, k)
    alive = set(range(g.n))
    for v in core.peel_order:
        assert len(g.adj[v] & alive) < k  # each removal was legal when it happened
        alive.discard(v)
    assert alive == set(core.core_vertices)


# ---------------------------------------------------------------- process


def test_process_n3_ends_with_triangle():
    states = list(process_stream(3, seed=1))
    assert [s.t for s in states] == [0, 1, 2, 3]
    assert states[-1].graph == complete(3)
    assert states[-1].remaining == 0


def test_process_n2_single_step():
    states = list(process_stream(2, seed=9))
    assert len(states) == 2
    assert states[1].last_edge == (0, 1)


def test_process_determinism():
    a = RandomGraphProcess(100, seed=42)
    b = RandomGraphProcess(100, seed=42)
    a.advance_to(3000)
    b.advance_to(3000)
    assert a.edges == b.edges
    c = RandomGraphProcess(100, seed=43)
    c.advance_to(3000)
    assert c.edges != a.edges


def test_process_states_nest_and_count():
    prev = None
    for s in process_stream(7, seed=5):
        g = s.graph
        assert g.m == s.t
        if prev is not None:
            assert prev.edges <= g.edges
        prev = g
    assert prev == complete(7)


def test_process_edges_are_uniform_over_nonedges():
    # after fixing the first edge, the second is uniform over the other 5 pairs of K_4
    counts = collections.Counter()
    firsts = collections.Counter()
    for seed in range(6000):
        proc = RandomGraphProcess(4, seed)
        e1, e2 = proc.step(), proc.step()
        firsts[e1] += 1
        counts[(e1, e2)] += 1
    from scipy.stats import chisquare

    assert len(firsts) == 6
    assert chisquare(list(firsts.values())).pvalue > 1e-3
    assert len(counts) == 30
    assert chisquare(list(counts.values())).pvalue > 1e-3


def test_process_dense_phase_switch():
    proc = RandomGraphProcess(12, seed=0)
    proc.advance_to(proc.total)
    assert len(set(proc.edges)) == 66
    with pytest.raises(StopIteration):
        proc.step()


def test_core_monotone_along_process():
    proc = RandomGraphProcess(40, seed=11)
    prev: set = set()
    for t in range(0, 300, 3):
        core = set(k_core(proc.graph_at(t), 3).core_vertices)
        assert prev <= core
        prev = core


# ---------------------------------------------------------------- tau_k


@pytest.mark.parametrize("k", [3, 4, 5])
def test_tau_on_k_plus_one_vertices(k):
    t, core = tau_k(k + 1, k, seed=k)
    assert t == k * (k + 1) // 2
    assert core.size == k + 1


def test_tau_rejects_small_k():
    with pytest.raises(ValueError):
        tau_k(10, 2)


@pytest.mark.parametrize("seed", range(15))
def test_tau_matches_linear_scan(seed):
    n, k = 14, 3
    proc = RandomGraphProcess(n, seed)
    t = find_tau_k(proc, k)
    scan = next(s for s in range(proc.total + 1) if not k_core(Graph(n, proc.edges[:s]), k).empty)
    assert t == scan
    t2, core = tau_k(n, k, seed)
    assert t2 == t
    assert core == k_core(Graph(n, proc.edges[:t]), k)


def test_tau_incremental_equals_batch_larger():
    t, core = tau_k(600, 3, seed=7)
    proc = RandomGraphProcess(600, 7)
    g = proc.graph_at(t)
    assert k_core(g, 3) == core
    assert k_core(proc.graph_at(t - 1), 3).empty


def test_process_graph_reuse_after_random_graph(rng):
    g = random_graph(rng, 8, 0.5)
    assert k_core(g, 1).size == sum(1 for d in g.degree if d >= 1)
