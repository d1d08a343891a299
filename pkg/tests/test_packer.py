import itertools
import json
import warnings

import numpy as np
import pytest

from conftest import complete
from hamcore.graph_core import Graph, k_core, norm_edge
from hamcore.packer import (
    EmptyCore,
    PackerConfig,
    PackingCertificate,
    PreconditionError,
    ProcessCheckpoint,
    _slices,
    canonical_cycle,
    decompose,
    pack,
    pack_process,
    reservoir_target,
    resolve_checkpoints,
)
from hamcore.random_models import sample_gnm_min_degree
from hamcore.verify import validate_certificate


def independent_check(g: Graph, cert: PackingCertificate) -> None:
    """Certificate check written from scratch, without the package validator."""
    used = []
    for c in cert.cycles:
        assert sorted(c) == list(range(g.n))
        es = [norm_edge(c[i], c[(i + 1) % g.n]) for i in range(g.n)]
        assert set(es) <= g.edges and len(set(es)) == g.n
        used.extend(es)
    used.extend(cert.tail_edges)
    assert len(used) == len(set(used)), "edge reused"
    assert set(cert.tail_edges) <= g.edges
    deg = [0] * g.n
    for u, v in cert.tail_edges:
        deg[u] += 1
        deg[v] += 1
    if cert.k % 2:
        assert cert.tail_type == "two_factor" and all(d == 2 for d in deg)
        assert len(cert.cycles) == (cert.k - 3) // 2
    else:
        assert cert.tail_type == "matching" and max(deg, default=0) <= 1
        assert len(cert.cycles) == (cert.k - 2) // 2


# ---------------------------------------------------------------- config


def test_config_validation():
    with pytest.raises(PreconditionError):
        PackerConfig(k=3, c=3)
    with pytest.raises(PreconditionError):
        PackerConfig(k=4, c=2)
    with pytest.raises(PreconditionError):
        PackerConfig(k=4, c=3, beta=0.1)
    with pytest.raises(PreconditionError):
        PackerConfig(k=4, c=3, gamma=0.0)
    with pytest.raises(PreconditionError):
        PackerConfig(k=4, c=5, trial_budget=0)
    PackerConfig(k=4, c=2, check_hypotheses=False)


def test_config_warns_below_k():
    with pytest.warns(RuntimeWarning):
        PackerConfig(k=4, c=3)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        PackerConfig(k=4, c=4.5)


@pytest.mark.parametrize("k,cycles", [(4, 1), (5, 1), (6, 2), (7, 2), (8, 3), (9, 3)])
def test_cycle_count(k, cycles):
    assert PackerConfig(k=k, c=k, check_hypotheses=False).n_cycles == cycles


def test_reservoir_target_formula():
    cfg = PackerConfig(k=4, c=3, check_hypotheses=False)
    assert reservoir_target(1000, 3000, cfg) == int(0.5 * 2 * 1000 / 4)
    cfg = PackerConfig(k=4, c=30, check_hypotheses=False)
    assert reservoir_target(100, 3000, cfg) == int(0.2 * 3000)


# ---------------------------------------------------------------- decompose


def test_decompose_complete_graph_without_reservoir(rng):
    cfg = PackerConfig(k=5, c=2.5, reservoir_fraction=0.0, check_hypotheses=False)
    dec = decompose(complete(6), cfg, rng)
    assert dec.reservoir == [] and dec.work_graph == complete(6)
    assert [m.size for m in dec.layers] == [3, 3, 3, 3]
    union = set()
    for m in dec.layers:
        assert not (m.edges & union)
        union |= m.edges


def test_decompose_rejects_low_degree(rng):
    with pytest.raises(PreconditionError):
        decompose(Graph(5, [(0, 1)]), PackerConfig(k=4, c=3, check_hypotheses=False), rng)


@pytest.mark.filterwarnings("ignore::RuntimeWarning")
@pytest.mark.parametrize("seed", range(4))
def test_decompose_invariants(seed):
    rng = np.random.default_rng(seed)
    g = sample_gnm_min_degree(600, 2100, 4, rng)
    cfg = PackerConfig(k=4, c=3.5, n=600)
    dec = decompose(g, cfg, rng)
    res = {norm_edge(*e) for e in dec.reservoir}
    assert len(res) == len(dec.reservoir) == reservoir_target(600, 2100, cfg)
    assert not (res & dec.work_graph.edges) and res | dec.work_graph.edges == g.edges
    assert dec.work_graph.min_degree() >= 4
    seen = set()
    for m in dec.layers:
        assert m.edges <= dec.work_graph.edges and not (m.edges & seen) and not (m.edges & res)
        seen |= m.edges
    for u, v in dec.excluded:
        assert u in dec.excluded_vertices or v in dec.excluded_vertices


def test_decompose_layers_large_on_random_graphs():
    good = 0
    trials = 50
    for seed in range(trials):
        rng = np.random.default_rng(seed)
        g = sample_gnm_min_degree(2000, 6000, 4, rng)
        dec = decompose(g, PackerConfig(k=4, c=3, n=2000, check_hypotheses=False), rng)
        good += all(m.size >= 0.45 * 2000 for m in dec.layers)
    assert good >= 0.95 * trials


def test_slices_partition_reservoir(rng):
    res = [(i, i + 1) for i in range(103)]
    parts = _slices(res, 4, rng)
    assert len(parts) == 4
    flat = [e for p in parts for e in p]
    assert sorted(flat) == res
    assert max(map(len, parts)) - min(map(len, parts)) <= 1


# ---------------------------------------------------------------- pack


def test_pack_k6_graph_k5():
    cfg = PackerConfig(k=5, c=2.5, check_hypotheses=False)
    for seed in range(30):
        cert = pack(complete(6), cfg, np.random.default_rng(seed))
        assert cert.complete
        independent_check(complete(6), cert)
        assert len(cert.cycles) == 1 and cert.tail_size == 6


def test_pack_k5_graph_k4():
    cfg = PackerConfig(k=4, c=2, check_hypotheses=False)
    for seed in range(30):
        cert = pack(complete(5), cfg, np.random.default_rng(seed))
        assert cert.complete
        independent_check(complete(5), cert)
        assert len(cert.cycles) == 1 and cert.tail_size == 2


@pytest.mark.parametrize("n,k,c", [(500, 4, 3.0), (500, 5, 3.5), (400, 6, 4.0), (400, 7, 4.5)])
def test_pack_random_graphs(n, k, c):
    for seed in range(3):
        rng = np.random.default_rng(seed)
        g = sample_gnm_min_degree(n, round(c * n), k, rng)
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            cfg = PackerConfig(k=k, c=c, n=n)
        cert = pack(g, cfg, rng)
        assert cert.complete, cert.audit
        independent_check(g, cert)
        assert validate_certificate(g, cert).passed
        audit = cert.audit
        assert audit["reservoir_used_total"] <= audit["reservoir_size"]
        assert len(audit["cycles"]) == cfg.n_cycles
        assert all(c["growth_violations"] == 0 for c in audit["cycles"])


def test_pack_reports_decompose_failure(rng):
    g = sample_gnm_min_degree(200, 600, 4, rng)
    cfg = PackerConfig(k=4, c=3, min_layer_fraction=0.51, trial_budget=2, check_hypotheses=False)
    cert = pack(g, cfg, rng)
    assert cert.status == "failed" and cert.cycles == []
    assert len(cert.audit["decompose_failures"]) == 2


def test_pack_deterministic():
    g = sample_gnm_min_degree(300, 900, 4, np.random.default_rng(2))
    cfg = PackerConfig(k=4, c=3, check_hypotheses=False)
    a = pack(g, cfg, np.random.default_rng(5))
    b = pack(g, cfg, np.random.default_rng(5))
    assert a.to_json() == b.to_json()


# ---------------------------------------------------------------- certificates


def test_canonical_cycle():
    assert canonical_cycle((3, 1, 4, 0, 2)) == (0, 2, 3, 1, 4)
    assert canonical_cycle((0, 4, 3, 2, 1)) == (0, 1, 2, 3, 4)
    for rot in range(5):
        c = tuple(np.roll([2, 0, 3, 1, 4], rot).tolist())
        assert canonical_cycle(c) == canonical_cycle(c[::-1])


def test_certificate_json_roundtrip():
    cert = PackingCertificate(5, 4, [(2, 3, 4, 0, 1)], "matching", [(3, 1), (4, 2)], {"x": 1})
    assert cert.cycles == [(0, 1, 2, 3, 4)]
    assert cert.tail_edges == [(1, 3), (2, 4)]
    again = PackingCertificate.from_json(json.loads(json.dumps(cert.to_json())))
    assert again == cert


# ---------------------------------------------------------------- process mode


def test_resolve_checkpoints():
    assert resolve_checkpoints(["tau", "1.1tau", "2tau"], 100, 1000) == [100, 110, 200]
    assert resolve_checkpoints(["1.1tau"], 101, 1000) == [112]
    assert resolve_checkpoints(["nlogn", 5], 10, 20) == [5, 60]
    assert resolve_checkpoints(["3tau"], 100, 10) == [45]


def test_pack_process_checkpoints():
    out = pack_process(300, 4, None, np.random.default_rng(1), [1, "tau", "1.1tau", "2tau"])
    assert isinstance(out[0], EmptyCore) and out[0].t == 1
    cps = [c for c in out if isinstance(c, ProcessCheckpoint)]
    assert [c.t for c in cps] == sorted(c.t for c in cps) and cps[0].t == cps[0].tau
    for cp in cps:
        assert cp.core_graph.min_degree() >= 4
        assert cp.core_size == len(cp.labels)
        assert validate_certificate(cp.core_graph, cp.certificate, standalone=True).passed
    # the checkpoint core is the k-core of the process graph at that time
    assert cps[0].core_size >= 5


def test_pack_process_rejects_small_k():
    with pytest.raises(PreconditionError):
        pack_process(100, 3, None, np.random.default_rng(0))


def test_process_core_labels_match_relabelled_core():
    out = pack_process(200, 4, None, np.random.default_rng(4), ["tau"])
    cp = out[0]
    core = k_core(cp.core_graph, 4)
    assert core.size == cp.core_size
    assert list(cp.labels) == sorted(cp.labels)


def test_certificates_from_complete_graph_pack_every_edge():
    g = complete(9)
    cfg = PackerConfig(k=8, c=4, reservoir_fraction=0.0, check_hypotheses=False)
    cert = pack(g, cfg, np.random.default_rng(0))
    independent_check(g, cert)
    used = {e for c in cert.cycles for e in zip(c, c[1:] + c[:1])}
    assert len(used) + cert.tail_size <= g.m
    assert all(norm_edge(*e) in g.edges for e in itertools.chain(used, cert.tail_edges))
