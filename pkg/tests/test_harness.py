import numpy as np
import pytest

import rslab as rl
from rslab import ExtensionPattern

from conftest import bernoulli_structure, k4, single_edge


def test_fit_loglog_selftest():
    ns = [64, 128, 256, 512, 1024]
    for s in (-0.35, 0.0, 0.45, 2.0):
        slope, resid = rl.fit_loglog(ns, [n**s for n in ns])
        assert abs(slope - s) < 1e-9
        assert resid < 1e-9


def test_fit_loglog_skips_zero_rows():
    slope, _ = rl.fit_loglog([10, 20, 40], [10.0, 0.0, 40.0])
    assert slope is not None


def test_ext_stats_identity_pattern(sig55):
    edge = single_edge(sig55)
    pat = ExtensionPattern(edge, frozenset([0, 1]))
    rep = rl.ext_stats(pat, [32, 64], trials=3, seed=1)
    for row in rep.rows:
        assert row.mean == row.min == row.max == 1.0
        assert row.freq == 1.0
    assert rep.slope == 0.0


def test_ext_stats_rows_cover_grid(sig55):
    pat = ExtensionPattern(single_edge(sig55), frozenset([0]))
    grid = [32, 48, 64]
    rep = rl.ext_stats(pat, grid, trials=2, seed=4)
    assert [r.n for r in rep.rows] == grid
    assert all(r.trials == 2 for r in rep.rows)


def test_ext_stats_v2_slope(sig55):
    # two-step path over a point: relative dimension 2 - 2*alpha = 0.9
    path = rl.FiniteStructure(sig55, 3, [[[0, 1], [1, 2]]])
    pat = ExtensionPattern(path, frozenset([0]))
    assert abs(pat.delta_rel.value - 0.9) < 1e-12
    rep = rl.ext_stats(pat, [128, 256, 512], trials=5, seed=11)
    assert 0.75 <= rep.slope <= 1.05


def test_report_determinism(sig55):
    pat = ExtensionPattern(single_edge(sig55), frozenset([0]))
    a = rl.ext_stats(pat, [32, 64], trials=3, seed=7)
    b = rl.ext_stats(pat, [32, 64], trials=3, seed=7)
    assert a.to_json(timing=False) == b.to_json(timing=False)
    c = rl.ext_stats(pat, [32, 64], trials=3, seed=8)
    assert c.to_json(timing=False) != a.to_json(timing=False)


def test_parallel_matches_serial(sig55):
    pat = ExtensionPattern(single_edge(sig55), frozenset([0]))
    serial = rl.ext_stats(pat, [32, 64], trials=4, seed=3, threads=1)
    parallel = rl.ext_stats(pat, [32, 64], trials=4, seed=3, threads=2)
    assert serial.to_json(timing=False) == parallel.to_json(timing=False)
    B = k4(rl.binary_signature("0.7"))
    r1 = rl.rare_substructure(B, [32, 64], 30, seed=5, threads=1)
    r2 = rl.rare_substructure(B, [32, 64], 30, seed=5, threads=2)
    assert r1.to_json(timing=False) == r2.to_json(timing=False)


def test_csv_format(sig55):
    pat = ExtensionPattern(single_edge(sig55), frozenset([0]))
    rep = rl.ext_stats(pat, [32], trials=2, seed=2)
    lines = rep.to_csv().strip().splitlines()
    assert lines[0] == "n,trials,mean,min,max,stddev,freq,seconds"
    assert lines[1].startswith("32,2,")


def test_rare_rejects_nonnegative(sig55):
    with pytest.raises(ValueError):
        rl.rare_substructure(single_edge(sig55), [32], 5, seed=1)


def test_rare_gamma_zero_frequency_zero():
    sig = rl.binary_signature("0.7", gamma=0)
    B = k4(sig)
    rep = rl.rare_substructure(B, [32, 64], 20, seed=6)
    assert all(r.freq == 0.0 for r in rep.rows)


def test_rare_per_n_trials(sig55):
    B = k4(rl.binary_signature("0.7"))
    rep = rl.rare_substructure(B, [32, 64], [10, 20], seed=6)
    assert [r.trials for r in rep.rows] == [10, 20]


def test_detect_pattern_with_isolated_vertex():
    # K5 plus an isolated point: the extra vertex may land anywhere, so the
    # codegree reduction must not be applied
    sig = rl.binary_signature("0.7")
    from itertools import combinations as comb
    k5_iso = rl.FiniteStructure(sig, 6, [[list(e) for e in comb(range(5), 2)]])
    assert rl.delta(k5_iso).sign() == rl.NEGATIVE
    host_edges = [list(e) for e in comb(range(5), 2)]
    host = rl.FiniteStructure(sig, 80, [host_edges])  # K5 plus 75 bare vertices
    assert rl.has_weak_copy(k5_iso, host)
    small = rl.FiniteStructure(sig, 5, [host_edges])
    assert not rl.has_weak_copy(k5_iso, small)  # no room for the sixth vertex


def test_detect_python_fallback_agrees():
    # the pure-Python body of the numba kernel must match the compiled one
    from rslab.detect import _codegree_mask, _csr_adjacency
    if not hasattr(_codegree_mask, "py_func"):
        pytest.skip("numba not active")
    G = rl.sample(rl.SampleConfig(256, rl.binary_signature("0.7"), seed=70))
    edges = G.arrays[0]
    indptr, indices = _csr_adjacency(G.n, edges)
    eu = np.ascontiguousarray(edges[:, 0])
    ev = np.ascontiguousarray(edges[:, 1])
    fast = _codegree_mask(indptr, indices, eu, ev, 2)
    slow = _codegree_mask.py_func(indptr, indices, eu, ev, 2)
    assert np.array_equal(np.asarray(fast), np.asarray(slow))


def test_detect_matches_generic_search():
    rng = np.random.default_rng(40)
    sig = rl.binary_signature("0.7")
    B = k4(sig)
    hits = 0
    for t in range(60):
        G = bernoulli_structure(rng, sig, 72, 0.12)  # dense enough for occasional K4
        fast = rl.has_weak_copy(B, G)
        slow = any(True for _ in rl.enumerate_embeddings(B, G, mode=rl.HOM, base=frozenset()))
        assert fast == slow
        hits += fast
    assert 0 < hits < 60  # both outcomes exercised


def test_empty_closure_m1_trivial(sig55):
    rep = rl.empty_closure(sig55, 1, [32, 64], trials=5, seed=2)
    assert all(r.freq == 1.0 for r in rep.rows)


def test_empty_closure_agreement_dense():
    # alpha near 1 at m = 5 genuinely exercises both equivalent checks
    sig = rl.binary_signature("0.95")
    rep = rl.empty_closure(sig, 5, [24, 48], trials=40, seed=3)
    assert all(0.0 <= r.freq <= 1.0 for r in rep.rows)


def test_empty_closure_oracle_small():
    # direct dual-oracle check on small hosts: definition vs violator search
    rng = np.random.default_rng(44)
    sig = rl.binary_signature("0.95")
    m = 5
    violations = 0
    for _ in range(60):
        n = int(rng.integers(4, 13))
        G = bernoulli_structure(rng, sig, n, float(rng.uniform(0.2, 0.6)))
        via_cl = rl.closure(G, set(), m, method="exhaustive") == set()
        via_neg = not rl.has_negative_subset(G, m - 1, method="naive")
        assert via_cl == via_neg
        violations += not via_cl
    assert violations > 5


def test_empty_closure_m_guard(sig55):
    with pytest.raises(ValueError):
        rl.empty_closure(sig55, 6, [16], trials=1, seed=1)


def test_iso_base_subsample_reflects_nonedges(sig55):
    # a capped edgeless 2-point base may only land on non-adjacent pairs
    from rslab.harness import _iso_embeddings_capped
    from rslab.sampler import trial_rng
    G = rl.sample(rl.SampleConfig(512, sig55, seed=61))
    A = rl.FiniteStructure(sig55, 2, [[]])
    draws, capped = _iso_embeddings_capped(A, G, trial_rng(61, 0, 1), 50)
    assert capped and len(draws) == 50
    for u, v in draws:
        assert not G.has_edge(0, (u, v))
    # and a base with one vertex stays a plain injection sample
    pt = rl.FiniteStructure(sig55, 1, [[]])
    draws, capped = _iso_embeddings_capped(pt, G, trial_rng(61, 1, 1), 50)
    assert capped and len(draws) == 50


def test_zero_one_pair_base(sig55):
    # nonadjacent-pair base with a joint neighbor: exercises |A| = 2 end to end
    whole = rl.FiniteStructure(sig55, 3, [[[0, 2]]])  # new vertex 2 tied to 0 only
    pat = ExtensionPattern(whole, frozenset([0, 1]))
    rep = rl.zero_one(pat, 1, [48, 96], trials=5, seed=13)
    assert all(0.0 <= r.freq <= 1.0 for r in rep.rows)


def test_zero_one_identity_pattern(sig55):
    edge = single_edge(sig55)
    pat = ExtensionPattern(edge, frozenset([0, 1]))
    rep = rl.zero_one(pat, 2, [24, 48], trials=4, seed=5)
    assert all(r.freq == 1.0 for r in rep.rows)


def test_zero_one_no_room(sig55):
    pat = ExtensionPattern(single_edge(sig55), frozenset([0]))
    rep = rl.zero_one(pat, 2, [1], trials=3, seed=5)
    assert rep.rows[0].freq == 0.0


def test_zero_one_guards(sig55):
    pat = ExtensionPattern(single_edge(sig55), frozenset([0]))
    with pytest.raises(ValueError):
        rl.zero_one(pat, 3, [16], trials=1, seed=1)


def test_qe_identity_pairs(sig55):
    G = rl.sample(rl.SampleConfig(128, sig55, seed=51))
    t = (3, 17)
    for depth in (0, 1, 2):
        assert rl.formula_agreement(G, t, G, t, depth) == 1.0


def test_qe_atomic_agreement_on_matched_pairs(sig55):
    # depth 0 on 2-tuples: matched closures pin the tuple, so atoms agree
    G1 = rl.sample(rl.SampleConfig(96, sig55, seed=52))
    G2 = rl.sample(rl.SampleConfig(96, sig55, seed=53))
    rep = rl.qe_probe(G1, G2, ell=2, depth=0, tuple_len=2, pairs=15, seed=6)
    if rep.config["pairs_matched"]:
        assert rep.rows[0].mean == 1.0


def test_qe_probe_reports_agreement(sig55):
    G1 = rl.sample(rl.SampleConfig(200, sig55, seed=54))
    G2 = rl.sample(rl.SampleConfig(200, sig55, seed=55))
    rep = rl.qe_probe(G1, G2, ell=2, depth=1, tuple_len=1, pairs=20, seed=7)
    assert rep.config["pairs_matched"] > 0
    assert 0.0 <= rep.rows[0].mean <= 1.0
    assert rep.config["formula_count"] == 2


def test_qe_probe_guards(sig55):
    G = rl.sample(rl.SampleConfig(32, sig55, seed=1))
    with pytest.raises(ValueError):
        rl.qe_probe(G, G, ell=1, depth=3)
