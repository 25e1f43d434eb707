import itertools
from fractions import Fraction

import networkx as nx
import numpy as np
import pytest

from hexloops.coupling import (
    CoherentTriple, all_colorings, certify_increasing, color_loops, counted_loops, find_defect_free_circuit,
    find_noncontractible_cycle, marginal_check, monotonicity_check, sample_eta, torus_duality_check,
    triple_weight, xor_resample,
)
from hexloops.lattice import ball, torus, triangular_ball
from hexloops.loops import LoopConfig, decompose, has_noncontractible, is_noncontractible, surrounds
from hexloops.sampler import LoopSpace, ModelParams
from oracles import geometric_surrounds


def test_color_loops_partition():
    d = ball((0, 0), 2)
    w = LoopConfig.hexagon(d, (0, 0)).xor(LoopConfig.hexagon(d, (2, 0)))
    c = color_loops(w, 1.5, seed=1)
    assert np.array_equal(c.red.edges | c.blue.edges, w.edges)
    assert not np.any(c.red.edges & c.blue.edges)
    # n = 1 never colours blue
    assert not color_loops(w, 1, seed=2).blue.edges.any()
    with pytest.raises(ValueError):
        color_loops(w, 0.5)


def test_color_frequency():
    d = ball((0, 0), 1)
    w = LoopConfig.hexagon(d, (0, 0))
    rng = np.random.default_rng(0)
    blue = sum(color_loops(w, 2, seed=rng).blue.edges.any() for _ in range(4000))
    assert abs(blue / 4000 - 0.5) < 0.04


def test_sample_eta_off_loops():
    d = ball((0, 0), 2)
    w = LoopConfig.hexagon(d, (1, 0))
    eta = sample_eta(w, 0.3, seed=4)
    assert not np.any(eta & w.edges)
    assert not sample_eta(w, 1, seed=4).any()
    with pytest.raises(ValueError):
        sample_eta(w, 1.5)


def test_triple_validation_and_weight():
    d = ball((0, 0), 1)
    h = LoopConfig.hexagon(d, (0, 0))
    empty = LoopConfig.empty(d)
    with pytest.raises(ValueError):
        CoherentTriple(h, h, np.zeros(d.n_edges, dtype=bool))
    with pytest.raises(ValueError):
        CoherentTriple(h, empty, h.edges)
    eta = np.zeros(d.n_edges, dtype=bool)
    eta[~h.edges] = True
    eta[np.flatnonzero(~h.edges)[3:]] = False
    t = CoherentTriple(empty, h, eta)
    p = ModelParams(Fraction(3, 2), Fraction(1, 2))
    assert triple_weight(t, p) == Fraction(1, 2) * 1 ** 3
    assert "hexloops triple" in t.to_text()


@pytest.mark.parametrize("region", [ball((0, 0), 0), torus(2, 2)], ids=["hexagon", "torus22"])
@pytest.mark.parametrize("n,x", [(Fraction(3, 2), Fraction(1, 2)), (2, Fraction(3, 4)), (1, 1),
                                 (Fraction(7, 5), Fraction(3, 5))])
def test_marginal_identity_exact(region, n, x):
    rep = marginal_check(region, ModelParams(n, x))
    assert rep.exact and rep.max_rel_error == 0


def test_marginal_identity_float_ball_one():
    rep = marginal_check(ball((0, 0), 1), ModelParams(1.4, 0.6))
    assert not rep.exact and rep.max_rel_error < 1e-10


def test_marginal_direct_triple_sum_on_hexagon():
    # brute force over every (red, blue, eta) triple, independent of marginal_check
    d = ball((0, 0), 0)
    p = ModelParams(Fraction(5, 3), Fraction(2, 5))
    totals = {}
    for w in (LoopConfig.empty(d), LoopConfig(d, d.boundary)):
        tot = 0
        for c in all_colorings(w):
            free = np.flatnonzero(~w.edges)
            for bits in itertools.product((0, 1), repeat=len(free)):
                eta = np.zeros(d.n_edges, dtype=bool)
                eta[free[np.array(bits, dtype=bool)]] = True
                tot += triple_weight(CoherentTriple(c.red, c.blue, eta), p)
        totals[w.n_edges] = tot / p.weight(w.n_edges, w.n_loops)
    assert totals[0] == totals[6]


def _brute_circuit_exists(region, blocked, protect):
    # some simple cycle avoiding blocked edges surrounds every protected face
    g = nx.Graph()
    for e in np.flatnonzero(~blocked):
        g.add_edge(*map(int, region.edge_v[e]), id=int(e))
    for cyc in nx.simple_cycles(g.to_directed()):
        if len(cyc) < 6:
            continue
        ids = [g.edges[cyc[i], cyc[(i + 1) % len(cyc)]]["id"] for i in range(len(cyc))]
        if len(set(ids)) != len(ids):
            continue
        if all(geometric_surrounds(region, ids, f) for f in protect):
            return True
    return False


def test_circuit_matches_brute_force_on_ball_one():
    d = ball((0, 0), 1)
    rng = np.random.default_rng(3)
    for _ in range(60):
        blocked = rng.random(d.n_edges) < rng.uniform(0.05, 0.5)
        for mode in ("inner", "outer"):
            c = find_defect_free_circuit(d, blocked, [(0, 0)], mode=mode)
            assert (c is not None) == _brute_circuit_exists(d, blocked, [(0, 0)])
            if c is not None:
                assert not np.any(c.edges & blocked)
                lps = decompose(c.as_config())
                assert len(lps) == 1 and surrounds(lps[0], (0, 0))


def test_circuit_search_region_and_nesting():
    d = ball((0, 0), 3)
    rng = np.random.default_rng(8)
    annulus = [f for f in triangular_ball((0, 0), 3) if f not in set(triangular_ball((0, 0), 1))]
    for _ in range(40):
        blocked = rng.random(d.n_edges) < 0.2
        inner = find_defect_free_circuit(d, blocked, [(0, 0)], mode="inner")
        outer = find_defect_free_circuit(d, blocked, [(0, 0)], mode="outer")
        assert (inner is None) == (outer is None)
        if inner is not None:
            assert set(inner.inside.tolist()) <= set(outer.inside.tolist())
        c = find_defect_free_circuit(d, blocked, [(0, 0)], search_region=annulus, mode="outer")
        if c is not None:
            fc = {tuple(int(v) for v in p) for e in np.flatnonzero(c.edges) for p in d.edge_fc[e]}
            assert fc & set(annulus)
            near = set(triangular_ball((0, 0), 0))
            assert not (fc <= near)


def test_xor_resample_preserves_weight_and_rejects_blocked():
    d = ball((0, 0), 2)
    p = ModelParams(Fraction(3, 2), Fraction(1, 2))
    rng = np.random.default_rng(1)
    space = LoopSpace(d)
    for i in rng.integers(0, space.size, 30):
        w = space.state(int(i))
        c = color_loops(w, p.n, seed=rng)
        eta = sample_eta(w, p.x, seed=rng)
        t = CoherentTriple(c.red, c.blue, eta)
        C = find_defect_free_circuit(d, t.blocked, [(0, 0)])
        if C is None:
            continue
        t2 = xor_resample(t, C)
        assert triple_weight(t2, p) == triple_weight(t, p)
        assert np.array_equal(t2.blue.edges, t.blue.edges)
    h = LoopConfig.hexagon(d, (0, 0))
    t = CoherentTriple(LoopConfig.empty(d), h, np.zeros(d.n_edges, dtype=bool))
    with pytest.raises(ValueError):
        xor_resample(t, h.edges)


def test_circuit_rejects_torus():
    with pytest.raises(ValueError):
        find_defect_free_circuit(torus(2, 2), np.zeros(12, dtype=bool), [(0, 0)])


def test_noncontractible_cycle_search():
    t = torus(3, 3)
    allowed = np.zeros(t.n_edges, dtype=bool)
    allowed[t.generators[0]] = True
    c = find_noncontractible_cycle(t, allowed)
    lps = decompose(LoopConfig(t, c))
    assert len(lps) == 1 and is_noncontractible(lps[0])
    hexa = t.hexagon_mask((1, 1))
    assert find_noncontractible_cycle(t, hexa) is None
    full = find_noncontractible_cycle(t, np.ones(t.n_edges, dtype=bool))
    assert has_noncontractible(LoopConfig(t, full))


def test_duality_exhaustive_torus22():
    t = torus(2, 2)
    space = LoopSpace(t)
    checked = 0
    for i in range(space.size):
        for c in all_colorings(space.state(i)):
            wit = torus_duality_check(c)
            assert wit is not None
            avoid = c.blue.edges if wit.kind == "blue-free" else c.red.edges
            assert not np.any(wit.edges & avoid)
            checked += 1
    assert checked > 32


def test_certify_increasing():
    t = torus(2, 2)
    space = LoopSpace(t)
    configs = [space.state(i) for i in range(space.size)]
    assert certify_increasing(configs, [c.n_edges == 0 for c in configs]) is False
    assert certify_increasing(configs, [c.n_edges >= 10 for c in configs])


@pytest.mark.parametrize("n", [1, Fraction(3, 2), 2])
def test_monotonicity_on_torus(n):
    rep = monotonicity_check(torus(2, 2), n, lambda c: c.n_edges >= 10)
    assert rep.holds
    with pytest.raises(ValueError):
        monotonicity_check(torus(2, 2), 3, lambda c: True)


def test_counted_loops_mask():
    d = ball((0, 0), 2)
    w = LoopConfig.hexagon(d, (0, 0)).xor(LoopConfig.hexagon(d, (2, 0)))
    m = np.zeros(d.n_edges, dtype=bool)
    m[d.face_edges[d.face_id((0, 0))]] = True
    assert counted_loops(w, m).sum() == 1
    assert counted_loops(w).sum() == 2
