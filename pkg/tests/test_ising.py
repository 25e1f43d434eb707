import math
from fractions import Fraction

import numpy as np
import pytest
import sympy

from hexloops.ising import (
    ESChain, IsingParams, antiferro_ferro_relation_check, antiferro_xor_experiment, beta_from_x,
    boundary_values, cluster_counts, es_consistency_check, es_gibbs_sample, es_weight, fk_weight_antiferro,
    fk_weight_ferro, is_bipartite_with_boundary, loop_ising_equivalence_check, pair_sum, spin_configs,
    x_from_beta,
)
from hexloops.lattice import ball
from hexloops.loops import domain_walls

HEX = ball((0, 0), 0)
X_VALUES = [Fraction(1, 2), 1 / sympy.sqrt(3), sympy.Integer(1), sympy.sqrt(3)]


def test_beta_roundtrip():
    for x in (0.3, 1.0, 1.7):
        assert x_from_beta(beta_from_x(x)) == pytest.approx(x)
    assert sympy.simplify(x_from_beta(beta_from_x(sympy.sqrt(3))) - sympy.sqrt(3)) == 0
    assert IsingParams.from_x(0.5).x == pytest.approx(0.5)
    assert beta_from_x(1.0) == 0


def test_boundary_values_forms():
    d = ball((0, 0), 1)
    nb = len(d.outer_faces)
    assert np.all(boundary_values(d, -1) == -1)
    alt = [1 if i % 2 else -1 for i in range(nb)]
    assert list(boundary_values(d, alt)) == alt
    with pytest.raises(ValueError):
        boundary_values(d, [1] * (nb - 1))


def test_pair_sum_all_plus():
    s = next(spin_configs(HEX))
    assert pair_sum(s) == HEX.n_edges


@pytest.mark.parametrize("x", X_VALUES, ids=["1/2", "1/sqrt3", "1", "sqrt3"])
def test_loop_ising_equivalence_on_hexagon(x):
    assert loop_ising_equivalence_check(HEX, x).ok


def test_loop_ising_equivalence_ball_one_float():
    assert loop_ising_equivalence_check(ball((0, 0), 1), 0.7).ok


def test_loop_ising_equivalence_mixed_boundary():
    nb = len(HEX.outer_faces)
    tau = [1, 1, 1, -1, -1, -1][:nb]
    assert loop_ising_equivalence_check(HEX, Fraction(2, 3), tau).ok


@pytest.mark.parametrize("x", X_VALUES, ids=["1/2", "1/sqrt3", "1", "sqrt3"])
def test_es_consistency_on_hexagon(x):
    rep = es_consistency_check(HEX, x)
    assert rep.ising_ok and rep.fk_ok
    assert rep.n_spins == 2 and rep.n_bonds == 64


def test_antiferro_needs_wired_count():
    # the free-count variant is not the bond marginal
    rep = es_consistency_check(HEX, sympy.sqrt(3))
    assert rep.fk_free_ok is False


def test_relation_at_sqrt3():
    rep = antiferro_ferro_relation_check(HEX, sympy.sqrt(3))
    assert rep.conditional_ok and rep.decreasing_ok
    with pytest.raises(ValueError):
        antiferro_ferro_relation_check(HEX, Fraction(1, 2))


def test_cluster_counts_and_bipartite():
    e = np.zeros(HEX.n_edges, dtype=bool)
    k0, k1 = cluster_counts(HEX, e)
    assert (k0, k1) == (HEX.n_dual, 2)
    e[:] = True
    assert cluster_counts(HEX, e) == (1, 1)
    # the dual of one hexagon is a star: only a mixed boundary can frustrate it
    assert is_bipartite_with_boundary(HEX, e)
    mixed = [1, -1] * (len(HEX.outer_faces) // 2)
    assert not is_bipartite_with_boundary(HEX, e, mixed)
    one = np.zeros(HEX.n_edges, dtype=bool)
    one[0] = True
    assert is_bipartite_with_boundary(HEX, one)
    # the bond joins the centre to the wired boundary: one cluster
    assert fk_weight_ferro(HEX, one, Fraction(1, 2)) == 2
    assert fk_weight_antiferro(HEX, one, Fraction(2), clusters="free") == 2 ** (HEX.n_dual - 1)


def test_es_weight_support():
    plus, minus = list(spin_configs(HEX))
    bonds = np.zeros(HEX.n_edges, dtype=bool)
    bonds[0] = True
    assert es_weight(plus, bonds, Fraction(1, 2)) == 1
    assert es_weight(minus, bonds, Fraction(1, 2)) == 0
    assert es_weight(minus, bonds, Fraction(2)) == 1
    assert es_weight(plus, bonds, Fraction(2)) == 0


@pytest.mark.parametrize("x", [0.6, 1.7])
def test_es_chain_bonds_respect_spins(x):
    d = ball((0, 0), 2)
    ch = ESChain(d, x, seed=1)
    for _ in range(20):
        ch.run(1)
        s, eta = ch.state()
        assert es_weight(s, eta, x) != 0
        assert np.all(s.values[d.n_faces:] == 1)


def test_es_chain_matches_exact_magnetisation():
    d = ball((0, 0), 1)
    x = 0.6
    beta = beta_from_x(x)
    Z = m = 0.0
    fid = d.face_id((0, 0))
    for s in spin_configs(d):
        w = math.exp(beta * pair_sum(s))
        Z += w
        m += w * s.values[fid]
    exact = m / Z
    ch = ESChain(d, x, seed=5)
    ch.run(100)
    vals = []
    for _ in range(6000):
        ch.run(1)
        vals.append(ch.spins[fid])
    assert abs(np.mean(vals) - exact) < 0.04


def test_es_gibbs_sample_domain_walls_even():
    s, eta = es_gibbs_sample(ball((0, 0), 2), math.sqrt(3), seed=3, sweeps=10)
    assert domain_walls(s).n_edges % 2 == 0


def test_antiferro_experiment_counts():
    rep = antiferro_xor_experiment(1, math.sqrt(3), seed=0, trials=200, burn_in=50)
    assert rep.xor_implication_failures == 0
    assert rep.es_weight_failures == 0
    assert rep.surround_gt_k <= rep.surround_ge_k
    lo, hi = rep.wilson_gt_k()
    assert lo <= rep.p_gt_k <= hi
