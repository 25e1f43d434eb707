"""Ising spins on faces, Edwards-Sokal couplings and FK-Ising marginals.

Spins live on the dual vertices of a domain (its faces plus the outer faces
touching a boundary edge); outer faces carry the fixed boundary spins ``tau``.
Bond configurations ``eta`` are masks over the dual edges, which are indexed
like the primal edges they cross.

With ``beta = -log(x)/2`` the Ising weight of ``sigma`` is proportional to
``x^{#disagreeing pairs}``, so ``x < 1`` is ferromagnetic and ``x > 1``
antiferromagnetic.
"""

from __future__ import annotations

import itertools
import math
from fractions import Fraction
from dataclasses import dataclass, field

import numpy as np
import sympy

from . import kernels
from .coupling import find_defect_free_circuit
from .kernels import FLAG_SURROUND_BIG
from .lattice import Domain, ball, triangular_ball
from .loops import SpinConfig, domain_walls, dual_adjacency
from .sampler import BoundaryCondition, LoopSpace, ModelParams, exact_distribution
from .stats import batch_means_stderr, wilson_interval


def beta_from_x(x):
    if isinstance(x, (int, Fraction)) and not isinstance(x, bool):
        x = sympy.Rational(x.numerator, x.denominator)
    if isinstance(x, sympy.Basic):
        return sympy.simplify(-sympy.log(x) / 2)
    return -0.5 * math.log(x)


def x_from_beta(beta):
    if isinstance(beta, sympy.Basic):
        return sympy.simplify(sympy.exp(-2 * beta))
    return math.exp(-2.0 * beta)


@dataclass(frozen=True)
class IsingParams:
    beta: object

    @property
    def x(self):
        return x_from_beta(self.beta)

    @classmethod
    def from_x(cls, x):
        return cls(beta_from_x(x))


def boundary_values(region: Domain, tau) -> np.ndarray:
    """Spins on the outer faces: a constant, a sequence, or a mapping by face."""
    nb = len(region.outer_faces)
    if np.isscalar(tau):
        vals = np.full(nb, int(tau), dtype=np.int8)
    elif isinstance(tau, dict):
        vals = np.array([tau[(int(a), int(b))] for a, b in region.outer_faces], dtype=np.int8)
    elif isinstance(tau, SpinConfig):
        vals = tau.values[region.n_faces:].copy()
    else:
        vals = np.asarray(tau, dtype=np.int8)
    if vals.shape != (nb,) or not np.all(np.abs(vals) == 1):
        raise ValueError("boundary spins must be +1/-1 on every outer face")
    return vals


def spin_configs(region: Domain, tau=1):
    """Every spin configuration with the given boundary spins."""
    outer = boundary_values(region, tau)
    F = region.n_faces
    for bits in itertools.product((1, -1), repeat=F):
        yield SpinConfig(region, np.concatenate([np.array(bits, dtype=np.int8), outer]))


def pair_sum(sigma: SpinConfig) -> int:
    """Sum of ``sigma(u) sigma(v)`` over adjacent faces with one of them inside."""
    ed = sigma.region.edge_dual
    v = sigma.values.astype(np.int64)
    return int((v[ed[:, 0]] * v[ed[:, 1]]).sum())


def ising_weight(sigma: SpinConfig, beta):
    s = pair_sum(sigma)
    if isinstance(beta, sympy.Basic):
        return sympy.exp(beta * s)
    return math.exp(beta * s)


def _exact_equal(a, b) -> bool:
    d = a - b
    if isinstance(d, sympy.Basic):
        return sympy.simplify(d) == 0
    return d == 0


def _is_exact(v):
    return isinstance(v, sympy.Basic) or not isinstance(v, float)


def _enclosing(region: Domain) -> Domain:
    faces = [tuple(f) for f in region.faces] + [tuple(f) for f in region.outer_faces]
    return Domain(faces)


@dataclass
class EquivalenceReport:
    max_abs_error: object
    n_states: int
    exact: bool

    @property
    def ok(self) -> bool:
        return self.max_abs_error == 0 if self.exact else self.max_abs_error < 1e-12


def loop_ising_equivalence_check(region: Domain, x, tau=1) -> EquivalenceReport:
    """Push the Ising measure forward by domain walls and compare with n = 1.

    With non-constant boundary spins the loop measure is taken on an
    enclosing domain whose exterior configuration is the domain walls of
    ``tau``.
    """
    beta = beta_from_x(x)
    sigmas = list(spin_configs(region, tau))
    weights = [ising_weight(s, beta) for s in sigmas]
    Z = sum(weights)
    outer_spins = boundary_values(region, tau)
    params = ModelParams(1, x)
    if np.all(outer_spins == outer_spins[0]):
        dist = exact_distribution(region, params)
        lift = lambda s: domain_walls(s).edges
    else:
        big = _enclosing(region)
        spins = np.ones(big.n_dual, dtype=np.int8)
        for (a, b), v in zip(region.outer_faces, outer_spins):
            spins[big.dual_index[(int(a), int(b))]] = v
        xi = domain_walls(SpinConfig(big, spins))
        dist = exact_distribution(region, params, BoundaryCondition(big, xi))

        def lift(s):
            vals = spins.copy()
            for i, f in enumerate(region.faces):
                vals[big.dual_index[(int(f[0]), int(f[1]))]] = s.values[i]
            return domain_walls(SpinConfig(big, vals)).edges

    index = {}
    for i in range(len(dist)):
        index[dist.space.state(i).edges.tobytes()] = i
    pushed = {}
    for s, w in zip(sigmas, weights):
        key = index[lift(s).tobytes()]
        pushed[key] = pushed.get(key, 0) + w / Z
    exact = _is_exact(x)
    probs = dist.exact_probabilities() if exact else dist.probabilities()
    err = 0
    for i in range(len(dist)):
        d = pushed.get(i, 0) - probs[i]
        if exact:
            d = sympy.nsimplify(sympy.simplify(d)) if isinstance(d, sympy.Basic) else d
            err = max(err, abs(d))
        else:
            err = max(err, abs(float(d)))
    if exact and isinstance(err, sympy.Basic):
        err = sympy.simplify(err)
    return EquivalenceReport(err, len(dist), exact)


# ---- FK side ------------------------------------------------------------

def cluster_counts(region: Domain, eta) -> tuple[int, int]:
    """``(k0, k1)``: cluster numbers of ``eta`` with free and wired boundary.

    The wired count identifies all outer faces into one vertex.
    """
    eta = np.asarray(eta, dtype=bool)
    nd = region.n_dual
    ed = region.edge_dual
    parent = np.empty(nd, dtype=np.int64)
    kernels.cluster_roots(nd, ed, eta, parent)
    k0 = len(np.unique(parent))
    outer_roots = np.unique(parent[region.n_faces:])
    k1 = k0 - len(outer_roots) + 1
    return k0, k1


def is_bipartite_with_boundary(region: Domain, eta, tau=1) -> bool:
    """Can the faces be coloured so every ``eta`` edge joins opposite spins,
    with the outer faces fixed to ``tau``?"""
    eta = np.asarray(eta, dtype=bool)
    adj = dual_adjacency(region)
    nd = region.n_dual
    col = np.zeros(nd, dtype=np.int8)
    col[region.n_faces:] = boundary_values(region, tau)
    order = list(range(region.n_faces, nd)) + list(range(region.n_faces))
    for s in order:
        if col[s] == 0:
            col[s] = 1
        stack = [s]
        while stack:
            u = stack.pop()
            for w, e in adj[u]:
                if not eta[e]:
                    continue
                if col[w] == 0:
                    col[w] = -col[u]
                    stack.append(w)
                elif col[w] == col[u]:
                    return False
    return True


def fk_weight_ferro(region: Domain, eta, x):
    """``(1/x - 1)^{|eta|} 2^{k1(eta)}`` (wired boundary)."""
    eta = np.asarray(eta, dtype=bool)
    _, k1 = cluster_counts(region, eta)
    return (1 / x - 1) ** int(eta.sum()) * 2 ** k1


def fk_weight_antiferro(region: Domain, eta, x, tau=1, clusters: str = "wired"):
    """``(x - 1)^{|eta|} 2^{k} 1_Bip(eta)``.

    ``clusters="wired"`` uses ``k1``, the count that makes this the bond
    marginal of the antiferromagnetic coupling; ``"free"`` uses ``k0``.
    """
    eta = np.asarray(eta, dtype=bool)
    k0, k1 = cluster_counts(region, eta)
    k = k1 if clusters == "wired" else k0
    if not is_bipartite_with_boundary(region, eta, tau):
        return 0
    return (x - 1) ** int(eta.sum()) * 2 ** k


def es_weight(sigma: SpinConfig, eta, x):
    """Unnormalised joint weight of the coupling.

    ``x <= 1``: ``(1/x - 1)^{|eta|}`` if every bond joins equal spins;
    ``x > 1``: ``(x - 1)^{|eta|}`` if every bond joins opposite spins.
    """
    eta = np.asarray(eta, dtype=bool)
    ed = sigma.region.edge_dual
    v = sigma.values
    agree = v[ed[:, 0]] == v[ed[:, 1]]
    if x <= 1:
        if np.any(eta & ~agree):
            return 0
        return (1 / x - 1) ** int(eta.sum())
    if np.any(eta & agree):
        return 0
    return (x - 1) ** int(eta.sum())


def _all_eta(region):
    E = region.n_edges
    for bits in itertools.product((False, True), repeat=E):
        yield np.array(bits, dtype=bool)


@dataclass
class ConsistencyReport:
    ising_ok: bool
    fk_ok: bool
    fk_free_ok: bool | None
    n_spins: int
    n_bonds: int


def _proportional(a, b) -> bool:
    """Are two sequences proportional (exactly)?"""
    ref = None
    for u, v in zip(a, b):
        if _exact_equal(v, 0):
            if not _exact_equal(u, 0):
                return False
            continue
        r = u / v
        if ref is None:
            ref = r
        elif not _exact_equal(r, ref):
            return False
    return True


def es_consistency_check(region: Domain, x, tau=1) -> ConsistencyReport:
    """Exhaustive check of both marginals of the coupling.

    Summing over bonds must give the Ising weight; summing over spins must
    give the FK weight (ferromagnetic formula for ``x <= 1``, antiferromagnetic
    one for ``x >= 1``).  For ``x > 1`` the free-count variant is also tested
    and its result reported.
    """
    sigmas = list(spin_configs(region, tau))
    etas = list(_all_eta(region))
    table = [[es_weight(s, e, x) for e in etas] for s in sigmas]
    beta = beta_from_x(x)
    ising = [ising_weight(s, beta) for s in sigmas]
    ising_ok = _proportional([sum(row) for row in table], ising)
    col = [sum(table[i][j] for i in range(len(sigmas))) for j in range(len(etas))]
    free_ok = None
    if x < 1:
        fk = [fk_weight_ferro(region, e, x) for e in etas]
        fk_ok = _proportional(col, fk)
    else:
        fk = [fk_weight_antiferro(region, e, x, tau) for e in etas]
        fk_ok = _proportional(col, fk)
        if x == 1:
            fk_ok = fk_ok and _proportional(col, [fk_weight_ferro(region, e, x) for e in etas])
        else:
            free_ok = _proportional(col, [fk_weight_antiferro(region, e, x, tau, clusters="free") for e in etas])
    return ConsistencyReport(ising_ok, fk_ok, free_ok, len(sigmas), len(etas))


@dataclass
class RelationReport:
    conditional_ok: bool
    decreasing_ok: bool
    n_events: int
    worst_gap: float


def _down_closure(etas, tops):
    ints = [int("".join("1" if b else "0" for b in e), 2) for e in etas]
    top_ints = [int("".join("1" if b else "0" for b in t), 2) for t in tops]
    return np.array([any(a & ~t == 0 for t in top_ints) for a in ints])


def antiferro_ferro_relation_check(region: Domain, x, tau=1, n_events: int = 20, seed=0) -> RelationReport:
    """Exact check that the antiferromagnetic FK measure at ``x`` is the wired
    one at ``1/x`` conditioned on bipartiteness, and that
    ``phi_x(D) <= phi^1_{1/x}(D)`` for the empty-bond event and random
    down-closed events ``D``."""
    if not x > 1:
        raise ValueError("relation is for x > 1")
    etas = list(_all_eta(region))
    anti = [fk_weight_antiferro(region, e, x, tau) for e in etas]
    ferro = [fk_weight_ferro(region, e, 1 / x) for e in etas]
    bip = [is_bipartite_with_boundary(region, e, tau) for e in etas]
    Za = sum(anti)
    Zf = sum(ferro)
    Zfb = sum(f for f, b in zip(ferro, bip) if b)
    cond_ok = all(_exact_equal(a / Za, (f / Zfb if b else 0)) for a, f, b in zip(anti, ferro, bip))
    rng = np.random.default_rng(seed)
    dec_ok = True
    worst = math.inf
    E = region.n_edges
    events = [np.array([not e.any() for e in etas])]
    for _ in range(n_events - 1):
        tops = [rng.random(E) < rng.uniform(0.2, 0.9) for _ in range(rng.integers(1, 4))]
        events.append(_down_closure(etas, tops))
    for ev in events:
        pa = sum(a for a, s in zip(anti, ev) if s) / Za
        pf = sum(f for f, s in zip(ferro, ev) if s) / Zf
        gap = float(sympy.N(pf - pa, 40)) if isinstance(pf - pa, sympy.Basic) else float(pf - pa)
        worst = min(worst, gap)
        if gap < 0 and not _exact_equal(pf, pa):
            dec_ok = False
    return RelationReport(cond_ok, dec_ok, len(events), worst)


# ---- sampling -------------------------------------------------------------

class ESChain:
    """Alternating bond/spin resampling; each step is one full sweep."""

    def __init__(self, region: Domain, x, tau=1, seed=None, start=None):
        self.region = region
        self.x = float(x)
        self.rng = np.random.default_rng(seed)
        nd = region.n_dual
        self.fixed = np.zeros(nd, dtype=bool)
        self.fixed[region.n_faces:] = True
        if start is None:
            spins = np.ones(nd, dtype=np.int64)
        else:
            spins = start.values.astype(np.int64)
        spins[region.n_faces:] = boundary_values(region, tau)
        self.spins = spins
        self.antiferro = self.x > 1
        self.p_bond = (self.x - 1) / self.x if self.antiferro else 1 - self.x
        self.edges = region.edge_dual.astype(np.int64)
        self.bonds = np.zeros(region.n_edges, dtype=bool)
        self.parent = np.empty(nd, dtype=np.int64)

    def run(self, sweeps: int):
        if sweeps <= 0:
            return
        ub = self.rng.random((sweeps, self.region.n_edges))
        uf = self.rng.random((sweeps, self.region.n_dual))
        kernels.es_sweeps(self.spins, self.fixed, self.edges, self.antiferro, self.p_bond,
                          ub, uf, self.bonds, self.parent)

    def state(self):
        return SpinConfig(self.region, self.spins.copy()), self.bonds.copy()


def es_gibbs_sample(region: Domain, x, tau=1, seed=None, sweeps: int = 50):
    """One ``(sigma, eta)`` pair after ``sweeps`` sweeps from the all-plus start."""
    ch = ESChain(region, x, tau, seed)
    ch.run(sweeps)
    return ch.state()


@dataclass
class AntiferroReport:
    k: int
    x: float
    trials: int
    surround_gt_k: int
    surround_ge_k: int
    circ: int
    xor_implication_failures: int
    es_weight_failures: int
    stderr_gt_k: float = 0.0
    extras: dict = field(default_factory=dict)

    @property
    def p_gt_k(self) -> float:
        return self.surround_gt_k / self.trials

    @property
    def p_circ(self) -> float:
        return self.circ / self.trials

    def wilson_gt_k(self, z: float = 3.0):
        return wilson_interval(self.surround_gt_k, self.trials, z)


def antiferro_xor_experiment(k: int, x, tau=1, seed=0, trials: int = 1000, burn_in: int = 200,
                             thin: int = 2, center=(0, 0)) -> AntiferroReport:
    """Sample the coupling on the ball of radius ``2k``, look for a bond-free
    circuit in the annulus ``k < d <= 2k`` and XOR the spins inside it.

    Counts: loops of diameter ``> k`` and ``>= k`` surrounding the centre,
    circuits found, configurations where neither ``w`` nor ``w XOR C`` has a
    surrounding loop of diameter ``>= k``, and circuits that change the
    coupling weight.
    """
    region = ball(center, 2 * k)
    space = LoopSpace(region, target=center)
    inner = triangular_ball(center, k)
    annulus = [f for f in (tuple(int(c) for c in g) for g in region.faces) if f not in set(inner)]
    ch = ESChain(region, x, tau, seed)
    ch.run(burn_in)
    gt = ge = circ = fails = wfails = 0
    series = []
    for _ in range(trials):
        ch.run(thin)
        sigma, eta = ch.state()
        w = domain_walls(sigma)
        _, _, f_gt = space.summarize(w.edges, dmin=k + 1)
        _, _, f_ge = space.summarize(w.edges, dmin=k)
        has_gt = bool(f_gt[0] & FLAG_SURROUND_BIG)
        has_ge = bool(f_ge[0] & FLAG_SURROUND_BIG)
        gt += has_gt
        ge += has_ge
        series.append(float(has_gt))
        C = find_defect_free_circuit(region, eta, inner, search_region=annulus, mode="outer")
        if C is None:
            continue
        circ += 1
        flipped = sigma.values.copy()
        flipped[C.inside] = -flipped[C.inside]
        s2 = SpinConfig(region, flipped)
        if es_weight(s2, eta, x) != es_weight(sigma, eta, x):
            wfails += 1
        w2 = w.edges ^ C.edges
        _, _, f2 = space.summarize(w2, dmin=k)
        if not (has_ge or f2[0] & FLAG_SURROUND_BIG):
            fails += 1
    rep = AntiferroReport(k, float(x), trials, gt, ge, circ, fails, wfails,
                          stderr_gt_k=batch_means_stderr(series))
    return rep
