"""Experiment runners.  Each returns a list of :class:`EventReport` rows.

Monte Carlo bounds are checked as ``estimate >= bound - 3 * stderr``; exact
rows compare the enumerated probability with the bound directly.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .auxgraph import build_aux_graph, connectivity, associate, domination_p, percolation_precondition, sample_zeta
from .coupling import CoherentTriple, color_loops, find_defect_free_circuit, sample_eta
from .events import ANNULUS, CROSSING, ball_edges, batch_event_bits, longest_bordering, outermost_loop
from .ising import antiferro_xor_experiment
from .lattice import ball, torus, triangular_ball
from .loops import LoopConfig
from .sampler import BoundaryCondition, LoopSpace, ModelParams, exact_distribution, mcmc_chain
from .stats import batch_means_stderr, binomial_stderr, wilson_interval

SCHEMA_VERSION = 1
CSV_COLUMNS = ("experiment", "params", "event", "estimate", "stderr", "exact_flag", "pass")


@dataclass
class EventReport:
    experiment: str
    params: dict
    event: str
    estimate: float
    stderr: float = 0.0
    exact: bool = False
    passed: bool | None = None
    trials: int = 0
    exact_value: object = None
    note: str = ""
    extras: dict = field(default_factory=dict)

    def params_text(self) -> str:
        return ";".join(f"{k}={v}" for k, v in self.params.items())

    def row(self) -> list:
        p = "" if self.passed is None else ("PASS" if self.passed else "FAIL")
        return [self.experiment, self.params_text(), self.event, repr(float(self.estimate)),
                repr(float(self.stderr)), int(self.exact), p]


def _bound_check(est, se, bound, exact) -> bool:
    return bool(est >= bound) if exact else bool(est >= bound - 3 * se)


def _mc_series(flags, bit):
    s = ((flags & bit) != 0).astype(float)
    return float(s.mean()), batch_means_stderr(s)


def xi_outer_hexagon(k: int) -> BoundaryCondition:
    """Boundary condition with one loop around a face two steps outside the ball."""
    outer = ball((0, 0), k + 3)
    w = LoopConfig.hexagon(outer, (k + 2, 0))
    return BoundaryCondition(outer, w)


def run_perco(k: int, xi: str = "empty", mode: str = "exact", trials: int = 2000, seed: int = 0):
    """Surrounding loop of diameter ``>= k`` around the origin at ``n = x = 1``."""
    region = ball((0, 0), k)
    bc = xi_outer_hexagon(k) if xi == "hexagon" else None
    params = ModelParams(1, 1)
    tag = dict(k=k, n=1, x=1, xi=xi, mode=mode)
    if mode == "exact":
        d = exact_distribution(region, params, bc, dmin=k, target=(0, 0))
        p = d.event_probability(kernels.FLAG_SURROUND_BIG)
        return [EventReport("perco", tag, "surround_diam_ge_k", float(p), 0.0, True, p >= Fraction(1, 2),
                            len(d), p, "exact >= 1/2")]
    ch = mcmc_chain(region, params, bc, seed=seed, samples=trials, target=(0, 0))
    est, se = _mc_series(ch.flags(k), kernels.FLAG_SURROUND_BIG)
    return [EventReport("perco", tag, "surround_diam_ge_k", est, se, False, _bound_check(est, se, 0.5, False),
                        trials, note=">= 1/2 - 3 sigma")]


def run_torus(k: int, l: int, n, trials: int = 4000, mode: str = "exact", seed: int = 0):
    """Non-contractible loop probability at ``x = 1``."""
    if not 1 <= float(n) <= 2:
        raise ValueError("torus experiment needs 1 <= n <= 2")
    region = torus(k, l)
    params = ModelParams(n, 1)
    tag = dict(k=k, l=l, n=n, x=1, mode=mode)
    if mode == "exact":
        d = exact_distribution(region, params)
        p = d.event_probability(kernels.FLAG_NONCONTRACTIBLE, exact=params.exact)
        return [EventReport("torus", tag, "noncontractible", float(p), 0.0, True, p >= Fraction(1, 4),
                            len(d), p, "exact >= 1/4")]
    ch = mcmc_chain(region, params, seed=seed, samples=trials)
    est, se = _mc_series(ch.flags(), kernels.FLAG_NONCONTRACTIBLE)
    return [EventReport("torus", tag, "noncontractible", est, se, False, _bound_check(est, se, 0.25, False),
                        trials, note=">= 1/4 - 3 sigma", extras=dict(acceptance=ch.acceptance_rate))]


def run_antiferro(k: int, x, trials: int = 1000, mode: str = "mcmc", seed: int = 0, eps: float = 0.01):
    """Surrounding loop of diameter ``> k`` on the ball of radius ``2k`` with plus
    boundary spins, antiferromagnetic ``1 < x <= sqrt(3)``."""
    xf = float(x)
    if not 1 < xf <= math.sqrt(3) + 1e-12:
        raise ValueError("antiferromagnetic experiment needs 1 < x <= sqrt(3)")
    tag = dict(k=k, x=round(xf, 12), mode=mode)
    if mode == "exact":
        d = exact_distribution(ball((0, 0), 2 * k), ModelParams(1, x), dmin=k + 1, target=(0, 0))
        p = d.event_probability(kernels.FLAG_SURROUND_BIG, exact=False)
        return [EventReport("antiferro", tag, "surround_diam_gt_k", p, 0.0, True, p > eps, len(d), p,
                            f"exact > {eps}")]
    rep = antiferro_xor_experiment(k, x, seed=seed, trials=trials)
    lo, hi = wilson_interval(rep.surround_gt_k, trials)
    rows = [
        EventReport("antiferro", tag, "surround_diam_gt_k", rep.p_gt_k, rep.stderr_gt_k, False,
                    rep.p_gt_k > 0 and lo > eps, trials, note=f"positive, Wilson(3) lower > {eps}",
                    extras=dict(wilson_low=lo, wilson_high=hi)),
        EventReport("antiferro", tag, "bond_free_circuit", rep.p_circ, binomial_stderr(rep.p_circ, trials),
                    False, None, trials),
        EventReport("antiferro", tag, "xor_implication_failures", rep.xor_implication_failures, 0.0, False,
                    rep.xor_implication_failures == 0 and rep.es_weight_failures == 0, trials),
    ]
    return rows


def run_defect_circuit(k: int, n, x, r: int = 0, trials: int = 500, seed: int = 0, delta: float = 0.05,
                       p0: float = 1.0):
    """Defect-free circuits around the ``r``-ball in coloured samples on the ``k``-ball."""
    nf, xf = float(n), float(x)
    notes = []
    if not (1 <= nf <= 1 + delta and 1 - delta <= xf <= 1):
        notes.append(f"outside the delta={delta} window")
    p = domination_p(nf, xf)
    if p > p0:
        notes.append(f"p(n,x)={p:.3f} above p0={p0}")
    region = ball((0, 0), k)
    params = ModelParams(n, x)
    rng = np.random.default_rng(seed)
    ch = mcmc_chain(region, params, seed=seed, samples=trials, target=(0, 0))
    protect = triangular_ball((0, 0), r)
    space = LoopSpace(region, target=(0, 0))
    found = before = after = 0
    nc = nc_total = 0
    for w in ch:
        col = color_loops(w, n, rng)
        eta = sample_eta(w, x, rng)
        t = CoherentTriple(col.red, col.blue, eta)
        C = find_defect_free_circuit(region, t.blocked, protect)
        fl = space.summarize(w.edges)[2][0]
        before += bool(fl & kernels.FLAG_SURROUND)
        if C is not None:
            found += 1
            fl2 = space.summarize(w.edges ^ C.edges)[2][0]
            after += bool(fl2 & kernels.FLAG_SURROUND)
        else:
            after += bool(fl & kernels.FLAG_SURROUND)
        g = build_aux_graph(region, w)
        R = 2 * r + 2
        if percolation_precondition(g, (0, 0), r, R):
            z = sample_zeta(g, associate(g), params, rng)
            dist = g.distances()[g.face_vertex((0, 0))]
            nc_total += 1
            nc += not connectivity(g, z, np.flatnonzero(dist <= R), np.flatnonzero(dist > R))
    tag = dict(k=k, n=n, x=x, r=r)
    pc = found / trials
    trivial = nf == 1 and xf == 1
    rows = [
        EventReport("defect_circuit", tag, "circuit_found", pc, binomial_stderr(pc, trials), False,
                    (found == trials) if trivial else None, trials, note="; ".join(notes)),
        EventReport("defect_circuit", tag, "surround_before_xor", before / trials,
                    binomial_stderr(before / trials, trials), False, None, trials),
        EventReport("defect_circuit", tag, "surround_after_xor", after / trials,
                    binomial_stderr(after / trials, trials), False, None, trials),
        EventReport("defect_circuit", tag, "p_domination", p, 0.0, True, None, 0),
    ]
    if nc_total:
        q = nc / nc_total
        rows.append(EventReport("defect_circuit", tag, "zeta_non_connection", q, binomial_stderr(q, nc_total),
                                False, None, nc_total))
    return rows


def run_events(k: int, n, x, r: int, R: int, trials: int = 500, seed: int = 0):
    """Crossing/annulus events and loop-size tails at a uniformly chosen face."""
    region = ball((0, 0), k)
    ch = mcmc_chain(region, ModelParams(n, x), seed=seed, samples=trials)
    rng = np.random.default_rng(seed + 1)
    faces = [tuple(int(c) for c in f) for f in region.faces]
    hits, lengths, vols, ratio = [], [], [], 0.0
    for w in ch:
        f = faces[int(rng.integers(len(faces)))]
        bits = int(batch_event_bits(region, w.edges, f, r, R)[0])
        hits.append(float(bits & (ANNULUS | CROSSING) != 0))
        lengths.append(longest_bordering(w, f))
        out = outermost_loop(w, f)
        vols.append(out.volume)
        if out.length:
            ratio = max(ratio, out.volume / out.length ** 2)
    tag = dict(k=k, n=n, x=x, r=r, R=R)
    est = float(np.mean(hits))
    L = np.array(lengths, dtype=float)
    V = np.array(vols, dtype=float)
    return [
        EventReport("events", tag, "crossing_or_annulus", est, batch_means_stderr(hits), False, None, trials),
        EventReport("events", tag, "longest_bordering_mean", float(L.mean()), batch_means_stderr(L), False, None,
                    trials, extras=dict(p90=float(np.percentile(L, 90)), max=float(L.max()))),
        EventReport("events", tag, "outermost_volume_mean", float(V.mean()), batch_means_stderr(V), False, None,
                    trials, extras=dict(p90=float(np.percentile(V, 90)), max=float(V.max()))),
        EventReport("events", tag, "volume_over_length_sq_max", ratio, 0.0, False, None, trials),
    ]


def annulus_space(k: int) -> LoopSpace:
    """Loop configurations on the annulus of faces at distance ``k < d <= 2k``.

    Hexagon moves on the annulus faces plus the circuit around the hole span
    every even subgraph of the annulus; the hole carries no edges.
    """
    region = ball((0, 0), 2 * k)
    faces = [f for f in triangular_ball((0, 0), 2 * k) if region.face_distance((0, 0), f) > k]
    # edges between a hole face and an annulus face
    inner = ball_edges(region, (0, 0), k)
    ring = ball_edges(region, (0, 0), 2 * k, k)
    return LoopSpace(region, target=(0, 0), faces=faces, extra_gens=[np.flatnonzero(inner & ring)])


def run_rsw(k: int, n, x, trials: int = 1000, mode: str = "mcmc", seed: int = 0, eps: float = 0.01):
    """Loop surrounding the origin in the annulus ``k < d <= 2k`` (as the domain,
    empty boundary condition)."""
    params = ModelParams(n, x)
    tag = dict(k=k, n=n, x=x, mode=mode)
    space = annulus_space(k)
    if mode == "exact":
        d = exact_distribution(space.region, params, space=space)
        p = d.event_probability(kernels.FLAG_SURROUND, exact=params.exact)
        ok = eps <= p <= 1 - eps
        return [EventReport("rsw", tag, "annulus_surround", float(p), 0.0, True, ok, len(d), p,
                            f"within [{eps}, {1 - eps}]")]
    ch = mcmc_chain(space.region, params, seed=seed, samples=trials, space=space)
    est, se = _mc_series(ch.flags(), kernels.FLAG_SURROUND)
    ok = est + 3 * se >= eps and est - 3 * se <= 1 - eps
    return [EventReport("rsw", tag, "annulus_surround", est, se, False, ok, trials,
                        note=f"within [{eps}, {1 - eps}] up to 3 sigma", extras=dict(acceptance=ch.acceptance_rate))]


EXPERIMENTS = {
    "perco": run_perco,
    "torus": run_torus,
    "antiferro": run_antiferro,
    "defect-circuit": run_defect_circuit,
    "events": run_events,
    "rsw": run_rsw,
}
