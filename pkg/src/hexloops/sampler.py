"""Exact enumeration and Metropolis sampling of the loop O(n) measure.

A state space is ``seed XOR span(generators)``.  On a domain the generators
are its hexagons; on a torus they are all hexagons but one plus two straight
non-contractible cycles.  Boundary conditions are handled by working on an
enclosing domain: the exterior configuration is the seed and only the inner
domain's hexagons are flipped.

The Metropolis chain draws its uniforms from ``numpy.random.default_rng(seed)``
(PCG64), in chunks of ``2**16`` steps; the loop count is recomputed from
scratch at every chunk boundary.
"""

from __future__ import annotations

import csv
import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import kernels
from .lattice import Domain, Region
from .loops import LoopConfig, is_even

DEFAULT_CAP = 1 << 22
CHUNK = 1 << 16


class EnumerationTooLarge(ValueError):
    pass


def critical_x(n):
    """``1/sqrt(2 + sqrt(2 - n))`` for ``0 <= n <= 2``."""
    if not 0 <= n <= 2:
        raise ValueError("critical point defined for 0 <= n <= 2")
    return 1 / math.sqrt(2 + math.sqrt(2 - n))


def _is_exact(v) -> bool:
    return isinstance(v, (int, Fraction)) or type(v).__module__.startswith("sympy")


@dataclass(frozen=True)
class ModelParams:
    """Loop weight ``n`` and edge weight ``x``; exact number types are kept."""

    n: object
    x: object

    def __post_init__(self):
        if not self.n > 0 or not self.x > 0:
            raise ValueError("n and x must be positive")
        for name in ("n", "x"):
            v = getattr(self, name)
            if isinstance(v, int) and not isinstance(v, bool):
                object.__setattr__(self, name, Fraction(v))

    @property
    def x_c(self) -> float:
        return critical_x(float(self.n))

    @property
    def exact(self) -> bool:
        return _is_exact(self.n) and _is_exact(self.x)

    def weight(self, n_edges: int, n_loops: int):
        return self.x ** n_edges * self.n ** n_loops

    def log_weight(self, n_edges, n_loops):
        return np.asarray(n_edges) * math.log(float(self.x)) + np.asarray(n_loops) * math.log(float(self.n))


@dataclass
class BoundaryCondition:
    """Exterior configuration ``xi`` on an enclosing domain ``outer``.

    Configurations of the inner domain agree with ``xi`` on every edge of
    ``outer`` that is not an edge of the inner domain.
    """

    outer: Domain
    xi: LoopConfig

    def __post_init__(self):
        if self.xi.region is not self.outer:
            raise ValueError("xi must live on the enclosing domain")
        if not is_even(self.outer, self.xi.edges):
            raise ValueError("xi must be an even subgraph")

    @classmethod
    def from_exterior(cls, outer: Domain, inner: Domain, edges) -> BoundaryCondition:
        """Complete exterior edges to an even subgraph by adding inner edges.

        Parity is fixed along a spanning tree of the inner domain (the
        standard T-join construction); this needs an even number of odd
        vertices on the inner domain's vertex set.
        """
        mask = np.zeros(outer.n_edges, dtype=bool)
        mask[np.asarray(edges, dtype=np.int64)] = True
        inner_edges = inner_edge_mask(outer, inner)
        mask &= ~inner_edges
        deg = np.zeros(outer.n_vertices, dtype=np.int64)
        np.add.at(deg, outer.edge_v[mask].ravel(), 1)
        odd = deg % 2 == 1
        verts = np.unique(outer.edge_v[inner_edges].ravel())
        if np.any(odd & ~np.isin(np.arange(outer.n_vertices), verts)):
            raise ValueError("exterior edges are odd away from the inner domain")
        # BFS tree over inner edges, then fix parity leaves-up
        adj = {int(v): [] for v in verts}
        for e in np.flatnonzero(inner_edges):
            a, b = (int(t) for t in outer.edge_v[e])
            adj[a].append((b, e))
            adj[b].append((a, e))
        root = int(verts[0])
        order, parent = [root], {root: (-1, -1)}
        for u in order:
            for w, e in adj[u]:
                if w not in parent:
                    parent[w] = (u, e)
                    order.append(w)
        par = odd.copy()
        for u in reversed(order[1:]):
            if par[u]:
                p, e = parent[u]
                mask[e] = True
                par[u] = False
                par[p] = not par[p]
        if par[root]:
            raise ValueError("odd number of odd vertices; no compatible configuration")
        return cls(outer, LoopConfig(outer, mask))


def inner_edge_mask(outer: Region, inner: Domain) -> np.ndarray:
    mask = np.zeros(outer.n_edges, dtype=bool)
    for f in inner.faces:
        mask[outer.face_edges[outer.face_id(f)]] = True
    return mask


class LoopSpace:
    """State space, move set and bookkeeping masks for one (region, xi) pair."""

    def __init__(self, region: Region, xi: BoundaryCondition | None = None, target=None,
                 faces=None, extra_gens=None):
        # ``faces`` restricts the hexagon moves and ``extra_gens`` adds global
        # cycles; together they describe sub-domains with holes, e.g. annuli
        if xi is None:
            work = region
            self.seed = np.zeros(region.n_edges, dtype=bool)
            self.count_mask = np.ones(region.n_edges, dtype=bool)
            move_faces = [tuple(f) for f in region.faces] if faces is None else [tuple(f) for f in faces]
        else:
            if region.is_torus:
                raise ValueError("boundary conditions apply to domains only")
            work = xi.outer
            self.seed = xi.xi.edges.copy()
            self.count_mask = inner_edge_mask(work, region)
            move_faces = [tuple(f) for f in region.faces]
        self.region = work
        self.domain = region
        fids = [work.face_id(f) for f in move_faces]
        self.local_edges = work.face_edges[fids].copy()
        self.local_verts = work.face_verts[fids].copy()
        if work.is_torus:
            self.global_gens = [g.copy() for g in work.generators]
            self.enum_gens = [row for row in self.local_edges[:-1]] + self.global_gens
            self.cut_a = np.zeros(work.n_edges, dtype=bool)
            self.cut_b = np.zeros(work.n_edges, dtype=bool)
            self.cut_a[work.col_cut] = True
            self.cut_b[work.row_cut] = True
            self.ray_mask = np.zeros(work.n_edges, dtype=bool)
            self.target = None
        else:
            self.global_gens = [np.asarray(g, dtype=np.int64) for g in (extra_gens or [])]
            self.enum_gens = [row for row in self.local_edges] + self.global_gens
            self.cut_a = np.zeros(work.n_edges, dtype=bool)
            self.cut_b = np.zeros(work.n_edges, dtype=bool)
            if target is None:
                target = region.center if getattr(region, "center", None) is not None else tuple(region.faces[0])
            self.target = (int(target[0]), int(target[1]))
            self.ray_mask = np.zeros(work.n_edges, dtype=bool)
            self.ray_mask[work.ray_edges(self.target)] = True

    @property
    def n_generators(self) -> int:
        return len(self.enum_gens)

    @property
    def size(self) -> int:
        return 1 << self.n_generators

    def gen_csr(self, gens=None):
        gens = self.enum_gens if gens is None else gens
        ptr = np.zeros(len(gens) + 1, dtype=np.int64)
        for i, g in enumerate(gens):
            ptr[i + 1] = ptr[i] + len(g)
        flat = np.concatenate(gens).astype(np.int64) if gens else np.zeros(0, dtype=np.int64)
        return ptr, flat

    def state(self, i: int) -> LoopConfig:
        """Configuration number ``i`` in Gray-code enumeration order."""
        g = i ^ (i >> 1)
        on = self.seed.copy()
        j = 0
        while g:
            if g & 1:
                on[self.enum_gens[j]] ^= True
            g >>= 1
            j += 1
        return LoopConfig(self.region, on, check=False)

    def summaries(self, dmin: int = 0, cap: int = DEFAULT_CAP):
        if self.size > cap:
            raise EnumerationTooLarge(
                f"{self.size} states exceed the enumeration cap {cap}; use the MCMC sampler")
        ptr, flat = self.gen_csr()
        r = self.region
        return kernels.gray_enumerate(self.seed, ptr, flat, r.edge_v, r.vertex_edges, r.edge_fc,
                                      self.count_mask, self.ray_mask, self.cut_a, self.cut_b, int(dmin))

    def summarize(self, on, dmin: int = 0):
        r = self.region
        states = np.ascontiguousarray(np.atleast_2d(on), dtype=bool)
        return kernels.batch_summaries(states, r.edge_v, r.vertex_edges, r.edge_fc, self.count_mask,
                                       self.ray_mask, self.cut_a, self.cut_b, int(dmin))


def enumerate_configs(region: Region, xi: BoundaryCondition | None = None, cap: int = DEFAULT_CAP):
    """Yield every configuration of the state space exactly once."""
    space = LoopSpace(region, xi)
    if space.size > cap:
        raise EnumerationTooLarge(
            f"{space.size} states exceed the enumeration cap {cap}; use the MCMC sampler")
    for i in range(space.size):
        yield space.state(i)


@dataclass
class ExactDistribution:
    """Summaries of every state plus the weights ``x^|w| n^l(w)``.

    ``n_edges`` counts edges of the inner domain and ``n_loops`` the loops
    meeting it; states are in Gray-code order (see :meth:`LoopSpace.state`).
    """

    space: LoopSpace
    params: ModelParams
    n_edges: np.ndarray
    n_loops: np.ndarray
    flags: np.ndarray
    _groups: Counter = field(default=None, repr=False)

    def __len__(self):
        return len(self.n_edges)

    def probabilities(self) -> np.ndarray:
        lw = self.params.log_weight(self.n_edges.astype(np.float64), self.n_loops.astype(np.float64))
        lw -= lw.max()
        w = np.exp(lw)
        return w / w.sum()

    def groups(self) -> Counter:
        if self._groups is None:
            keys = self.n_edges.astype(np.int64) * 4096 + self.n_loops.astype(np.int64)
            u, c = np.unique(keys, return_counts=True)
            self._groups = Counter({(int(k) // 4096, int(k) % 4096): int(m) for k, m in zip(u, c)})
        return self._groups

    @property
    def Z(self):
        return sum(m * self.params.weight(a, b) for (a, b), m in sorted(self.groups().items()))

    def weight(self, i: int):
        return self.params.weight(int(self.n_edges[i]), int(self.n_loops[i]))

    def probability(self, i: int):
        return self.weight(i) / self.Z

    def exact_probabilities(self) -> list:
        Z = self.Z
        return [self.params.weight(int(a), int(b)) / Z for a, b in zip(self.n_edges, self.n_loops)]

    def event_probability(self, flag: int | np.ndarray, exact: bool = True):
        """Probability of a flag bit, or of a boolean mask over states."""
        sel = (self.flags & flag) != 0 if np.isscalar(flag) else np.asarray(flag, dtype=bool)
        if not exact:
            return float(self.probabilities()[sel].sum())
        keys = self.n_edges[sel].astype(np.int64) * 4096 + self.n_loops[sel].astype(np.int64)
        u, c = np.unique(keys, return_counts=True)
        num = sum(int(m) * self.params.weight(int(k) // 4096, int(k) % 4096) for k, m in zip(u, c))
        return num / self.Z

    def configs(self):
        for i in range(len(self)):
            yield self.space.state(i)


def exact_distribution(region: Region, params: ModelParams, xi: BoundaryCondition | None = None,
                       dmin: int = 0, target=None, cap: int = DEFAULT_CAP, space: LoopSpace | None = None
                       ) -> ExactDistribution:
    space = LoopSpace(region, xi, target=target) if space is None else space
    ne, nl, fl = space.summaries(dmin=dmin, cap=cap)
    return ExactDistribution(space, params, ne, nl, fl)


@dataclass
class Chain:
    """Recorded states of a Metropolis run."""

    space: LoopSpace
    params: ModelParams
    states: np.ndarray
    n_edges: np.ndarray
    n_loops: np.ndarray
    steps: np.ndarray
    accepted: int
    total_steps: int
    drift_corrections: int = 0

    @property
    def acceptance_rate(self) -> float:
        return self.accepted / max(self.total_steps, 1)

    def __len__(self):
        return len(self.states)

    def __iter__(self):
        for row in self.states:
            yield LoopConfig(self.space.region, row, check=False)

    def flags(self, dmin: int = 0) -> np.ndarray:
        return self.space.summarize(self.states, dmin=dmin)[2]

    def to_csv(self, path, dmin: int = 0):
        fl = self.flags(dmin)
        with open(path, "w", newline="") as fh:
            wr = csv.writer(fh)
            wr.writerow(["step", "edges", "loops", "surround_big", "surround", "noncontractible"])
            for s, a, b, f in zip(self.steps, self.n_edges, self.n_loops, fl):
                wr.writerow([int(s), int(a), int(b), int(bool(f & kernels.FLAG_SURROUND_BIG)),
                             int(bool(f & kernels.FLAG_SURROUND)), int(bool(f & kernels.FLAG_NONCONTRACTIBLE))])


def default_burn_in(space: LoopSpace) -> int:
    """Ten sweeps of ``|faces|`` flips each, per face: ``10 |F|^2`` steps."""
    F = len(space.local_edges)
    return 10 * F * F


def mcmc_chain(region: Region, params: ModelParams, xi: BoundaryCondition | None = None, seed: int = 0,
               samples: int = 1000, burn_in: int | None = None, thin: int | None = None, h: float = 0.1,
               hold: float = 0.1,
               homology_moves: bool = True, start: LoopConfig | None = None, target=None,
               space: LoopSpace | None = None) -> Chain:
    """Face-flip Metropolis chain targeting ``x^|w| n^l(w)``.

    Runs ``burn_in + samples * thin`` steps and records ``samples`` states.
    On a torus (or a space with extra global cycles), with probability ``h``
    the proposal is XOR with one of the global cycles instead of a hexagon.
    Each step first holds with probability ``hold``: at ``n = x = 1`` every
    move is accepted and without holding the chain alternates between two
    parity classes, so states thinned at an even interval would be biased.
    """
    space = LoopSpace(region, xi, target=target) if space is None else space
    r = space.region
    F = len(space.local_edges)
    burn_in = default_burn_in(space) if burn_in is None else int(burn_in)
    thin = F if thin is None else int(thin)
    if thin < 1:
        raise ValueError("thin must be >= 1")
    if not 0 <= hold < 1:
        raise ValueError("hold must be in [0, 1)")
    gl = space.global_gens if homology_moves else []
    gptr, gflat = space.gen_csr(gl)
    on = space.seed.copy() if start is None else start.edges.copy()
    mark = np.zeros(r.n_edges, dtype=np.int64)
    tag = 1
    ne = int((on & space.count_mask).sum())
    nl = int(kernels.count_loops(on, r.edge_v, r.vertex_edges, space.count_mask, mark, tag))
    total = burn_in + samples * thin
    rec = np.zeros((samples, r.n_edges), dtype=bool)
    rec_ne = np.zeros(samples, dtype=np.int64)
    rec_nl = np.zeros(samples, dtype=np.int64)
    rng = np.random.default_rng(seed)
    log_n = math.log(float(params.n))
    log_x = math.log(float(params.x))
    done = accepted = nrec = drift = 0
    while done < total:
        m = min(CHUNK, total - done)
        u_move = rng.random(m)
        u_acc = rng.random(m)
        ne, nl, acc, tag, nrec = kernels.metropolis(
            on, ne, nl, done, u_move, u_acc, space.local_edges, space.local_verts, gptr, gflat,
            float(h), float(hold), log_n, log_x, r.edge_v, r.vertex_edges, space.count_mask, mark, tag,
            burn_in, thin, rec, rec_ne, rec_nl, nrec)
        accepted += acc
        done += m
        tag += 2
        fresh = int(kernels.count_loops(on, r.edge_v, r.vertex_edges, space.count_mask, mark, tag))
        if fresh != nl:
            drift += 1
            nl = fresh
    steps = burn_in + thin * np.arange(1, samples + 1)
    return Chain(space, params, rec, rec_ne, rec_nl, steps, accepted, total, drift)


def acceptance_delta(w: LoopConfig, flip, count_mask=None) -> tuple[int, int]:
    """(change in edge count, change in loop count) of XOR with hexagon ``flip``.

    ``flip`` is a face coordinate or face id of ``w.region``.
    """
    r = w.region
    fid = flip if isinstance(flip, (int, np.integer)) else r.face_id(flip)
    cm = np.ones(r.n_edges, dtype=bool) if count_mask is None else count_mask
    mark = np.zeros(r.n_edges, dtype=np.int64)
    on = w.edges.copy()
    de, dl = kernels.flip_delta(on, r.face_edges[fid], r.face_verts[fid], r.edge_v, r.vertex_edges, cm, mark, 1)
    return int(de), int(dl)


def flip_acceptance_bound(params: ModelParams) -> float:
    """Lower bound ``min(n^3, n^-3) * min(x^6, x^-6)`` on a face-flip acceptance."""
    n, x = float(params.n), float(params.x)
    return min(n ** 3, n ** -3) * min(x ** 6, x ** -6)
