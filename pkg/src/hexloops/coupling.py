"""Red/blue loop colouring, defect edges, and defect-free circuits.

A coherent triple ``(red, blue, eta)`` splits a configuration into red loops
and blue (defect) loops and adds defect edges off the configuration.  Its
weight is ``(n-1)^{#blue loops} (1/x - 1)^{|eta|}``; summing over colourings
and defect edges gives back ``x^|w| n^l(w)`` up to a global constant.
"""

from __future__ import annotations

import itertools
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from math import comb

import numpy as np

from .lattice import Domain, Region, TorusLattice
from .loops import LoopConfig, dual_adjacency, is_even
from .sampler import LoopSpace, ModelParams


def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


@dataclass
class ColoredConfig:
    red: LoopConfig
    blue: LoopConfig

    def __post_init__(self):
        if np.any(self.red.edges & self.blue.edges):
            raise ValueError("red and blue loops overlap")

    @property
    def union(self) -> LoopConfig:
        return LoopConfig(self.red.region, self.red.edges | self.blue.edges, check=False)


@dataclass
class CoherentTriple:
    red: LoopConfig
    blue: LoopConfig
    eta: np.ndarray

    def __post_init__(self):
        self.eta = np.asarray(self.eta, dtype=bool)
        if np.any(self.red.edges & self.blue.edges):
            raise ValueError("red and blue loops overlap")
        if np.any(self.eta & (self.red.edges | self.blue.edges)):
            raise ValueError("defect edges meet the loops")

    @property
    def union(self) -> LoopConfig:
        return LoopConfig(self.red.region, self.red.edges | self.blue.edges, check=False)

    @property
    def blocked(self) -> np.ndarray:
        return self.blue.edges | self.eta

    def to_text(self) -> str:
        return "\n".join([
            "# hexloops triple v1",
            f"red {self.red.to_hex()}",
            f"blue {self.blue.to_hex()}",
            f"eta {np.packbits(self.eta, bitorder='little').tobytes().hex()}",
        ]) + "\n"


@dataclass
class Circuit:
    """A simple cycle together with the faces it encloses."""

    region: Region
    edges: np.ndarray
    inside: np.ndarray

    def as_config(self) -> LoopConfig:
        return LoopConfig(self.region, self.edges, check=False)

    @property
    def length(self) -> int:
        return int(self.edges.sum())


def _loop_colouring(w: LoopConfig, blue_bits, count_mask=None):
    lab = w.labels
    red = w.edges.copy()
    blue = np.zeros_like(red)
    for i, b in enumerate(blue_bits):
        if b:
            sel = lab == i
            blue |= sel
            red &= ~sel
    return ColoredConfig(LoopConfig(w.region, red, check=False), LoopConfig(w.region, blue, check=False))


def counted_loops(w: LoopConfig, count_mask=None) -> np.ndarray:
    """Boolean per loop label: does the loop meet ``count_mask``."""
    if count_mask is None:
        return np.ones(w.n_loops, dtype=bool)
    out = np.zeros(w.n_loops, dtype=bool)
    lab = w.labels
    hit = lab[(lab >= 0) & count_mask]
    out[np.unique(hit)] = True
    return out


def color_loops(w: LoopConfig, n, seed=None, count_mask=None) -> ColoredConfig:
    """Each loop meeting the domain is blue with probability ``(n-1)/n``."""
    if n < 1:
        raise ValueError("colouring needs n >= 1")
    rng = _rng(seed)
    eligible = counted_loops(w, count_mask)
    u = rng.random(w.n_loops)
    p = (float(n) - 1.0) / float(n)
    return _loop_colouring(w, eligible & (u < p))


def sample_eta(w: LoopConfig, x, seed=None, edge_mask=None) -> np.ndarray:
    """Independent ``(1-x)``-percolation on the edges not in ``w``."""
    if not 0 < x <= 1:
        raise ValueError("defect edges need 0 < x <= 1")
    rng = _rng(seed)
    free = ~w.edges
    if edge_mask is not None:
        free &= edge_mask
    return free & (rng.random(len(free)) < 1.0 - float(x))


def triple_weight(t: CoherentTriple, params: ModelParams, count_mask=None):
    """``(n-1)^{#blue loops} (1/x - 1)^{|eta|}`` with ``0^0 = 1``."""
    nb = int(counted_loops(t.blue, count_mask).sum())
    return (params.n - 1) ** nb * (1 / params.x - 1) ** int(t.eta.sum())


@dataclass
class MarginalReport:
    max_rel_error: object
    constant: object
    n_configs: int
    exact: bool

    @property
    def ok(self) -> bool:
        return self.max_rel_error == 0 if self.exact else self.max_rel_error < 1e-10


def _eta_sum(q, m: int, exhaustive_limit: int):
    """Sum over subsets of ``m`` free edges of ``q^{|eta|}``.

    Enumerates every subset when ``m`` is small, else groups subsets by size.
    """
    if m <= exhaustive_limit:
        total = 0
        for bits in itertools.product((0, 1), repeat=m):
            total += q ** sum(bits)
        return total
    return sum(comb(m, j) * q ** j for j in range(m + 1))


def marginal_check(region: Region, params: ModelParams, xi=None, eta_exhaustive_limit: int = 12,
                   cap: int = 1 << 12) -> MarginalReport:
    """Sum triple weights over colourings and defect edges, per configuration.

    The sums must be proportional to ``x^|w| n^l(w)``; the report gives the
    largest relative deviation from the common ratio.
    """
    space = LoopSpace(region, xi)
    if space.size > cap:
        raise ValueError("state space too large for an exhaustive triple sum")
    cm = space.count_mask
    q = 1 / params.x - 1
    ratios = []
    for i in range(space.size):
        w = space.state(i)
        counted = counted_loops(w, cm)
        idx = np.flatnonzero(counted)
        m = int((cm & ~w.edges).sum())
        eta_total = _eta_sum(q, m, eta_exhaustive_limit)
        col_total = 0
        for bits in itertools.product((0, 1), repeat=len(idx)):
            col_total += (params.n - 1) ** sum(bits)
        total = col_total * eta_total
        target = params.weight(w.count_edges(cm), int(counted.sum()))
        ratios.append(total / target)
    c0 = ratios[0]
    exact = params.exact
    if exact:
        err = max(abs(r / c0 - 1) for r in ratios)
    else:
        err = max(abs(float(r) / float(c0) - 1.0) for r in ratios)
    return MarginalReport(err, c0, len(ratios), exact)


# ---- circuits -----------------------------------------------------------

def _bfs(adj, starts, can_cross, n, avoid=None):
    seen = np.zeros(n, dtype=bool)
    q = deque()
    for s in starts:
        if not seen[s]:
            seen[s] = True
            q.append(s)
    while q:
        u = q.popleft()
        for w, e in adj[u]:
            if seen[w] or not can_cross[e]:
                continue
            if avoid is not None and avoid[w]:
                continue
            seen[w] = True
            q.append(w)
    return seen


def _fill_and_trace(region: Domain, core: np.ndarray) -> Circuit:
    adj = dual_adjacency(region)
    nd = region.n_dual
    everything = np.ones(region.n_edges, dtype=bool)
    outside = _bfs(adj, range(region.n_faces, nd), everything, nd, avoid=core)
    filled = ~outside
    ed = region.edge_dual
    edges = filled[ed[:, 0]] != filled[ed[:, 1]]
    return Circuit(region, edges, np.flatnonzero(filled[: region.n_faces]))


def find_defect_free_circuit(region: Domain, blocked, protect, search_region=None, mode: str = "inner"):
    """A simple circuit avoiding ``blocked`` that surrounds every face of ``protect``.

    The circuit uses only edges bordering a face of ``search_region`` (default:
    the whole domain).  ``mode="inner"`` returns the innermost such circuit,
    the boundary of the region reachable from ``protect`` by crossing blocked
    edges; ``mode="outer"`` returns the outermost, the boundary of what cannot
    be reached from outside the domain.  Returns ``None`` if no circuit exists.
    """
    if region.is_torus:
        raise ValueError("circuits around faces need a planar domain")
    blocked = np.asarray(blocked, dtype=bool)
    adj = dual_adjacency(region)
    nd = region.n_dual
    crossable = blocked.copy()
    if search_region is not None:
        ins = np.zeros(nd, dtype=bool)
        for f in search_region:
            key = (int(f[0]), int(f[1]))
            if key in region.face_index:
                ins[region.face_index[key]] = True
        ed = region.edge_dual
        crossable |= ~(ins[ed[:, 0]] | ins[ed[:, 1]])
    starts = [region.face_id(f) for f in protect]
    if mode == "inner":
        reached = _bfs(adj, starts, crossable, nd)
        if reached[region.n_faces:].any():
            return None
        return _fill_and_trace(region, reached)
    if mode == "outer":
        from_out = _bfs(adj, range(region.n_faces, nd), crossable, nd)
        if from_out[starts].any():
            return None
        everything = np.ones(region.n_edges, dtype=bool)
        comp = _bfs(adj, starts[:1], everything, nd, avoid=from_out)
        if not comp[starts].all():
            return None
        return _fill_and_trace(region, comp)
    raise ValueError("mode must be 'inner' or 'outer'")


def xor_resample(t: CoherentTriple, circuit) -> CoherentTriple:
    """Replace the red loops by their XOR with a defect-free circuit."""
    mask = circuit.edges if isinstance(circuit, Circuit) else np.asarray(circuit, dtype=bool)
    if np.any(mask & t.blocked):
        raise ValueError("circuit meets a blue loop or a defect edge")
    if not is_even(t.red.region, mask):
        raise ValueError("circuit is not an even subgraph")
    red = LoopConfig(t.red.region, t.red.edges ^ mask, check=False)
    return CoherentTriple(red, t.blue, t.eta.copy())


# ---- torus statements ---------------------------------------------------

@dataclass
class MonotonicityReport:
    red: object
    blue: object
    holds: bool


def _edge_int(mask) -> int:
    return int.from_bytes(np.packbits(mask, bitorder="little").tobytes(), "little")


def certify_increasing(configs, values) -> bool:
    """Exhaustive check that ``values`` is increasing under edge inclusion."""
    ints = [_edge_int(c.edges) for c in configs]
    for a, va in zip(ints, values):
        if not va:
            continue
        for b, vb in zip(ints, values):
            if not vb and a & ~b == 0:
                return False
    return True


def monotonicity_check(region: TorusLattice, n, event, cap: int = 1 << 12) -> MonotonicityReport:
    """Exact ``rho[red in A] >= rho[blue in A]`` for an increasing event ``A``."""
    n = Fraction(n) if isinstance(n, (int, float)) else n
    if not 1 <= n <= 2:
        raise ValueError("the colouring comparison is stated for 1 <= n <= 2")
    space = LoopSpace(region)
    if space.size > cap:
        raise ValueError("state space too large")
    configs = [space.state(i) for i in range(space.size)]
    values = [bool(event(c)) for c in configs]
    if not certify_increasing(configs, values):
        raise ValueError("event is not increasing")
    lookup = {_edge_int(c.edges): v for c, v in zip(configs, values)}
    Z = red = blue = 0
    for w in configs:
        L = w.n_loops
        for bits in itertools.product((0, 1), repeat=L):
            col = _loop_colouring(w, bits)
            wt = (n - 1) ** sum(bits)
            Z += wt
            if lookup[_edge_int(col.red.edges)]:
                red += wt
            if lookup[_edge_int(col.blue.edges)]:
                blue += wt
    return MonotonicityReport(red / Z, blue / Z, red / Z >= blue / Z)


def find_noncontractible_cycle(region: TorusLattice, allowed) -> np.ndarray | None:
    """A simple non-contractible cycle using only ``allowed`` edges, or ``None``.

    Spanning-forest search carrying the cut-line crossing parities: a non-tree
    edge closing a cycle of nonzero parity gives a fundamental cycle that is
    simple and non-contractible.
    """
    allowed = np.asarray(allowed, dtype=bool)
    V = region.n_vertices
    cut = np.zeros(region.n_edges, dtype=np.int64)
    cut[region.col_cut] |= 1
    cut[region.row_cut] |= 2
    pot = -np.ones(V, dtype=np.int64)
    parent_e = -np.ones(V, dtype=np.int64)
    depth = np.zeros(V, dtype=np.int64)
    ev = region.edge_v
    for root in range(V):
        if pot[root] >= 0:
            continue
        pot[root] = 0
        q = deque([root])
        while q:
            u = q.popleft()
            for e in region.vertex_edges[u]:
                if e < 0 or not allowed[e] or e == parent_e[u]:
                    continue
                w = int(ev[e, 1] if ev[e, 0] == u else ev[e, 0])
                if pot[w] < 0:
                    pot[w] = pot[u] ^ cut[e]
                    parent_e[w] = e
                    depth[w] = depth[u] + 1
                    q.append(w)
                elif pot[u] ^ pot[w] ^ cut[e]:
                    return _fundamental_cycle(region, e, u, w, parent_e, depth)
    return None


def _fundamental_cycle(region, e, a, b, parent_e, depth):
    mask = np.zeros(region.n_edges, dtype=bool)
    mask[e] = True
    ev = region.edge_v

    def up(v):
        pe = parent_e[v]
        mask[pe] ^= True
        return int(ev[pe, 1] if ev[pe, 0] == v else ev[pe, 0])

    while depth[a] > depth[b]:
        a = up(a)
    while depth[b] > depth[a]:
        b = up(b)
    while a != b:
        a = up(a)
        b = up(b)
    return mask


@dataclass
class DualityWitness:
    kind: str
    edges: np.ndarray


def torus_duality_check(colored: ColoredConfig) -> DualityWitness | None:
    """A blue-free or red-free non-contractible circuit, if one exists."""
    region = colored.red.region
    if not region.is_torus:
        raise ValueError("torus only")
    c = find_noncontractible_cycle(region, ~colored.blue.edges)
    if c is not None:
        return DualityWitness("blue-free", c)
    c = find_noncontractible_cycle(region, ~colored.red.edges)
    if c is not None:
        return DualityWitness("red-free", c)
    return None


def all_colorings(w: LoopConfig):
    for bits in itertools.product((0, 1), repeat=w.n_loops):
        yield _loop_colouring(w, bits)
