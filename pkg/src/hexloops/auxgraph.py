"""The loop-contracted graph on loops, free edges and faces, and site
percolation on it.

Vertices are numbered loops first, then edges not in the configuration, then
faces.  Two vertices are adjacent when a face borders an edge (or a loop
through that edge), or when two edges share an endpoint; self-loops and
repeated edges are dropped.
"""

from __future__ import annotations

import itertools
import math
from collections import Counter, deque
from dataclasses import dataclass, field

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import shortest_path

from .coupling import find_defect_free_circuit
from .lattice import Domain, triangular_ball
from .loops import LoopConfig
from .sampler import ModelParams

LOOP, EDGE, FACE = 0, 1, 2
KIND_NAMES = {LOOP: "loop", EDGE: "edge", FACE: "face"}


class AuxGraph:
    def __init__(self, region: Domain, w: LoopConfig):
        self.region = region
        self.config = w
        lab = w.labels
        L = w.n_loops
        free = np.flatnonzero(~w.edges)
        F = region.n_faces
        self.n_loops = L
        self.kind = np.concatenate([np.full(L, LOOP), np.full(len(free), EDGE), np.full(F, FACE)]).astype(np.int8)
        self.ref = np.concatenate([np.arange(L), free, np.arange(F)]).astype(np.int64)
        pi_edge = np.empty(region.n_edges, dtype=np.int64)
        pi_edge[w.edges] = lab[w.edges]
        pi_edge[free] = L + np.arange(len(free))
        self.pi_edge = pi_edge
        self.pi_face = L + len(free) + np.arange(F)
        pairs = set()
        for f in range(F):
            u = int(self.pi_face[f])
            for e in region.face_edges[f]:
                v = int(pi_edge[e])
                pairs.add((min(u, v), max(u, v)))
        for v in range(region.n_vertices):
            es = [int(e) for e in region.vertex_edges[v] if e >= 0]
            for a, b in itertools.combinations(es, 2):
                pa, pb = int(pi_edge[a]), int(pi_edge[b])
                if pa != pb:
                    pairs.add((min(pa, pb), max(pa, pb)))
        self.edges = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
        n = len(self.kind)
        self.adj = [[] for _ in range(n)]
        for a, b in self.edges:
            self.adj[a].append(int(b))
            self.adj[b].append(int(a))
        for lst in self.adj:
            lst.sort()
        if region.is_torus:
            self.boundary = np.zeros(0, dtype=np.int64)
        else:
            self.boundary = np.unique(pi_edge[region.boundary])
        self._dist = None

    @property
    def n_vertices(self) -> int:
        return len(self.kind)

    def degree(self) -> np.ndarray:
        return np.array([len(a) for a in self.adj], dtype=np.int64)

    def matrix(self):
        n = self.n_vertices
        data = np.ones(2 * len(self.edges))
        rows = np.concatenate([self.edges[:, 0], self.edges[:, 1]])
        cols = np.concatenate([self.edges[:, 1], self.edges[:, 0]])
        return csr_matrix((data, (rows, cols)), shape=(n, n))

    def distances(self) -> np.ndarray:
        """All-pairs graph distances (``inf`` when disconnected)."""
        if self._dist is None:
            self._dist = shortest_path(self.matrix(), unweighted=True, directed=False)
        return self._dist

    def ball(self, v: int, r: int) -> np.ndarray:
        return np.flatnonzero(self.distances()[v] <= r)

    def face_vertex(self, f) -> int:
        return int(self.pi_face[self.region.face_id(f)])

    def is_connected(self) -> bool:
        return bool(np.all(np.isfinite(self.distances()[0])))

    def loop_edge_counts(self) -> np.ndarray:
        """Number of edges of each loop (all edges lie in the domain)."""
        lab = self.config.labels
        return np.bincount(lab[lab >= 0], minlength=self.n_loops)

    def to_text(self) -> str:
        lines = ["# hexloops auxgraph v1", f"vertices {self.n_vertices}"]
        bset = set(self.boundary.tolist())
        for v in range(self.n_vertices):
            tag = KIND_NAMES[int(self.kind[v])]
            b = " boundary" if v in bset else ""
            lines.append(f"{v} {tag} {int(self.ref[v])}{b}: " + " ".join(map(str, self.adj[v])))
        return "\n".join(lines) + "\n"


def build_aux_graph(region: Domain, w: LoopConfig) -> AuxGraph:
    return AuxGraph(region, w)


# ---- association ---------------------------------------------------------

@dataclass
class Association:
    faces: dict
    witness: dict = field(default_factory=dict)

    def __getitem__(self, loop: int):
        return self.faces.get(loop, [])


def loop_adjacency(g: AuxGraph):
    """Loops bordering a common face, with the smallest such face vertex."""
    witness = {}
    for f in np.flatnonzero(g.kind == FACE):
        loops = [u for u in g.adj[f] if g.kind[u] == LOOP]
        for a, b in itertools.combinations(sorted(loops), 2):
            key = (a, b)
            if key not in witness or f < witness[key]:
                witness[key] = int(f)
    return witness


def associate(g: AuxGraph) -> Association:
    """Peel loops of smallest degree in the loop graph (ties: smallest id);
    each peeled loop keeps the witness faces of its remaining neighbours."""
    witness = loop_adjacency(g)
    nbrs = {ell: set() for ell in range(g.n_loops)}
    for a, b in witness:
        nbrs[a].add(b)
        nbrs[b].add(a)
    faces = {}
    alive = set(range(g.n_loops))
    while alive:
        ell = min(alive, key=lambda u: (len(nbrs[u]), u))
        if len(nbrs[ell]) > 5:
            raise AssertionError("loop graph has minimum degree above five; it cannot be planar")
        faces[ell] = sorted(witness[(min(ell, m), max(ell, m))] for m in nbrs[ell])
        for m in nbrs[ell]:
            nbrs[m].discard(ell)
        nbrs[ell] = set()
        alive.discard(ell)
    return Association(faces, witness)


def association_violations(g: AuxGraph, assoc: Association) -> list:
    """Every failure of the three properties, as ``(property, details)``."""
    out = []
    adjs = [set(a) for a in g.adj]
    for ell, fs in assoc.faces.items():
        for f in fs:
            if g.kind[f] != FACE:
                out.append(("P1", ell, f))
            if f not in adjs[ell]:
                out.append(("P1-neighbour", ell, f))
        if len(fs) > 5:
            out.append(("P2", ell, len(fs)))
    for a in range(g.n_loops):
        two = set()
        for u in g.adj[a]:
            two.update(v for v in g.adj[u] if g.kind[v] == LOOP and v > a)
        for b in two:
            if b in adjs[a]:
                continue
            cand = set(assoc[a]) | set(assoc[b])
            if not any(f in adjs[a] and f in adjs[b] for f in cand):
                out.append(("P3", a, b))
    return out


# ---- percolation -------------------------------------------------------

def _rng(seed):
    return seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)


def _check_params(params: ModelParams):
    n, x = float(params.n), float(params.x)
    if n < 1 or not 0 < x <= 1:
        raise ValueError("site percolation needs n >= 1 and 0 < x <= 1")
    return n, x


def _face_rule(g: AuxGraph, assoc: Association, open_):
    for f in np.flatnonzero(g.kind == FACE):
        open_[f] = any(open_[u] for u in g.adj[f] if g.kind[u] == EDGE)
    for ell, fs in assoc.faces.items():
        if open_[ell]:
            for f in fs:
                open_[f] = True
    return open_


def sample_zeta(g: AuxGraph, assoc: Association, params: ModelParams, seed=None) -> np.ndarray:
    """Loops open w.p. ``(n-1)/n``, free edges w.p. ``1-x``, faces derived."""
    n, x = _check_params(params)
    rng = _rng(seed)
    open_ = np.zeros(g.n_vertices, dtype=bool)
    u = rng.random(g.n_vertices)
    is_loop = g.kind == LOOP
    is_edge = g.kind == EDGE
    open_[is_loop] = u[is_loop] < (n - 1) / n
    open_[is_edge] = u[is_edge] < 1 - x
    return _face_rule(g, assoc, open_)


def domination_p(n, x) -> float:
    """``6 (1-x)^{1/3} + 3 ((n-1)/n)^{1/6}``."""
    return 6 * (1 - x) ** (1 / 3) + 3 * ((n - 1) / n) ** (1 / 6)


@dataclass
class DominationSample:
    zeta: np.ndarray
    bernoulli: np.ndarray
    p: float
    clamped: bool

    @property
    def violations(self) -> int:
        return int(np.sum(self.zeta & ~self.bernoulli))


def domination_coupling(g: AuxGraph, assoc: Association, params: ModelParams, seed=None) -> DominationSample:
    """Couple the site process with i.i.d. Bernoulli(min(p, 1)) sites.

    Each free edge gets three ``p_x = (1-x)^{1/3}`` variables (at itself and at
    the faces on either side; a missing face gets a dummy variable) and fires
    when all three do.  Each loop gets six ``p_n = ((n-1)/n)^{1/6}`` variables
    (itself, its associated faces, dummies) and fires when all six do.  The
    site process is the union of what fires; the Bernoulli field at a vertex
    is the OR of the variables placed there, topped up by one extra variable
    to intensity exactly ``min(p, 1)``.
    """
    n, x = _check_params(params)
    rng = _rng(seed)
    px = (1 - x) ** (1 / 3)
    pn = ((n - 1) / n) ** (1 / 6)
    p = domination_p(n, x)
    target = min(p, 1.0)
    V = g.n_vertices
    any_at = np.zeros(V, dtype=bool)
    miss = np.ones(V)  # product of (1 - p_i) of the variables placed at v
    zeta = np.zeros(V, dtype=bool)
    region = g.region
    for v in np.flatnonzero(g.kind == EDGE):
        e = int(g.ref[v])
        spots = [v] + [int(g.pi_face[f]) for f in region.edge_faces[e] if f >= 0]
        spots += [-1] * (3 - len(spots))
        fired = rng.random(3) < px
        for s, b in zip(spots, fired):
            if s >= 0:
                any_at[s] |= b
                miss[s] *= 1 - px
        if fired.all():
            zeta[[s for s in spots if s >= 0]] = True
    for ell in range(g.n_loops):
        spots = [ell] + list(assoc[ell])
        spots += [-1] * (6 - len(spots))
        fired = rng.random(6) < pn
        for s, b in zip(spots, fired):
            if s >= 0:
                any_at[s] |= b
                miss[s] *= 1 - pn
        if fired.all():
            zeta[[s for s in spots if s >= 0]] = True
    base = 1 - miss
    with np.errstate(divide="ignore", invalid="ignore"):
        q = np.where(miss > 0, 1 - (1 - target) / miss, 0.0)
    q = np.clip(q, 0.0, 1.0)
    top = rng.random(V) < q
    bern = any_at | top
    if np.any(base > target + 1e-12):
        raise AssertionError("placed variables exceed the target intensity")
    return DominationSample(zeta, bern, p, p > 1)


def connectivity(g: AuxGraph, sites, source, target) -> bool:
    """Is there an open path from an open vertex of ``source`` to one of ``target``?"""
    sites = np.asarray(sites, dtype=bool)
    tset = np.zeros(g.n_vertices, dtype=bool)
    tset[np.asarray(list(target), dtype=np.int64)] = True
    seen = np.zeros(g.n_vertices, dtype=bool)
    q = deque()
    for s in source:
        if sites[s] and not seen[s]:
            seen[s] = True
            q.append(int(s))
    while q:
        u = q.popleft()
        if tset[u]:
            return True
        for w in g.adj[u]:
            if sites[w] and not seen[w]:
                seen[w] = True
                q.append(w)
    return False


@dataclass
class PercolationBoundReport:
    trials: int
    non_connection: int
    circuit_found: int
    circuit_in_ball_R1: int
    circuit_in_ball_R: int
    implication_failures: int
    implication_failures_R1: int
    implication_failures_R: int

    @property
    def p_non_connection(self) -> float:
        return self.non_connection / self.trials

    @property
    def p_circuit(self) -> float:
        return self.circuit_found / self.trials


def percolation_precondition(g: AuxGraph, f, r: int, R: int) -> bool:
    v = g.face_vertex(f)
    if R < 2 * r + 2 or len(g.boundary) == 0:
        return False
    return bool(g.distances()[v, g.boundary].min() > R)


def percolation_bound_check(region: Domain, w: LoopConfig, params: ModelParams, f=(0, 0), r: int = 0,
                            R: int | None = None, trials: int = 1000, seed=None) -> PercolationBoundReport:
    """Couple site percolation with the coloured triple and test, per sample,
    that non-connection forces a defect-free circuit around the ``r``-ball.

    Circuits are searched anywhere in the domain (the asserted implication),
    and also restricted to edges projecting into the graph balls of radius
    ``R + 1`` and ``R`` around the face (reported).
    """
    R = 2 * r + 2 if R is None else R
    g = build_aux_graph(region, w)
    if not percolation_precondition(g, f, r, R):
        raise ValueError("need dist(face, boundary) > R >= 2r + 2")
    assoc = associate(g)
    rng = _rng(seed)
    v = g.face_vertex(f)
    dist = g.distances()[v]
    inner = np.flatnonzero(dist <= 2 * r + 2)
    outside = np.flatnonzero(dist > R)
    protect = triangular_ball(f, r)
    in_R1 = dist[g.pi_edge] <= R + 1
    in_R = dist[g.pi_edge] <= R
    lab = w.labels
    counts = dict(nc=0, found=0, r1=0, r0=0, fail=0, fail1=0, fail0=0)
    for _ in range(trials):
        z = sample_zeta(g, assoc, params, rng)
        blue = np.zeros(region.n_edges, dtype=bool)
        on = w.edges
        blue[on] = z[lab[on]]
        eta = np.zeros(region.n_edges, dtype=bool)
        eta[~on] = z[g.pi_edge[~on]]
        blocked = blue | eta
        nc = not connectivity(g, z, inner, outside)
        c_any = find_defect_free_circuit(region, blocked, protect) is not None
        c_r1 = find_defect_free_circuit(region, blocked | ~in_R1, protect) is not None
        c_r0 = find_defect_free_circuit(region, blocked | ~in_R, protect) is not None
        counts["found"] += c_any
        counts["r1"] += c_r1
        counts["r0"] += c_r0
        if nc:
            counts["nc"] += 1
            counts["fail"] += not c_any
            counts["fail1"] += not c_r1
            counts["fail0"] += not c_r0
    return PercolationBoundReport(trials, counts["nc"], counts["found"], counts["r1"], counts["r0"],
                                  counts["fail"], counts["fail1"], counts["fail0"])


def dependency_sets(g: AuxGraph, assoc: Association) -> list:
    """For each vertex, the loop/edge vertices whose coin decides its state."""
    deps = []
    owners = {}
    for ell, fs in assoc.faces.items():
        for f in fs:
            owners.setdefault(f, set()).add(ell)
    for v in range(g.n_vertices):
        if g.kind[v] != FACE:
            deps.append({v})
        else:
            s = {u for u in g.adj[v] if g.kind[u] == EDGE}
            s |= owners.get(v, set())
            deps.append(s)
    return deps


# ---- diagnostics -----------------------------------------------------------

@dataclass
class DegreeReport:
    histogram: dict
    truncated: dict
    loop_bound_ok: bool
    other_bound_ok: bool
    n_vertices: int


def degree_diagnostics(graphs, rs=range(1, 13)) -> DegreeReport:
    """Degree histogram, ``sum_v deg(v) 1{deg(v) >= r} / |V|`` per ``r``, and
    the bounds ``deg(loop) <= 4 * #edges`` and ``deg <= 6`` otherwise."""
    if isinstance(graphs, AuxGraph):
        graphs = [graphs]
    hist = Counter()
    trunc = {r: 0.0 for r in rs}
    loop_ok = other_ok = True
    total = 0
    for g in graphs:
        deg = g.degree()
        hist.update(deg.tolist())
        total += len(deg)
        for r in rs:
            trunc[r] += float(deg[deg >= r].sum())
        lens = g.loop_edge_counts()
        if g.n_loops and np.any(deg[: g.n_loops] > 4 * lens):
            loop_ok = False
        if np.any(deg[g.n_loops:] > 6):
            other_ok = False
    trunc = {r: v / max(total, 1) for r, v in trunc.items()}
    return DegreeReport(dict(sorted(hist.items())), trunc, loop_ok, other_ok, total)


def _wl_colours(n, adj, root, rounds=None):
    col = [1 if v == root else 0 for v in range(n)]
    for _ in range(rounds or n):
        sig = [(col[v], tuple(sorted(col[u] for u in adj[v]))) for v in range(n)]
        table = {s: i for i, s in enumerate(sorted(set(sig)))}
        new = [table[s] for s in sig]
        if len(set(new)) == len(set(col)):
            col = new
            break
        col = new
    return col


def canonical_form(n: int, edges, root: int, limit: int = 50000):
    """Canonical form of a rooted graph on vertices ``0..n-1``.

    Colour refinement fixes an ordering of colour classes; within classes all
    orderings are tried when there are at most ``limit`` of them and the
    lexicographically smallest adjacency matrix is kept.  Larger cases fall
    back to the refined colour multiset (an invariant, not a certificate).
    """
    adj = [[] for _ in range(n)]
    for a, b in edges:
        adj[a].append(b)
        adj[b].append(a)
    col = _wl_colours(n, adj, root)
    classes = {}
    for v, c in enumerate(col):
        classes.setdefault(c, []).append(v)
    keys = sorted(classes)
    count = 1
    for k in keys:
        count *= math.factorial(len(classes[k]))
    eset = {(min(a, b), max(a, b)) for a, b in edges}
    if n <= 12 and count <= limit:
        best = None
        for perms in itertools.product(*(itertools.permutations(classes[k]) for k in keys)):
            order = [v for p in perms for v in p]
            pos = {v: i for i, v in enumerate(order)}
            code = tuple(sorted((min(pos[a], pos[b]), max(pos[a], pos[b])) for a, b in eset))
            if best is None or code < best:
                best = code
        return ("exact", n, tuple(len(classes[k]) for k in keys), best)
    sig = tuple(sorted(Counter(col).items()))
    return ("wl", n, len(eset), sig)


def rooted_ball_census(g: AuxGraph, radius: int) -> Counter:
    """Frequencies of the canonical forms of all rooted ``radius``-balls."""
    if not 0 <= radius <= 4:
        raise ValueError("radius must be between 0 and 4")
    D = g.distances()
    out = Counter()
    for v in range(g.n_vertices):
        verts = np.flatnonzero(D[v] <= radius)
        idx = {int(u): i for i, u in enumerate(verts)}
        es = [(idx[int(a)], idx[int(b)]) for a, b in g.edges if int(a) in idx and int(b) in idx]
        out[canonical_form(len(verts), es, idx[v])] += 1
    return out


def census_frequencies(census: Counter) -> dict:
    total = sum(census.values())
    return {k: c / total for k, c in census.items()}
