"""Loop configurations: even subgraphs, their loops, XOR, spins and domain walls."""

from __future__ import annotations

from collections import deque
from functools import cached_property

import numpy as np

from . import kernels
from .lattice import Region, region_from_text


class OddDegreeError(ValueError):
    """An edge set that should be even has a vertex of odd degree."""


class NoSpinRepresentation(ValueError):
    """No spin configuration has the given edge set as its domain walls."""


def same_region(a: Region, b: Region) -> bool:
    return a is b or (type(a) is type(b) and a.n_edges == b.n_edges and np.array_equal(a.faces, b.faces))


def _as_mask(region: Region, edges) -> np.ndarray:
    if isinstance(edges, LoopConfig):
        return edges.edges.copy()
    arr = np.asarray(edges)
    if arr.dtype == bool and arr.shape == (region.n_edges,):
        return arr.copy()
    mask = np.zeros(region.n_edges, dtype=bool)
    if arr.size:
        mask[arr.astype(np.int64)] = True
    return mask


def vertex_degrees(region: Region, mask: np.ndarray) -> np.ndarray:
    deg = np.zeros(region.n_vertices, dtype=np.int64)
    np.add.at(deg, region.edge_v[mask].ravel(), 1)
    return deg


def is_even(region: Region, mask) -> bool:
    return not np.any(vertex_degrees(region, _as_mask(region, mask)) % 2)


class LoopConfig:
    """An even subgraph of a region, stored as a boolean mask over edge ids."""

    __slots__ = ("region", "edges", "__dict__")

    def __init__(self, region: Region, edges=None, check=True):
        self.region = region
        self.edges = np.zeros(region.n_edges, dtype=bool) if edges is None else _as_mask(region, edges)
        if check and not is_even(region, self.edges):
            raise OddDegreeError("edge set has a vertex of odd degree")

    @classmethod
    def empty(cls, region):
        return cls(region)

    @classmethod
    def hexagon(cls, region, f):
        return cls(region, region.hexagon_mask(f), check=False)

    # ---- basic quantities --------------------------------------------
    @property
    def n_edges(self) -> int:
        return int(self.edges.sum())

    def count_edges(self, mask=None) -> int:
        if mask is None:
            return self.n_edges
        return int((self.edges & mask).sum())

    @cached_property
    def labels(self) -> np.ndarray:
        lab = np.empty(self.region.n_edges, dtype=np.int64)
        self._nloops = kernels.trace_labels(self.edges, self.region.edge_v, self.region.vertex_edges, lab)
        return lab

    @property
    def n_loops(self) -> int:
        self.labels
        return int(self._nloops)

    def loops(self) -> list[Loop]:
        return decompose(self)

    def xor(self, other) -> LoopConfig:
        return xor(self, other)

    def edge_ids(self) -> np.ndarray:
        return np.flatnonzero(self.edges)

    def copy(self) -> LoopConfig:
        return LoopConfig(self.region, self.edges, check=False)

    def __eq__(self, other):
        return isinstance(other, LoopConfig) and same_region(self.region, other.region) and np.array_equal(self.edges, other.edges)

    def __hash__(self):
        return hash(self.edges.tobytes())

    def __repr__(self):
        return f"LoopConfig({self.region.describe()}, |w|={self.n_edges}, loops={self.n_loops})"

    # ---- serialization -----------------------------------------------
    def to_hex(self) -> str:
        return np.packbits(self.edges, bitorder="little").tobytes().hex()

    @classmethod
    def from_hex(cls, region, text: str) -> LoopConfig:
        raw = np.frombuffer(bytes.fromhex(text), dtype=np.uint8)
        bits = np.unpackbits(raw, bitorder="little")[: region.n_edges].astype(bool)
        if len(bits) != region.n_edges:
            raise ValueError("bitmap shorter than the region's edge count")
        return cls(region, bits)

    def to_text(self) -> str:
        return "# hexloops loopconfig v1\n" + self.region.to_text() + f"edges {self.to_hex()}\n"

    @classmethod
    def from_text(cls, text: str) -> LoopConfig:
        lines = text.splitlines()
        if not lines or not lines[0].startswith("# hexloops loopconfig v1"):
            raise ValueError("not a v1 loop configuration")
        body = [ln for ln in lines[1:] if not ln.startswith("edges ")]
        hexline = [ln for ln in lines if ln.startswith("edges ")]
        if not hexline:
            raise ValueError("missing edge bitmap")
        region = region_from_text("\n".join(body))
        return cls.from_hex(region, hexline[0].split(None, 1)[1].strip() if len(hexline[0].split()) > 1 else "")


class Loop:
    """One simple cycle of a configuration."""

    def __init__(self, region: Region, edges: np.ndarray, vertices: np.ndarray):
        self.region = region
        self.edges = edges
        self.vertices = vertices

    @property
    def length(self) -> int:
        return len(self.edges)

    @cached_property
    def mask(self) -> np.ndarray:
        m = np.zeros(self.region.n_edges, dtype=bool)
        m[self.edges] = True
        return m

    @cached_property
    def faces(self) -> set:
        """Coordinates of all faces bordering an edge of the loop."""
        fc = self.region.edge_fc[self.edges].reshape(-1, 2)
        return {(int(a), int(b)) for a, b in fc}

    @cached_property
    def diameter(self) -> int:
        return diameter(self)

    @cached_property
    def homology(self):
        return homology_class(self)

    def as_config(self) -> LoopConfig:
        return LoopConfig(self.region, self.mask, check=False)

    def __repr__(self):
        return f"Loop(length={self.length}, first_edge={int(self.edges.min())})"


def xor(a: LoopConfig, b) -> LoopConfig:
    """Symmetric difference; ``b`` must itself be even."""
    mask = _as_mask(a.region, b)
    if not is_even(a.region, mask):
        raise OddDegreeError("xor operand has a vertex of odd degree")
    return LoopConfig(a.region, a.edges ^ mask, check=False)


def decompose(w: LoopConfig) -> list[Loop]:
    """Loops of ``w`` ordered by their minimal edge id, each traced from it."""
    region = w.region
    labels = w.labels
    out = []
    for i in range(w.n_loops):
        ids = np.flatnonzero(labels == i)
        e0 = int(ids[0])
        seq_e = [e0]
        seq_v = [int(region.edge_v[e0, 0])]
        v = int(region.edge_v[e0, 1])
        prev = e0
        while v != seq_v[0]:
            seq_v.append(v)
            nxt = [int(c) for c in region.vertex_edges[v] if c >= 0 and c != prev and w.edges[c]][0]
            seq_e.append(nxt)
            a, b = region.edge_v[nxt]
            v = int(b if a == v else a)
            prev = nxt
        out.append(Loop(region, np.array(seq_e, dtype=np.int64), np.array(seq_v, dtype=np.int64)))
    return out


def surrounds(loop: Loop, f) -> bool:
    """Whether face ``f`` lies in the bounded component of the loop's complement.

    Dual BFS from ``f`` that may not cross the loop; the face is surrounded iff
    no face outside the domain is reached.
    """
    region = loop.region
    if region.is_torus:
        raise ValueError("surrounds is undefined on a torus")
    start = region.face_id(f)
    n_in = region.n_faces
    adj = _dual_adjacency(region)
    blocked = loop.mask
    seen = np.zeros(region.n_dual, dtype=bool)
    seen[start] = True
    q = deque([start])
    while q:
        u = q.popleft()
        for w, e in adj[u]:
            if blocked[e] or seen[w]:
                continue
            if w >= n_in:
                return False
            seen[w] = True
            q.append(w)
    return True


def _dual_adjacency(region: Region):
    cache = region.__dict__.get("_dual_adj")
    if cache is None:
        nd = region.n_dual if not region.is_torus else region.n_faces
        cache = [[] for _ in range(nd)]
        for e, (a, b) in enumerate(region.edge_dual):
            cache[a].append((int(b), e))
            cache[b].append((int(a), e))
        region.__dict__["_dual_adj"] = cache
    return cache


def dual_adjacency(region: Region):
    """``adj[u]`` lists ``(neighbour, edge id)`` pairs of the dual graph."""
    return _dual_adjacency(region)


def diameter(loop: Loop) -> int:
    """Largest face distance between two faces bordering the loop."""
    fc = loop.region.edge_fc[loop.edges].reshape(-1, 2)
    k, l = fc[:, 0], fc[:, 1]
    s = k + l
    return int(max(k.max() - k.min(), l.max() - l.min(), s.max() - s.min()))


def homology_class(loop: Loop) -> tuple[int, int]:
    """Signed crossing numbers of the two torus cut-lines.

    The sign is normalised so that the first nonzero entry is positive (a loop
    has no preferred orientation).
    """
    region = loop.region
    if not region.is_torus:
        raise ValueError("homology classes are defined on tori only")
    counts = [0, 0]
    cuts = (
        (dict(zip(region.col_cut.tolist(), region.col_cut_plus.tolist())), 0),
        (dict(zip(region.row_cut.tolist(), region.row_cut_plus.tolist())), 1),
    )
    V = loop.vertices
    for i, e in enumerate(loop.edges.tolist()):
        b = V[(i + 1) % len(V)]
        for table, idx in cuts:
            plus = table.get(e)
            if plus is not None:
                counts[idx] += 1 if b == plus else -1
    if counts[0] < 0 or (counts[0] == 0 and counts[1] < 0):
        counts = [-counts[0], -counts[1]]
    return counts[0], counts[1]


def is_noncontractible(loop: Loop) -> bool:
    return homology_class(loop) != (0, 0)


# ---- spins and domain walls --------------------------------------------

class SpinConfig:
    """Spins on the dual vertices of a region.

    On a domain the dual vertices are the domain's faces followed by its outer
    faces (those bordering a boundary edge); on a torus they are the faces.
    """

    def __init__(self, region: Region, values):
        vals = np.asarray(values, dtype=np.int8)
        n = region.n_faces if region.is_torus else region.n_dual
        if vals.shape != (n,):
            raise ValueError(f"expected {n} spins, got shape {vals.shape}")
        if not np.all((vals == 1) | (vals == -1)):
            raise ValueError("spins must be +1 or -1")
        self.region = region
        self.values = vals

    @classmethod
    def from_mapping(cls, region, mapping: dict, default=None):
        coords = _dual_coords(region)
        vals = []
        for c in coords:
            v = mapping.get(c, default)
            if v is None:
                raise ValueError(f"missing spin at face {c}")
            vals.append(v)
        return cls(region, vals)

    def at(self, f) -> int:
        idx = self.region.face_id(f) if self.region.is_torus else self.region.dual_index[(int(f[0]), int(f[1]))]
        return int(self.values[idx])

    def __neg__(self):
        return SpinConfig(self.region, -self.values)

    def __eq__(self, other):
        return isinstance(other, SpinConfig) and same_region(self.region, other.region) and np.array_equal(self.values, other.values)

    def __hash__(self):
        return hash(self.values.tobytes())

    def to_csv(self) -> str:
        rows = ["k,l,spin"]
        for (k, l), s in zip(_dual_coords(self.region), self.values):
            rows.append(f"{k},{l},{int(s)}")
        return "\n".join(rows) + "\n"


def _dual_coords(region):
    if region.is_torus:
        return [tuple(int(c) for c in f) for f in region.faces]
    coords = [tuple(int(c) for c in f) for f in region.faces]
    coords += [tuple(int(c) for c in f) for f in region.outer_faces]
    return coords


def domain_walls(sigma: SpinConfig) -> LoopConfig:
    """Edges separating faces of different spin."""
    ed = sigma.region.edge_dual
    v = sigma.values
    return LoopConfig(sigma.region, v[ed[:, 0]] != v[ed[:, 1]], check=False)


def spin_rep(w: LoopConfig, anchor_spin: int = 1, anchor=None) -> SpinConfig:
    """A spin configuration whose domain walls are ``w``.

    On a domain every outer face gets ``anchor_spin`` unless ``anchor`` names a
    face.  On a torus ``anchor`` defaults to the first face; a loop with odd
    crossing parity makes the assignment inconsistent and raises
    :class:`NoSpinRepresentation`.
    """
    region = w.region
    if anchor_spin not in (1, -1):
        raise ValueError("anchor_spin must be +1 or -1")
    adj = _dual_adjacency(region)
    n = len(adj)
    vals = np.zeros(n, dtype=np.int8)
    if anchor is None:
        starts = [0] if region.is_torus else list(range(region.n_faces, n))
    else:
        starts = [region.face_id(anchor) if region.is_torus else region.dual_index[(int(anchor[0]), int(anchor[1]))]]
    q = deque()
    for s in starts:
        vals[s] = anchor_spin
        q.append(s)
    # outer faces are not joined by domain edges; seed them together, then flood
    while True:
        while q:
            u = q.popleft()
            for nb, e in adj[u]:
                want = -vals[u] if w.edges[e] else vals[u]
                if vals[nb] == 0:
                    vals[nb] = want
                    q.append(nb)
                elif vals[nb] != want:
                    raise NoSpinRepresentation("domain walls are inconsistent (non-contractible loop)")
        rest = np.flatnonzero(vals == 0)
        if len(rest) == 0:
            break
        vals[rest[0]] = anchor_spin
        q.append(int(rest[0]))
    if region.is_torus and has_noncontractible(w):
        raise NoSpinRepresentation("configuration has a non-contractible loop")
    return SpinConfig(region, vals)


def has_noncontractible(w: LoopConfig) -> bool:
    """Whether some loop of a torus configuration is non-contractible.

    A simple loop has a primitive homology class, so it is non-contractible
    exactly when it crosses one of the cut-lines an odd number of times.
    """
    region = w.region
    if not region.is_torus:
        return False
    lab = w.labels
    for i in range(w.n_loops):
        on = lab == i
        if on[region.col_cut].sum() % 2 or on[region.row_cut].sum() % 2:
            return True
    return False
