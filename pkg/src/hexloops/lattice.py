"""Hexagonal-lattice geometry: domains, balls, tori and the dual triangular lattice.

Faces of the hexagonal lattice are the vertices of the triangular lattice and
are addressed by integer pairs ``(k, l)`` (centre ``k + l*exp(i*pi/3)``).  A
hexagonal vertex is a triangle of three mutually adjacent faces; it is keyed as
``(a, b, 0)`` for the "up" triangle ``{(a,b), (a+1,b), (a,b+1)}`` and
``(a, b, 1)`` for the "down" triangle ``{(a+1,b), (a,b+1), (a+1,b+1)}``.

Every region gets dense integer ids for faces, edges and vertices, fixed at
construction, so configurations are flat boolean arrays over edge ids.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

# Counter-clockwise neighbour offsets on the triangular lattice.
DIRECTIONS = ((1, 0), (0, 1), (-1, 1), (-1, 0), (0, -1), (1, -1))


def face_distance(f, g) -> int:
    """Graph distance between two faces on the infinite triangular lattice."""
    dk = int(g[0]) - int(f[0])
    dl = int(g[1]) - int(f[1])
    return max(abs(dk), abs(dl), abs(dk + dl))


def triangular_ball(center, r: int) -> list[tuple[int, int]]:
    """Faces within distance ``r`` of ``center``, sorted."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    k0, l0 = int(center[0]), int(center[1])
    out = []
    for dk in range(-r, r + 1):
        for dl in range(-r, r + 1):
            if abs(dk + dl) <= r:
                out.append((k0 + dk, l0 + dl))
    return sorted(out)


def triangle_key(a, b, c) -> tuple[int, int, int]:
    """Key of the hexagonal vertex where faces ``a``, ``b``, ``c`` meet."""
    tri = sorted((a, b, c), key=lambda p: (p[0] + p[1], p))
    s0 = tri[0][0] + tri[0][1]
    s1 = tri[1][0] + tri[1][1]
    if s0 < s1:
        return (tri[0][0], tri[0][1], 0)
    return (tri[2][0] - 1, tri[2][1] - 1, 1)


def triangle_faces(key) -> tuple[tuple[int, int], ...]:
    a, b, t = key
    if t == 0:
        return ((a, b), (a + 1, b), (a, b + 1))
    return ((a + 1, b), (a, b + 1), (a + 1, b + 1))


def vertex_position(key) -> tuple[float, float]:
    """Planar position of a hexagonal vertex (centroid of its three faces)."""
    xs = ys = 0.0
    for k, l in triangle_faces(key):
        xs += k + 0.5 * l
        ys += l * (3 ** 0.5) / 2
    return xs / 3, ys / 3


def face_position(f) -> tuple[float, float]:
    return f[0] + 0.5 * f[1], f[1] * (3 ** 0.5) / 2


class Region:
    """Common indexed structure shared by :class:`Domain` and :class:`TorusLattice`.

    Attributes
    ----------
    faces : (F, 2) int array of face coordinates.
    vertex_keys : list of vertex keys, position = vertex id.
    edge_v : (E, 2) vertex ids of each edge (sorted).
    edge_fc : (E, 2, 2) coordinates of the two faces on either side of each
        edge.  On a torus these are reduced; on a domain one of them may lie
        outside the domain.
    edge_faces : (E, 2) face ids of the two sides, ``-1`` for a face outside.
    face_edges : (F, 6) edge ids around each hexagon, counter-clockwise.
    face_verts : (F, 6) vertex ids around each hexagon.
    vertex_edges : (V, 3) incident edge ids, padded with ``-1``.
    """

    is_torus = False

    def _reduce(self, f):
        return (int(f[0]), int(f[1]))

    def _build(self, face_list):
        face_list = [self._reduce(f) for f in face_list]
        self.faces = np.array(face_list, dtype=np.int64).reshape(-1, 2)
        self.face_index = {f: i for i, f in enumerate(face_list)}
        if len(self.face_index) != len(face_list):
            raise ValueError("duplicate faces")

        vkeys: list = []
        vindex: dict = {}

        def vid(key):
            key = self._reduce_vertex(key)
            i = vindex.get(key)
            if i is None:
                i = len(vkeys)
                vindex[key] = i
                vkeys.append(key)
            return i

        edge_index: dict = {}
        edge_v = []
        edge_fc = []
        edge_faces = []
        F = len(face_list)
        face_edges = np.empty((F, 6), dtype=np.int64)
        face_verts = np.empty((F, 6), dtype=np.int64)
        for fi, f in enumerate(face_list):
            ring = [(f[0] + d[0], f[1] + d[1]) for d in DIRECTIONS]
            # vertex j sits between directions j and j+1
            tri = [vid(triangle_key(f, ring[j], ring[(j + 1) % 6])) for j in range(6)]
            face_verts[fi] = tri
            for j in range(6):
                a, b = tri[j - 1], tri[j]
                key = (a, b) if a < b else (b, a)
                e = edge_index.get(key)
                g = self._reduce(ring[j])
                if e is None:
                    e = len(edge_v)
                    edge_index[key] = e
                    edge_v.append(key)
                    edge_fc.append([f, ring[j]])
                    edge_faces.append([fi, self.face_index.get(g, -1)])
                face_edges[fi, j] = e
        self.vertex_keys = vkeys
        self.vertex_index = vindex
        self.edge_v = np.array(edge_v, dtype=np.int64).reshape(-1, 2)
        self.edge_fc = np.array(edge_fc, dtype=np.int64).reshape(-1, 2, 2)
        if self.is_torus:
            self.edge_fc[:, :, 0] %= self.k
            self.edge_fc[:, :, 1] %= self.l
        self.edge_faces = np.array(edge_faces, dtype=np.int64).reshape(-1, 2)
        self.face_edges = face_edges
        self.face_verts = face_verts
        self._edge_index = edge_index
        V = len(vkeys)
        vertex_edges = -np.ones((V, 3), dtype=np.int64)
        fill = np.zeros(V, dtype=np.int64)
        for e, (a, b) in enumerate(edge_v):
            for v in (a, b):
                if fill[v] >= 3:
                    raise ValueError("vertex of degree > 3")
                vertex_edges[v, fill[v]] = e
                fill[v] += 1
        self.vertex_edges = vertex_edges
        self.degree = fill

    def _reduce_vertex(self, key):
        return key

    # ---- sizes -------------------------------------------------------
    @property
    def n_faces(self) -> int:
        return len(self.faces)

    @property
    def n_edges(self) -> int:
        return len(self.edge_v)

    @property
    def n_vertices(self) -> int:
        return len(self.vertex_keys)

    # ---- adjacency queries ---------------------------------------------
    def face_id(self, f) -> int:
        key = self._reduce(f)
        try:
            return self.face_index[key]
        except KeyError:
            raise KeyError(f"face {tuple(f)} not in region") from None

    def edges_of_face(self, f) -> np.ndarray:
        fi = f if isinstance(f, (int, np.integer)) else self.face_id(f)
        if not 0 <= fi < self.n_faces:
            raise IndexError(f"face id {fi} out of range")
        return self.face_edges[fi].copy()

    def edges_of_vertex(self, v: int) -> np.ndarray:
        if not 0 <= v < self.n_vertices:
            raise IndexError(f"vertex id {v} out of range")
        row = self.vertex_edges[v]
        return row[row >= 0].copy()

    def faces_of_edge(self, e: int) -> np.ndarray:
        """Face ids on both sides of edge ``e`` (``-1`` marks an outside face)."""
        if not 0 <= e < self.n_edges:
            raise IndexError(f"edge id {e} out of range")
        return self.edge_faces[e].copy()

    def edge_id(self, vkey_a, vkey_b) -> int:
        a = self.vertex_index[self._reduce_vertex(tuple(vkey_a))]
        b = self.vertex_index[self._reduce_vertex(tuple(vkey_b))]
        return self._edge_index[(a, b) if a < b else (b, a)]

    def edge_key(self, e: int):
        a, b = self.edge_v[e]
        return (self.vertex_keys[a], self.vertex_keys[b])

    def face_distance(self, f, g) -> int:
        return face_distance(f, g)

    def hexagon_mask(self, f) -> np.ndarray:
        mask = np.zeros(self.n_edges, dtype=bool)
        mask[self.edges_of_face(f)] = True
        return mask

    def euler_characteristic(self) -> int:
        raise NotImplementedError

    def to_text(self) -> str:
        raise NotImplementedError


class Domain(Region):
    """A simply connected domain: all faces, edges and vertices enclosed by a
    self-avoiding cycle (the boundary), including the cycle itself."""

    def __init__(self, faces, center=None, radius=None):
        faces = sorted({(int(f[0]), int(f[1])) for f in faces})
        if not faces:
            raise ValueError("a domain needs at least one face")
        self._build(faces)
        self.center = None if center is None else (int(center[0]), int(center[1]))
        self.radius = radius
        self.boundary = self.edge_faces[:, 1] < 0
        self._check_simple_boundary()
        outer = sorted({tuple(int(c) for c in self.edge_fc[e, 1]) for e in np.flatnonzero(self.boundary)})
        self.outer_faces = np.array(outer, dtype=np.int64).reshape(-1, 2)
        # dual vertex ids: domain faces first, then outer faces
        self.dual_index = dict(self.face_index)
        for i, g in enumerate(outer):
            self.dual_index[g] = self.n_faces + i
        self.edge_dual = np.array(
            [[self.dual_index[tuple(int(c) for c in self.edge_fc[e, s])] for s in range(2)] for e in range(self.n_edges)],
            dtype=np.int64,
        ).reshape(-1, 2)
        # for degree-2 vertices: the two outer faces of the missing edge
        ext = -np.ones((self.n_vertices, 2), dtype=np.int64)
        for v, key in enumerate(self.vertex_keys):
            if self.degree[v] == 2:
                outside = [g for g in triangle_faces(key) if g not in self.face_index]
                ext[v] = [self.dual_index[outside[0]], self.dual_index[outside[1]]]
        self.external_faces = ext

    def _check_simple_boundary(self):
        b_edges = np.flatnonzero(self.boundary)
        deg = np.zeros(self.n_vertices, dtype=np.int64)
        for e in b_edges:
            deg[self.edge_v[e]] += 1
        if np.any((deg != 0) & (deg != 2)):
            raise ValueError("face set is not a domain: boundary is not a simple cycle")
        # connectivity of the boundary edge set
        adj: dict = {}
        for e in b_edges:
            a, b = self.edge_v[e]
            adj.setdefault(a, []).append(b)
            adj.setdefault(b, []).append(a)
        start = next(iter(adj))
        seen = {start}
        todo = [start]
        while todo:
            u = todo.pop()
            for w in adj[u]:
                if w not in seen:
                    seen.add(w)
                    todo.append(w)
        if len(seen) != len(adj):
            raise ValueError("face set is not a domain: boundary has several components")

    @property
    def n_dual(self) -> int:
        return self.n_faces + len(self.outer_faces)

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces + 1

    def contains_face(self, f) -> bool:
        return (int(f[0]), int(f[1])) in self.face_index

    def ray_edges(self, f, direction=(1, 0)) -> np.ndarray:
        """Edges crossed by the straight dual path from ``f`` to the first face
        outside the domain."""
        fi = self.face_id(f)
        cur = tuple(self.faces[fi])
        out = []
        j = DIRECTIONS.index(tuple(direction))
        while True:
            ci = self.face_index[cur]
            e = self.face_edges[ci, j]
            out.append(e)
            nxt = (cur[0] + direction[0], cur[1] + direction[1])
            if nxt not in self.face_index:
                return np.array(out, dtype=np.int64)
            cur = nxt

    def boundary_cycle(self) -> np.ndarray:
        return np.flatnonzero(self.boundary)

    def to_text(self) -> str:
        lines = ["# hexloops region v1"]
        if self.radius is not None:
            lines.append(f"kind ball center={self.center[0]},{self.center[1]} radius={self.radius}")
        else:
            lines.append("kind domain")
        lines.append(f"faces {self.n_faces}")
        lines += [f"{k} {l}" for k, l in self.faces]
        return "\n".join(lines) + "\n"

    def describe(self) -> str:
        if self.radius is not None:
            return f"ball({self.center[0]},{self.center[1]};{self.radius})"
        return f"domain[{self.n_faces}]"

    def __repr__(self):
        return f"Domain({self.describe()}, F={self.n_faces}, E={self.n_edges}, V={self.n_vertices})"


class TorusLattice(Region):
    """The ``k x l`` torus: faces ``(s, t)`` modulo ``(k, l)``.

    Cut-lines are the edges crossed by the dual cycles through face column 0
    (``col_cut``, detects winding along the first direction) and face row 0
    (``row_cut``, winding along the second).  ``generators`` holds two straight
    non-contractible cycles, one along each direction.
    """

    is_torus = True

    def __init__(self, k: int, l: int):
        if k < 2 or l < 2:
            raise ValueError("torus needs k, l >= 2")
        self.k, self.l = int(k), int(l)
        self._build([(s, t) for t in range(self.l) for s in range(self.k)])
        self.boundary = np.zeros(self.n_edges, dtype=bool)
        self.edge_dual = self.edge_faces.copy()

        def pair_edge(f, g):
            fi = self.face_id(f)
            d = None
            for j, (dk, dl) in enumerate(DIRECTIONS):
                if self._reduce((f[0] + dk, f[1] + dl)) == self._reduce(g) and (g[0] - f[0], g[1] - f[1]) == (dk, dl):
                    d = j
            return self.face_edges[fi, d]

        self.col_cut = np.array([pair_edge((0, t), (0, t + 1)) for t in range(self.l)], dtype=np.int64)
        self.row_cut = np.array([pair_edge((s, 0), (s + 1, 0)) for s in range(self.k)], dtype=np.int64)
        # vertex on the "positive" side of each cut edge
        self.col_cut_plus = np.array(
            [self.vertex_index[self._reduce_vertex((0, t, 0))] for t in range(self.l)], dtype=np.int64)
        self.row_cut_plus = np.array(
            [self.vertex_index[self._reduce_vertex((s, 0, 0))] for s in range(self.k)], dtype=np.int64)
        gen_s = [pair_edge((s, 0), (s, 1)) for s in range(self.k)]
        gen_s += [pair_edge((s, 0), (s - 1, 1)) for s in range(self.k)]
        gen_t = [pair_edge((0, t), (1, t)) for t in range(self.l)]
        gen_t += [pair_edge((1, t), (0, t + 1)) for t in range(self.l)]
        self.generators = (np.array(sorted(gen_s), dtype=np.int64), np.array(sorted(gen_t), dtype=np.int64))

    def _reduce(self, f):
        return (int(f[0]) % self.k, int(f[1]) % self.l)

    def _reduce_vertex(self, key):
        return (key[0] % self.k, key[1] % self.l, key[2])

    def face_distance(self, f, g) -> int:
        best = None
        for a in (-1, 0, 1):
            for b in (-1, 0, 1):
                d = face_distance(f, (g[0] + a * self.k, g[1] + b * self.l))
                best = d if best is None else min(best, d)
        return best

    def euler_characteristic(self) -> int:
        return self.n_vertices - self.n_edges + self.n_faces

    def generator_mask(self, i: int) -> np.ndarray:
        mask = np.zeros(self.n_edges, dtype=bool)
        mask[self.generators[i]] = True
        return mask

    def to_text(self) -> str:
        lines = ["# hexloops region v1", f"kind torus k={self.k} l={self.l}", f"faces {self.n_faces}"]
        lines += [f"{s} {t}" for s, t in self.faces]
        return "\n".join(lines) + "\n"

    def describe(self) -> str:
        return f"torus({self.k},{self.l})"

    def __repr__(self):
        return f"TorusLattice({self.k},{self.l}, E={self.n_edges}, V={self.n_vertices})"


def ball(center, r: int) -> Domain:
    """The hexagonal-lattice ball of radius ``r`` around face ``center``."""
    return Domain(triangular_ball(center, r), center=center, radius=r)


def torus(k: int, l: int) -> TorusLattice:
    return TorusLattice(k, l)


def region_from_text(text: str) -> Region:
    lines = [ln.strip() for ln in text.splitlines() if ln.strip() and not ln.startswith("#")]
    head = lines[0].split()
    if head[0] != "kind":
        raise ValueError("region text must start with a 'kind' line")
    params = dict(tok.split("=", 1) for tok in head[2:])
    if head[1] == "torus":
        return TorusLattice(int(params["k"]), int(params["l"]))
    count = int(lines[1].split()[1])
    faces = [tuple(int(t) for t in ln.split()) for ln in lines[2:2 + count]]
    if head[1] == "ball":
        c = tuple(int(t) for t in params["center"].split(","))
        return Domain(faces, center=c, radius=int(params["radius"]))
    return Domain(faces)


@dataclass(frozen=True)
class TriangularSubgraph:
    """Dual graph D*: one vertex per face bordering an edge of the domain.

    ``edges[e]`` is the dual of primal edge ``e``; ``is_outer`` marks the
    vertices that are faces outside the domain.
    """

    coords: np.ndarray
    is_outer: np.ndarray
    edges: np.ndarray

    @property
    def n_vertices(self) -> int:
        return len(self.coords)

    @property
    def n_edges(self) -> int:
        return len(self.edges)


def dual_domain(d: Domain) -> TriangularSubgraph:
    coords = np.vstack([d.faces, d.outer_faces]) if len(d.outer_faces) else d.faces.copy()
    is_outer = np.zeros(len(coords), dtype=bool)
    is_outer[d.n_faces:] = True
    return TriangularSubgraph(coords=coords, is_outer=is_outer, edges=d.edge_dual.copy())


def dual_bfs_distances(d: Domain, source) -> dict:
    """BFS distances on the triangular lattice restricted to the dual domain.

    Independent of :func:`face_distance`; used to cross-check it.
    """
    dd = dual_domain(d)
    adj = [[] for _ in range(dd.n_vertices)]
    for a, b in dd.edges:
        adj[a].append(b)
        adj[b].append(a)
    s = d.dual_index[(int(source[0]), int(source[1]))]
    dist = {s: 0}
    q = deque([s])
    while q:
        u = q.popleft()
        for w in adj[u]:
            if w not in dist:
                dist[w] = dist[u] + 1
                q.append(w)
    return {tuple(int(c) for c in dd.coords[i]): v for i, v in dist.items()}
