"""Independent reference implementations used by the tests.

Nothing here imports the package's loop tracing, dual BFS or enumeration
code; regions are only used for their raw incidence arrays.
"""

import itertools
from fractions import Fraction

import networkx as nx
import numpy as np

from hexloops.lattice import DIRECTIONS, face_distance, vertex_position


def edge_graph(region, mask):
    g = nx.Graph()
    for e in np.flatnonzero(mask):
        a, b = region.edge_v[e]
        g.add_edge(int(a), int(b), id=int(e))
    return g


def brute_even_subgraphs(region):
    """All edge subsets with every vertex of even degree (only for tiny E)."""
    E = region.n_edges
    assert E <= 16
    out = []
    for bits in range(1 << E):
        mask = np.array([(bits >> i) & 1 for i in range(E)], dtype=bool)
        deg = np.zeros(region.n_vertices, dtype=int)
        np.add.at(deg, region.edge_v[mask].ravel(), 1)
        if np.all(deg % 2 == 0):
            out.append(mask)
    return out


def span_configs(region, generators):
    """Every XOR combination of the generator edge lists (as masks)."""
    gens = []
    for g in generators:
        m = np.zeros(region.n_edges, dtype=bool)
        m[np.asarray(g)] ^= True
        gens.append(m)
    seen = set()
    out = []
    for r in range(len(gens) + 1):
        for combo in itertools.combinations(range(len(gens)), r):
            m = np.zeros(region.n_edges, dtype=bool)
            for i in combo:
                m ^= gens[i]
            key = m.tobytes()
            if key not in seen:
                seen.add(key)
                out.append(m)
    return out


def loop_count(region, mask, count_mask=None):
    """Connected components of the occupied edges (optionally those meeting count_mask)."""
    g = edge_graph(region, mask)
    n = 0
    for comp in nx.connected_components(g):
        ids = [d["id"] for _, _, d in g.subgraph(comp).edges(data=True)]
        if count_mask is None or any(count_mask[i] for i in ids):
            n += 1
    return n


def loop_weight(region, mask, n, x, count_mask=None):
    cm = np.ones(region.n_edges, dtype=bool) if count_mask is None else count_mask
    return Fraction(x) ** int((mask & cm).sum()) * Fraction(n) ** loop_count(region, mask, count_mask)


def polygon(region, edge_ids):
    """Vertex positions of a simple cycle, in cyclic order."""
    g = nx.Graph()
    for e in edge_ids:
        a, b = region.edge_v[e]
        g.add_edge(int(a), int(b))
    cyc = [u for u, _ in nx.find_cycle(g)]
    return [vertex_position(region.vertex_keys[v]) for v in cyc]


def point_in_polygon(pt, poly):
    x, y = pt
    inside = False
    for (x1, y1), (x2, y2) in zip(poly, poly[1:] + poly[:1]):
        if (y1 > y) != (y2 > y):
            xc = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
            if xc > x:
                inside = not inside
    return inside


def face_point(f):
    return f[0] + 0.5 * f[1], f[1] * (3 ** 0.5) / 2


def geometric_surrounds(region, edge_ids, f):
    return point_in_polygon(face_point(f), polygon(region, edge_ids))


def pairwise_diameter(region, edge_ids):
    faces = {tuple(int(c) for c in p) for e in edge_ids for p in region.edge_fc[e]}
    return max(face_distance(a, b) for a in faces for b in faces)


def triangular_graph(faces):
    g = nx.Graph()
    fs = {tuple(f) for f in faces}
    for f in fs:
        g.add_node(f)
        for dk, dl in DIRECTIONS:
            h = (f[0] + dk, f[1] + dl)
            if h in fs:
                g.add_edge(f, h)
    return g


def brute_reachability(adj, open_, source, target):
    """Open-path reachability by repeated boolean matrix products."""
    n = len(adj)
    A = np.zeros((n, n), dtype=bool)
    for u, nb in enumerate(adj):
        for v in nb:
            A[u, v] = True
    o = np.asarray(open_, dtype=bool)
    A &= o[:, None] & o[None, :]
    R = np.eye(n, dtype=bool) & o[:, None]
    for _ in range(n):
        R = R | ((R.astype(int) @ A.astype(int)) > 0)
    return any(R[s, t] for s in source for t in target)
