import networkx as nx
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hexloops.lattice import (
    DIRECTIONS, Domain, ball, dual_bfs_distances, dual_domain, face_distance, region_from_text, torus,
    triangle_faces, triangle_key, triangular_ball,
)
from oracles import triangular_graph

faces_st = st.tuples(st.integers(-20, 20), st.integers(-20, 20))


@pytest.mark.parametrize("r,E,V", [(0, 6, 6), (1, 30, 24), (2, 72, 54), (3, 132, 96)])
def test_ball_counts(r, E, V):
    d = ball((0, 0), r)
    assert d.n_faces == 3 * r * (r + 1) + 1
    assert (d.n_edges, d.n_vertices) == (E, V)
    assert d.euler_characteristic() == 2
    assert d.boundary.sum() == 6 * (2 * r + 1)


@pytest.mark.parametrize("k,l", [(2, 2), (2, 3), (3, 3), (4, 4), (3, 5)])
def test_torus_counts(k, l):
    t = torus(k, l)
    F = k * l
    assert (t.n_faces, t.n_edges, t.n_vertices) == (F, 3 * F, 2 * F)
    assert np.all(t.degree == 3)
    assert t.n_vertices - t.n_edges + t.n_faces == 0


def test_torus_rejects_small():
    with pytest.raises(ValueError):
        torus(1, 3)


def test_domain_rejects_non_simple_boundary():
    with pytest.raises(ValueError):
        Domain([(0, 0), (2, 0)])
    ring = [f for f in triangular_ball((0, 0), 1) if f != (0, 0)]
    with pytest.raises(ValueError):
        Domain(ring)


def test_degrees_on_ball():
    d = ball((0, 0), 2)
    assert set(d.degree.tolist()) <= {2, 3}
    deg = np.zeros(d.n_vertices, dtype=int)
    np.add.at(deg, d.edge_v.ravel(), 1)
    assert np.array_equal(deg, d.degree)


def test_face_edges_shared_between_neighbours():
    d = ball((0, 0), 2)
    for fi, f in enumerate(d.faces):
        for j, (dk, dl) in enumerate(DIRECTIONS):
            g = (int(f[0]) + dk, int(f[1]) + dl)
            if d.contains_face(g):
                gi = d.face_id(g)
                assert d.face_edges[fi, j] == d.face_edges[gi, (j + 3) % 6]


@given(faces_st, faces_st)
def test_face_distance_metric(f, g):
    assert face_distance(f, g) == face_distance(g, f)
    assert (face_distance(f, g) == 0) == (f == g)


@given(faces_st, faces_st, faces_st)
def test_face_distance_triangle(f, g, h):
    assert face_distance(f, h) <= face_distance(f, g) + face_distance(g, h)


def test_face_distance_matches_graph_bfs():
    faces = triangular_ball((0, 0), 6)
    g = triangular_graph(faces)
    dist = nx.single_source_shortest_path_length(g, (0, 0))
    for f in faces:
        assert face_distance((0, 0), f) == dist[f]


def test_dual_bfs_matches_face_distance_on_ball():
    d = ball((1, -1), 3)
    dist = dual_bfs_distances(d, (1, -1))
    assert len(dist) == d.n_dual
    for f, v in dist.items():
        assert v == face_distance((1, -1), f)


def test_triangle_key_roundtrip():
    for key in [(0, 0, 0), (3, -2, 1), (-1, 5, 0)]:
        assert triangle_key(*triangle_faces(key)) == key


def test_torus_face_distance_matches_bfs():
    t = torus(5, 4)
    g = nx.Graph()
    for e in range(t.n_edges):
        a, b = t.edge_faces[e]
        g.add_edge(int(a), int(b))
    dist = nx.single_source_shortest_path_length(g, t.face_id((0, 0)))
    for f in t.faces:
        assert t.face_distance((0, 0), tuple(f)) == dist[t.face_id(tuple(f))]


def test_torus_generators_are_cycles():
    t = torus(4, 3)
    for g in t.generators:
        deg = np.zeros(t.n_vertices, dtype=int)
        np.add.at(deg, t.edge_v[g].ravel(), 1)
        assert set(deg.tolist()) <= {0, 2}


def test_ray_reaches_outside():
    d = ball((0, 0), 3)
    ray = d.ray_edges((0, 0))
    assert len(ray) == 4
    assert d.boundary[ray[-1]]


def test_region_text_roundtrip():
    for r in (ball((2, 1), 2), Domain([(0, 0), (1, 0), (0, 1)]), torus(3, 4)):
        back = region_from_text(r.to_text())
        assert np.array_equal(back.faces, r.faces)
        assert np.array_equal(back.edge_v, r.edge_v)


def test_dual_domain_shape():
    d = ball((0, 0), 1)
    dd = dual_domain(d)
    assert dd.n_vertices == 7 + 12
    assert dd.n_edges == d.n_edges
