"""Finite-volume loop events around a face.

For a face ``f`` and radii ``r <= R`` let ``E_r`` be the edges of the faces
within distance ``r`` of ``f`` (restricted to the domain).

* crossing ``C_{r,R}(f)``: some loop has an edge in ``E_r`` and an edge
  outside ``E_R``;
* annulus ``S_{r,R}(f)``: some loop surrounds ``f`` using only edges in
  ``E_R`` and none in ``E_r``;
* ``longest_bordering(f)``: length of the longest loop with an edge on ``f``;
* ``outermost_volume(f)``: number of faces inside the outermost loop that
  surrounds ``f``.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from . import kernels
from .lattice import Domain, triangular_ball
from .loops import LoopConfig, decompose, dual_adjacency

CROSSING = 2
ANNULUS = 1


def ball_edges(region: Domain, f, r: int, r_min: int = -1) -> np.ndarray:
    """Mask of edges of the faces at distance ``r_min < d <= r`` from ``f``."""
    mask = np.zeros(region.n_edges, dtype=bool)
    if r < 0:
        return mask
    for g in triangular_ball(f, r):
        if g in region.face_index and region.face_distance(f, g) > r_min:
            mask[region.face_edges[region.face_index[g]]] = True
    return mask


def event_masks(region: Domain, f, r: int, R: int):
    if R < r:
        raise ValueError("need r <= R")
    ray = np.zeros(region.n_edges, dtype=bool)
    ray[region.ray_edges(f)] = True
    inner = ball_edges(region, f, r)
    outer = ball_edges(region, f, R)
    return ray, inner, outer, outer & ~inner


def event_bits(w: LoopConfig, f, r: int, R: int) -> int:
    """``ANNULUS`` and ``CROSSING`` bits of one configuration."""
    labels = np.empty(w.region.n_edges, dtype=np.int64)
    rg = w.region
    return int(kernels.annulus_bits(w.edges, rg.edge_v, rg.vertex_edges, *event_masks(rg, f, r, R), labels))


def batch_event_bits(region: Domain, states, f, r: int, R: int) -> np.ndarray:
    states = np.ascontiguousarray(np.atleast_2d(states), dtype=bool)
    return kernels.batch_annulus_bits(states, region.edge_v, region.vertex_edges, *event_masks(region, f, r, R))


def crossing_event(w: LoopConfig, f, r: int, R: int) -> bool:
    return bool(event_bits(w, f, r, R) & CROSSING)


def annulus_event(w: LoopConfig, f, r: int, R: int) -> bool:
    return bool(event_bits(w, f, r, R) & ANNULUS)


def loop_interior(loop) -> np.ndarray:
    """Face mask of the bounded component of the loop's complement."""
    region = loop.region
    adj = dual_adjacency(region)
    nd = region.n_dual
    seen = np.zeros(nd, dtype=bool)
    q = deque(range(region.n_faces, nd))
    seen[region.n_faces:] = True
    blocked = loop.mask
    while q:
        u = q.popleft()
        for v, e in adj[u]:
            if not blocked[e] and not seen[v]:
                seen[v] = True
                q.append(v)
    return ~seen[: region.n_faces]


def longest_bordering(w: LoopConfig, f) -> int:
    region = w.region
    lab = w.labels[region.face_edges[region.face_id(f)]]
    lab = lab[lab >= 0]
    if len(lab) == 0:
        return 0
    sizes = np.bincount(w.labels[w.labels >= 0])
    return int(sizes[lab].max())


@dataclass
class OutermostLoop:
    volume: int
    length: int


def outermost_loop(w: LoopConfig, f) -> OutermostLoop:
    """Volume and length of the outermost loop surrounding ``f`` (zeros if none)."""
    fid = w.region.face_id(f)
    best = OutermostLoop(0, 0)
    for loop in decompose(w):
        inside = loop_interior(loop)
        if inside[fid] and inside.sum() > best.volume:
            best = OutermostLoop(int(inside.sum()), loop.length)
    return best


def outermost_volume(w: LoopConfig, f) -> int:
    return outermost_loop(w, f).volume
