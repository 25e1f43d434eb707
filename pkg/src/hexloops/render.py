"""Deterministic SVG snapshots of configurations.

Output depends only on the lattice coordinates and the configuration, so a
fixed seed gives a byte-identical file.
"""

from __future__ import annotations

import numpy as np

from .coupling import CoherentTriple, ColoredConfig
from .lattice import DIRECTIONS, Region, face_position
from .loops import LoopConfig, SpinConfig, domain_walls

SCALE = 20.0
PALETTE = ("#d62728", "#1f77b4", "#2ca02c", "#ff7f0e", "#9467bd", "#8c564b")
LOOP_COLOR = "#222222"
SKELETON = "#cccccc"
BLUE = "#1f4fff"
DEFECT = "#e41a1c"


def _centroid(*faces):
    xs = ys = 0.0
    for f in faces:
        x, y = face_position(f)
        xs += x
        ys += y
    return xs / len(faces), ys / len(faces)


def edge_segments(region: Region) -> dict:
    """Edge id -> endpoint pair, drawn from the first face that owns the edge."""
    out = {}
    for fi, f in enumerate(region.faces):
        f = (int(f[0]), int(f[1]))
        for j, (dk, dl) in enumerate(DIRECTIONS):
            e = int(region.face_edges[fi, j])
            if e in out:
                continue
            g = (f[0] + dk, f[1] + dl)
            pk, pl = DIRECTIONS[j - 1]
            nk, nl = DIRECTIONS[(j + 1) % 6]
            a = _centroid(f, g, (f[0] + pk, f[1] + pl))
            b = _centroid(f, g, (f[0] + nk, f[1] + nl))
            out[e] = (a, b)
    return out


def _hexagon(f):
    f = (int(f[0]), int(f[1]))
    pts = []
    for j, (dk, dl) in enumerate(DIRECTIONS):
        nk, nl = DIRECTIONS[(j + 1) % 6]
        pts.append(_centroid(f, (f[0] + dk, f[1] + dl), (f[0] + nk, f[1] + nl)))
    return pts


class _Canvas:
    def __init__(self, region: Region):
        self.region = region
        self.segments = edge_segments(region)
        pts = np.array([p for seg in self.segments.values() for p in seg])
        self.x0, self.y0 = pts.min(axis=0) - 1.0
        x1, y1 = pts.max(axis=0) + 1.0
        self.w = (x1 - self.x0) * SCALE
        self.h = (y1 - self.y0) * SCALE
        self.items = []

    def xy(self, p):
        # flip y so the lattice reads upwards
        return (p[0] - self.x0) * SCALE, self.h - (p[1] - self.y0) * SCALE

    def line(self, a, b, color, width, dash=None):
        (x1, y1), (x2, y2) = self.xy(a), self.xy(b)
        d = f' stroke-dasharray="{dash}"' if dash else ""
        self.items.append(f'<line x1="{x1:.3f}" y1="{y1:.3f}" x2="{x2:.3f}" y2="{y2:.3f}" '
                          f'stroke="{color}" stroke-width="{width}"{d}/>')

    def polygon(self, pts, fill):
        s = " ".join("{:.3f},{:.3f}".format(*self.xy(p)) for p in pts)
        self.items.append(f'<polygon points="{s}" fill="{fill}" stroke="none"/>')

    def edges(self, mask, color, width, dash=None):
        for e in np.flatnonzero(mask):
            a, b = self.segments[int(e)]
            self.line(a, b, color, width, dash)

    def text(self):
        head = (f'<svg xmlns="http://www.w3.org/2000/svg" width="{self.w:.3f}" height="{self.h:.3f}" '
                f'viewBox="0 0 {self.w:.3f} {self.h:.3f}">')
        body = [head, '<rect width="100%" height="100%" fill="white"/>'] + self.items + ["</svg>"]
        return "\n".join(body) + "\n"


def _loops(c: _Canvas, w: LoopConfig, width=2.0, single=None, dash=None):
    lab = w.labels
    if w.n_loops == 0:
        return
    sizes = np.bincount(lab[lab >= 0], minlength=w.n_loops)
    # longest first, ties by loop id
    rank = {int(i): r for r, i in enumerate(sorted(range(w.n_loops), key=lambda i: (-sizes[i], i)))}
    for i in range(w.n_loops):
        color = single or (PALETTE[rank[i]] if rank[i] < len(PALETTE) else LOOP_COLOR)
        c.edges(lab == i, color, width, dash)


def _defects(c: _Canvas, eta):
    for e in np.flatnonzero(eta):
        seg = c.segments[int(e)]
        mid = ((seg[0][0] + seg[1][0]) / 2, (seg[0][1] + seg[1][1]) / 2)
        # the dual segment: perpendicular through the edge midpoint
        dx, dy = seg[1][0] - seg[0][0], seg[1][1] - seg[0][1]
        a = (mid[0] + dy * 0.87, mid[1] - dx * 0.87)
        b = (mid[0] - dy * 0.87, mid[1] + dx * 0.87)
        c.line(a, b, DEFECT, 1.5)


def svg(obj) -> str:
    """SVG text for a LoopConfig, ColoredConfig, CoherentTriple or SpinConfig."""
    if isinstance(obj, SpinConfig):
        region = obj.region
    elif isinstance(obj, (CoherentTriple, ColoredConfig)):
        region = obj.red.region
    elif isinstance(obj, LoopConfig):
        region = obj.region
    else:
        raise TypeError(f"cannot render {type(obj).__name__}")
    c = _Canvas(region)
    if isinstance(obj, SpinConfig):
        for fi, f in enumerate(region.faces):
            c.polygon(_hexagon(f), "#f2d16b" if obj.values[fi] > 0 else "#5b6c8f")
    c.edges(np.ones(region.n_edges, dtype=bool), SKELETON, 0.5)
    if isinstance(obj, SpinConfig):
        _loops(c, domain_walls(obj), single=LOOP_COLOR)
    elif isinstance(obj, LoopConfig):
        _loops(c, obj)
    else:
        _loops(c, obj.red)
        _loops(c, obj.blue, single=BLUE, dash="4,2")
        if isinstance(obj, CoherentTriple):
            _defects(c, obj.eta)
    return c.text()


def render(obj, path) -> str:
    text = svg(obj)
    with open(path, "w", encoding="utf-8") as fh:
        fh.write(text)
    return str(path)
