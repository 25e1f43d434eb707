"""Hot loops over flat edge arrays.

Every function here is plain Python over numpy arrays; :func:`hexloops._accel.njit`
compiles it with numba unless ``HEXLOOPS_DISABLE_NUMBA`` is set.  Random numbers
are always drawn by the caller and passed in, so both paths give identical
output for the same seed.

Summary flag bits returned by :func:`summarize`:

* ``FLAG_SURROUND_BIG`` a counted loop surrounds the target face and has
  diameter ``>= dmin``;
* ``FLAG_SURROUND`` a counted loop surrounds the target face;
* ``FLAG_NONCONTRACTIBLE`` some loop crosses a cut-line an odd number of times.
"""

import numpy as np

from ._accel import njit

FLAG_SURROUND_BIG = 1
FLAG_SURROUND = 2
FLAG_NONCONTRACTIBLE = 4


@njit
def trace_labels(on, edge_v, vertex_edges, labels):
    """Label each occupied edge by its loop; loops numbered by minimal edge id.

    Returns the number of loops.  Unoccupied edges get ``-1``.
    """
    E = on.shape[0]
    for e in range(E):
        labels[e] = -1
    nl = 0
    for e0 in range(E):
        if on[e0] and labels[e0] < 0:
            labels[e0] = nl
            prev = e0
            v = edge_v[e0, 1]
            while True:
                nxt = -1
                for j in range(3):
                    c = vertex_edges[v, j]
                    if c >= 0 and c != prev and on[c]:
                        nxt = c
                        break
                if nxt < 0 or nxt == e0:
                    break
                labels[nxt] = nl
                if edge_v[nxt, 0] == v:
                    v = edge_v[nxt, 1]
                else:
                    v = edge_v[nxt, 0]
                prev = nxt
            nl += 1
    return nl


@njit
def loop_stats(on, labels, nl, edge_fc, count_mask, ray_mask, cut_a, cut_b):
    """Per-loop length, diameter, ray parity, counted flag and cut parities.

    Diameter is the largest face distance between two faces bordering the
    loop, i.e. the largest of the ranges of ``k``, ``l`` and ``k + l``.
    """
    length = np.zeros(nl, np.int64)
    ray = np.zeros(nl, np.int64)
    counted = np.zeros(nl, np.bool_)
    par_a = np.zeros(nl, np.int64)
    par_b = np.zeros(nl, np.int64)
    lo = np.full((nl, 3), 1 << 40, np.int64)
    hi = np.full((nl, 3), -(1 << 40), np.int64)
    for e in range(on.shape[0]):
        i = labels[e]
        if i < 0:
            continue
        length[i] += 1
        if ray_mask[e]:
            ray[i] += 1
        if count_mask[e]:
            counted[i] = True
        if cut_a[e]:
            par_a[i] += 1
        if cut_b[e]:
            par_b[i] += 1
        for s in range(2):
            k = edge_fc[e, s, 0]
            l = edge_fc[e, s, 1]
            c0 = k
            c1 = l
            c2 = k + l
            if c0 < lo[i, 0]:
                lo[i, 0] = c0
            if c0 > hi[i, 0]:
                hi[i, 0] = c0
            if c1 < lo[i, 1]:
                lo[i, 1] = c1
            if c1 > hi[i, 1]:
                hi[i, 1] = c1
            if c2 < lo[i, 2]:
                lo[i, 2] = c2
            if c2 > hi[i, 2]:
                hi[i, 2] = c2
    diam = np.zeros(nl, np.int64)
    for i in range(nl):
        d = 0
        for c in range(3):
            if hi[i, c] - lo[i, c] > d:
                d = hi[i, c] - lo[i, c]
        diam[i] = d
    return length, diam, ray, counted, par_a, par_b


@njit
def summarize(on, edge_v, vertex_edges, edge_fc, count_mask, ray_mask, cut_a, cut_b, dmin, labels):
    """Counted edge number, counted loop number and event flags of one state."""
    ne = 0
    for e in range(on.shape[0]):
        if on[e] and count_mask[e]:
            ne += 1
    nl = trace_labels(on, edge_v, vertex_edges, labels)
    length, diam, ray, counted, par_a, par_b = loop_stats(
        on, labels, nl, edge_fc, count_mask, ray_mask, cut_a, cut_b)
    nc = 0
    flags = 0
    for i in range(nl):
        if counted[i]:
            nc += 1
            if ray[i] % 2 == 1:
                flags |= FLAG_SURROUND
                if diam[i] >= dmin:
                    flags |= FLAG_SURROUND_BIG
        if par_a[i] % 2 == 1 or par_b[i] % 2 == 1:
            flags |= FLAG_NONCONTRACTIBLE
    return ne, nc, flags


@njit
def batch_summaries(states, edge_v, vertex_edges, edge_fc, count_mask, ray_mask, cut_a, cut_b, dmin):
    N = states.shape[0]
    ne = np.zeros(N, np.int64)
    nl = np.zeros(N, np.int64)
    fl = np.zeros(N, np.int64)
    labels = np.empty(states.shape[1], np.int64)
    for i in range(N):
        a, b, c = summarize(states[i], edge_v, vertex_edges, edge_fc, count_mask,
                            ray_mask, cut_a, cut_b, dmin, labels)
        ne[i] = a
        nl[i] = b
        fl[i] = c
    return ne, nl, fl


@njit
def gray_enumerate(seed, gen_ptr, gen_edges, edge_v, vertex_edges, edge_fc,
                   count_mask, ray_mask, cut_a, cut_b, dmin):
    """Summaries of ``seed XOR span(generators)`` in Gray-code order.

    State ``i`` is ``seed`` XOR the generators ``j`` with bit ``j`` of
    ``i ^ (i >> 1)`` set.
    """
    G = gen_ptr.shape[0] - 1
    N = 1 << G
    on = seed.copy()
    labels = np.empty(on.shape[0], np.int64)
    ne = np.zeros(N, np.int32)
    nl = np.zeros(N, np.int32)
    fl = np.zeros(N, np.uint8)
    for i in range(N):
        if i > 0:
            j = 0
            t = i
            while t & 1 == 0:
                t >>= 1
                j += 1
            for p in range(gen_ptr[j], gen_ptr[j + 1]):
                e = gen_edges[p]
                on[e] = not on[e]
        a, b, c = summarize(on, edge_v, vertex_edges, edge_fc, count_mask,
                            ray_mask, cut_a, cut_b, dmin, labels)
        ne[i] = a
        nl[i] = b
        fl[i] = c
    return ne, nl, fl


@njit
def _trace_mark(on, e0, edge_v, vertex_edges, count_mask, mark, tag):
    """Mark every edge of the loop through ``e0``; return 1 if it is counted."""
    counted = 1 if count_mask[e0] else 0
    mark[e0] = tag
    prev = e0
    v = edge_v[e0, 1]
    while True:
        nxt = -1
        for j in range(3):
            c = vertex_edges[v, j]
            if c >= 0 and c != prev and on[c]:
                nxt = c
                break
        if nxt < 0 or nxt == e0:
            break
        mark[nxt] = tag
        if count_mask[nxt]:
            counted = 1
        if edge_v[nxt, 0] == v:
            v = edge_v[nxt, 1]
        else:
            v = edge_v[nxt, 0]
        prev = nxt
    return counted


@njit
def loops_through(on, verts, edge_v, vertex_edges, count_mask, mark, tag):
    """Number of distinct counted loops passing through any vertex in ``verts``."""
    c = 0
    for q in range(verts.shape[0]):
        v = verts[q]
        for j in range(3):
            e = vertex_edges[v, j]
            if e >= 0 and on[e] and mark[e] != tag:
                c += _trace_mark(on, e, edge_v, vertex_edges, count_mask, mark, tag)
    return c


@njit
def count_loops(on, edge_v, vertex_edges, count_mask, mark, tag):
    c = 0
    for e in range(on.shape[0]):
        if on[e] and mark[e] != tag:
            c += _trace_mark(on, e, edge_v, vertex_edges, count_mask, mark, tag)
    return c


@njit
def flip_delta(on, gen_edges, gen_verts, edge_v, vertex_edges, count_mask, mark, tag):
    """(delta counted edges, delta counted loops) of XOR with one generator.

    Leaves ``on`` unchanged.  Only loops through ``gen_verts`` are retraced, so
    ``gen_verts`` must cover every vertex touched by the generator.
    """
    de = 0
    for p in range(gen_edges.shape[0]):
        e = gen_edges[p]
        if count_mask[e]:
            de += -1 if on[e] else 1
    before = loops_through(on, gen_verts, edge_v, vertex_edges, count_mask, mark, tag)
    for p in range(gen_edges.shape[0]):
        on[gen_edges[p]] = not on[gen_edges[p]]
    after = loops_through(on, gen_verts, edge_v, vertex_edges, count_mask, mark, tag + 1)
    for p in range(gen_edges.shape[0]):
        on[gen_edges[p]] = not on[gen_edges[p]]
    return de, after - before


@njit
def metropolis(on, ne, nl, step0, u_move, u_acc, local_edges, local_verts,
               glob_ptr, glob_edges, h, hold, log_n, log_x, edge_v, vertex_edges,
               count_mask, mark, tag, burn_in, thin, rec_states, rec_ne, rec_nl, nrec):
    """Run ``len(u_move)`` Metropolis steps in place.

    Local moves XOR one hexagon (rows of ``local_edges``); with probability
    ``h`` (when global generators exist) a global generator is proposed instead
    and the loop count is recomputed from scratch.  A move is accepted with
    probability ``(1 - hold) * min(1, ratio)``; ``hold > 0`` keeps the chain
    aperiodic when every ratio is 1.  A state is recorded after
    step ``s`` (1-based, counted from ``step0``) when ``s > burn_in`` and
    ``(s - burn_in) % thin == 0``.
    """
    n_local = local_edges.shape[0]
    n_glob = glob_ptr.shape[0] - 1
    use_glob = n_glob > 0 and h > 0.0
    accepted = 0
    keep = 1.0 - hold
    cap = rec_states.shape[0]
    for t in range(u_move.shape[0]):
        u = u_move[t]
        if use_glob and u < h:
            g = int(u / h * n_glob)
            if g >= n_glob:
                g = n_glob - 1
            de = 0
            for p in range(glob_ptr[g], glob_ptr[g + 1]):
                e = glob_edges[p]
                if count_mask[e]:
                    de += -1 if on[e] else 1
                on[e] = not on[e]
            tag += 2
            new_nl = count_loops(on, edge_v, vertex_edges, count_mask, mark, tag)
            dl = new_nl - nl
            lr = dl * log_n + de * log_x
            if u_acc[t] < keep * (1.0 if lr >= 0.0 else np.exp(lr)):
                ne += de
                nl = new_nl
                accepted += 1
            else:
                for p in range(glob_ptr[g], glob_ptr[g + 1]):
                    on[glob_edges[p]] = not on[glob_edges[p]]
        else:
            if use_glob:
                f = int((u - h) / (1.0 - h) * n_local)
            else:
                f = int(u * n_local)
            if f >= n_local:
                f = n_local - 1
            tag += 2
            de, dl = flip_delta(on, local_edges[f], local_verts[f], edge_v,
                                vertex_edges, count_mask, mark, tag)
            lr = dl * log_n + de * log_x
            if u_acc[t] < keep * (1.0 if lr >= 0.0 else np.exp(lr)):
                for p in range(local_edges.shape[1]):
                    e = local_edges[f, p]
                    on[e] = not on[e]
                ne += de
                nl += dl
                accepted += 1
        s = step0 + t + 1
        if s > burn_in and (s - burn_in) % thin == 0 and nrec < cap:
            for e in range(on.shape[0]):
                rec_states[nrec, e] = on[e]
            rec_ne[nrec] = ne
            rec_nl[nrec] = nl
            nrec += 1
    return ne, nl, accepted, tag, nrec


@njit
def _find(parent, a):
    while parent[a] != a:
        parent[a] = parent[parent[a]]
        a = parent[a]
    return a


@njit
def cluster_roots(nv, edges, active, parent):
    """Union-find over ``nv`` vertices joined by the active rows of ``edges``."""
    for v in range(nv):
        parent[v] = v
    for e in range(edges.shape[0]):
        if active[e]:
            a = _find(parent, edges[e, 0])
            b = _find(parent, edges[e, 1])
            if a != b:
                if a < b:
                    parent[b] = a
                else:
                    parent[a] = b
    for v in range(nv):
        parent[v] = _find(parent, v)
    return parent


@njit
def es_sweeps(spins, fixed, edges, antiferro, p_bond, u_bond, u_flip, bonds, parent):
    """Alternating bond/spin resampling for the Edwards-Sokal coupling.

    Ferromagnetic: agreeing pairs are bonded with probability ``p_bond``.
    Antiferromagnetic: disagreeing pairs are bonded with probability ``p_bond``.
    Each cluster without a fixed vertex is then flipped with probability 1/2.
    ``bonds`` holds the bond set of the last sweep on return.
    """
    nv = spins.shape[0]
    root_fixed = np.zeros(nv, np.bool_)
    for sw in range(u_bond.shape[0]):
        for e in range(edges.shape[0]):
            a = edges[e, 0]
            b = edges[e, 1]
            eligible = (spins[a] != spins[b]) if antiferro else (spins[a] == spins[b])
            bonds[e] = eligible and u_bond[sw, e] < p_bond
        cluster_roots(nv, edges, bonds, parent)
        for v in range(nv):
            root_fixed[v] = False
        for v in range(nv):
            if fixed[v]:
                root_fixed[parent[v]] = True
        for v in range(nv):
            r = parent[v]
            if not root_fixed[r] and u_flip[sw, r] < 0.5:
                spins[v] = -spins[v]
    return spins


@njit
def annulus_bits(on, edge_v, vertex_edges, ray_mask, inner_mask, outer_mask, ring_mask, labels):
    """Event bits of one state.

    Bit 1: a loop surrounds the target (odd ray parity) using only edges of
    ``ring_mask``.  Bit 2: a loop uses an edge of ``inner_mask`` and an edge
    outside ``outer_mask``.
    """
    nl = trace_labels(on, edge_v, vertex_edges, labels)
    ray = np.zeros(nl, np.int64)
    hit_in = np.zeros(nl, np.bool_)
    leave = np.zeros(nl, np.bool_)
    escape = np.zeros(nl, np.bool_)
    for e in range(on.shape[0]):
        c = labels[e]
        if c < 0:
            continue
        if ray_mask[e]:
            ray[c] += 1
        if inner_mask[e]:
            hit_in[c] = True
        if not outer_mask[e]:
            leave[c] = True
        if not ring_mask[e]:
            escape[c] = True
    bits = 0
    for c in range(nl):
        if ray[c] % 2 == 1 and not escape[c]:
            bits |= 1
        if hit_in[c] and leave[c]:
            bits |= 2
    return bits


@njit
def batch_annulus_bits(states, edge_v, vertex_edges, ray_mask, inner_mask, outer_mask, ring_mask):
    labels = np.empty(states.shape[1], np.int64)
    out = np.zeros(states.shape[0], np.uint8)
    for i in range(states.shape[0]):
        out[i] = annulus_bits(states[i], edge_v, vertex_edges, ray_mask, inner_mask, outer_mask, ring_mask, labels)
    return out


@njit
def gray_annulus_bits(seed, gen_ptr, gen_edges, edge_v, vertex_edges, ray_mask, inner_mask, outer_mask,
                      ring_mask):
    """:func:`annulus_bits` over the Gray-code enumeration of :func:`gray_enumerate`."""
    G = gen_ptr.shape[0] - 1
    N = 1 << G
    on = seed.copy()
    labels = np.empty(on.shape[0], np.int64)
    out = np.zeros(N, np.uint8)
    for i in range(N):
        if i > 0:
            j = 0
            t = i
            while t & 1 == 0:
                t >>= 1
                j += 1
            for p in range(gen_ptr[j], gen_ptr[j + 1]):
                e = gen_edges[p]
                on[e] = not on[e]
        out[i] = annulus_bits(on, edge_v, vertex_edges, ray_mask, inner_mask, outer_mask, ring_mask, labels)
    return out


KERNELS = (trace_labels, summarize, batch_summaries, gray_enumerate, flip_delta,
           metropolis, cluster_roots, es_sweeps, batch_annulus_bits, gray_annulus_bits)
