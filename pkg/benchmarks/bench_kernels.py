"""Compiled kernels against their plain-Python bodies.

    python3 benchmarks/bench_kernels.py            # per-kernel timings
    python3 benchmarks/bench_kernels.py --end-to-end

Per-kernel timings call each kernel and its ``py_func`` on identical inputs
in one process (after a warm-up call compiles it); kernels called from inside
a ``py_func`` stay compiled, so these ratios understate the full gap.
``--end-to-end`` runs the same script twice in subprocesses, with
``HEXLOOPS_DISABLE_NUMBA`` set to 0 and 1, and compares wall time and results.
"""

import argparse
import json
import os
import subprocess
import sys
import time
import numpy as np

from hexloops import backend, kernels
from hexloops.events import event_masks
from hexloops.lattice import ball, torus
from hexloops.sampler import LoopSpace


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def gray_case():
    region = torus(3, 3)
    sp = LoopSpace(region)
    ptr, flat = sp.gen_csr()
    args = (sp.seed, ptr, flat, region.edge_v, region.vertex_edges, region.edge_fc, sp.count_mask,
            sp.ray_mask, sp.cut_a, sp.cut_b, 2)
    return "gray_enumerate torus(3,3), 1024 states", kernels.gray_enumerate, lambda: args


def metropolis_case(steps=20000):
    region = ball((0, 0), 3)
    sp = LoopSpace(region)
    gptr, gflat = sp.gen_csr(sp.global_gens)
    rng = np.random.default_rng(0)
    u1, u2 = rng.random(steps), rng.random(steps)

    def args():
        rec = np.zeros((100, region.n_edges), dtype=bool)
        return (sp.seed.copy(), 0, 0, 0, u1, u2, sp.local_edges, sp.local_verts, gptr, gflat, 0.1, 0.1,
                np.log(1.5), np.log(0.8), region.edge_v, region.vertex_edges, sp.count_mask,
                np.zeros(region.n_edges, dtype=np.int64), 1, 0, 200, rec, np.zeros(100, dtype=np.int64),
                np.zeros(100, dtype=np.int64), 0)

    return f"metropolis ball(3), {steps} steps", kernels.metropolis, args


def annulus_case(count=500):
    region = ball((0, 0), 3)
    sp = LoopSpace(region)
    rng = np.random.default_rng(1)
    states = np.array([sp.state(int(i)).edges for i in rng.integers(0, sp.size, count)])
    masks = event_masks(region, (0, 0), 1, 2)
    args = (states, region.edge_v, region.vertex_edges) + tuple(masks)
    return f"batch_annulus_bits ball(3), {count} states", kernels.batch_annulus_bits, lambda: args


def es_case(sweeps=50):
    region = ball((0, 0), 4)
    nd = region.n_dual
    rng = np.random.default_rng(2)
    fixed = np.zeros(nd, dtype=bool)
    fixed[region.n_faces:] = True
    ub = rng.random((sweeps, region.n_edges))
    uf = rng.random((sweeps, nd))

    def args():
        return (np.ones(nd, dtype=np.int64), fixed, region.edge_dual.astype(np.int64), True, 0.4, ub, uf,
                np.zeros(region.n_edges, dtype=bool), np.zeros(nd, dtype=np.int64))

    return f"es_sweeps ball(4), {sweeps} sweeps", kernels.es_sweeps, args


def per_kernel(repeat):
    if backend() != "numba":
        print("numba is not active; per-kernel comparison needs it", file=sys.stderr)
        return 1
    print(f"{'kernel':48s} {'numba [s]':>10s} {'python [s]':>11s} {'speedup':>8s}")
    for name, fn, make in (gray_case(), metropolis_case(), annulus_case(), es_case()):
        fn(*make())  # compile
        fast = best_of(lambda: fn(*make()), repeat)
        slow = best_of(lambda: fn.py_func(*make()), max(1, repeat // 3))
        print(f"{name:48s} {fast:10.4f} {slow:11.4f} {slow / fast:8.1f}x")
    return 0


SCRIPT = """
import json, time
from fractions import Fraction
from hexloops import backend
from hexloops.lattice import ball, torus
from hexloops.sampler import ModelParams, exact_distribution, mcmc_chain
t0 = time.perf_counter()
d = exact_distribution(torus(3, 3), ModelParams(Fraction(3, 2), 1))
ch = mcmc_chain(ball((0, 0), 3), ModelParams(1.5, 0.8), seed=1, samples=200)
print(json.dumps({"backend": backend(), "seconds": time.perf_counter() - t0, "Z": str(d.Z),
                  "loops": int(ch.n_loops.sum())}))
"""


def end_to_end():
    out = {}
    for flag in ("0", "1"):
        env = dict(os.environ, HEXLOOPS_DISABLE_NUMBA=flag)
        t0 = time.perf_counter()
        res = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
        rec = json.loads(res.stdout.strip().splitlines()[-1])
        rec["wall"] = time.perf_counter() - t0
        out[rec["backend"]] = rec
    for name, rec in out.items():
        print(f"{name:8s} work {rec['seconds']:8.3f}s  wall (incl. import/compile) {rec['wall']:8.3f}s")
    same = len({(r["Z"], r["loops"]) for r in out.values()}) == 1
    print("results identical:", same)
    return 0 if same else 1


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--end-to-end", action="store_true")
    args = p.parse_args(argv)
    return end_to_end() if args.end_to_end else per_kernel(args.repeat)


if __name__ == "__main__":
    sys.exit(main())
