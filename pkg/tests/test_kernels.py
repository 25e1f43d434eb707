"""Compiled kernels against their plain-Python bodies, and the env-flag fallback."""

import importlib.util
import json
import os
import subprocess
import sys

import numpy as np
import pytest

from hexloops import kernels
from hexloops.lattice import ball, torus
from hexloops.sampler import LoopSpace
from hexloops.events import event_masks


def py(f):
    return getattr(f, "py_func", f)


def test_every_kernel_has_python_body():
    for k in kernels.KERNELS:
        assert callable(py(k))


@pytest.mark.parametrize("region", [ball((0, 0), 1), torus(2, 3)], ids=["ball1", "torus23"])
def test_gray_enumerate_equivalence(region):
    sp = LoopSpace(region)
    ptr, flat = sp.gen_csr()
    args = (sp.seed, ptr, flat, region.edge_v, region.vertex_edges, region.edge_fc, sp.count_mask,
            sp.ray_mask, sp.cut_a, sp.cut_b, 2)
    a = kernels.gray_enumerate(*args)
    b = py(kernels.gray_enumerate)(*args)
    for u, v in zip(a, b):
        assert np.array_equal(u, v)


def _metropolis_args(region, seed):
    sp = LoopSpace(region)
    rng = np.random.default_rng(seed)
    m = 3000
    gptr, gflat = sp.gen_csr(sp.global_gens)
    on = sp.seed.copy()
    rec = np.zeros((30, region.n_edges), dtype=bool)
    return [on, 0, 0, 0, rng.random(m), rng.random(m), sp.local_edges, sp.local_verts, gptr, gflat, 0.1,
            0.1, np.log(1.5), np.log(0.8), region.edge_v, region.vertex_edges, sp.count_mask,
            np.zeros(region.n_edges, dtype=np.int64), 1, 0, 100, rec, np.zeros(30, dtype=np.int64),
            np.zeros(30, dtype=np.int64), 0]


@pytest.mark.parametrize("region", [ball((0, 0), 2), torus(3, 3)], ids=["ball2", "torus33"])
def test_metropolis_equivalence(region):
    a = _metropolis_args(region, 4)
    b = _metropolis_args(region, 4)
    ra = kernels.metropolis(*a)
    rb = py(kernels.metropolis)(*b)
    assert tuple(int(v) for v in ra) == tuple(int(v) for v in rb)
    assert np.array_equal(a[0], b[0])
    assert np.array_equal(a[21], b[21])


def test_es_sweeps_equivalence():
    d = ball((0, 0), 2)
    nd = d.n_dual
    rng = np.random.default_rng(2)
    fixed = np.zeros(nd, dtype=bool)
    fixed[d.n_faces:] = True
    ub = rng.random((5, d.n_edges))
    uf = rng.random((5, nd))
    out = []
    for f in (kernels.es_sweeps, py(kernels.es_sweeps)):
        spins = np.ones(nd, dtype=np.int8)
        bonds = np.zeros(d.n_edges, dtype=bool)
        parent = np.zeros(nd, dtype=np.int64)
        f(spins, fixed, d.edge_dual, True, 0.4, ub, uf, bonds, parent)
        out.append((spins, bonds))
    assert np.array_equal(out[0][0], out[1][0])
    assert np.array_equal(out[0][1], out[1][1])


def test_annulus_bits_equivalence():
    d = ball((0, 0), 3)
    sp = LoopSpace(d)
    rng = np.random.default_rng(0)
    states = np.array([sp.state(int(i)).edges for i in rng.integers(0, sp.size, 50)])
    masks = event_masks(d, (0, 0), 1, 2)
    a = kernels.batch_annulus_bits(states, d.edge_v, d.vertex_edges, *masks)
    b = py(kernels.batch_annulus_bits)(states, d.edge_v, d.vertex_edges, *masks)
    assert np.array_equal(a, b)


SCRIPT = """
import json
from fractions import Fraction
from hexloops import backend
from hexloops.lattice import torus
from hexloops.sampler import ModelParams, exact_distribution, mcmc_chain
d = exact_distribution(torus(2, 2), ModelParams(Fraction(3, 2), 1))
ch = mcmc_chain(torus(3, 3), ModelParams(1.5, 1), seed=11, samples=50)
print(json.dumps({"backend": backend(), "Z": str(d.Z), "loops": ch.n_loops.tolist(),
                  "acc": ch.accepted}))
"""


def _run(flag):
    env = dict(os.environ)
    env["HEXLOOPS_DISABLE_NUMBA"] = flag
    out = subprocess.run([sys.executable, "-c", SCRIPT], env=env, capture_output=True, text=True, check=True)
    return json.loads(out.stdout.strip().splitlines()[-1])


def test_env_flag_switches_backend_with_identical_results():
    fast = _run("0")
    slow = _run("1")
    assert slow["backend"] == "python"
    assert fast["backend"] == ("numba" if importlib.util.find_spec("numba") else "python")
    assert {k: v for k, v in fast.items() if k != "backend"} == {k: v for k, v in slow.items() if k != "backend"}
