"""Fixed objects whose SVG output is pinned under tests/golden/."""

import numpy as np

from hexloops.coupling import CoherentTriple
from hexloops.lattice import ball, torus
from hexloops.loops import LoopConfig, SpinConfig


def cases():
    d = ball((0, 0), 2)
    two = LoopConfig.hexagon(d, (0, 0)).xor(LoopConfig.hexagon(d, (2, -1)))
    blue = LoopConfig.hexagon(d, (-2, 1))
    eta = np.zeros(d.n_edges, dtype=bool)
    eta[np.flatnonzero(~(two.edges | blue.edges))[::7]] = True
    spins = np.ones(d.n_dual, dtype=np.int8)
    spins[[d.face_id((0, 0)), d.face_id((1, 0))]] = -1
    t = torus(3, 3)
    return {
        "loops_ball2": two,
        "triple_ball2": CoherentTriple(two, blue, eta),
        "spins_ball2": SpinConfig(d, spins),
        "torus33": LoopConfig(t, t.generator_mask(0)),
    }
