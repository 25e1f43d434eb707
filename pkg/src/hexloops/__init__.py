"""Loop O(n) model on the hexagonal lattice: exact enumeration, Metropolis
sampling, loop colourings and defect circuits, Ising/FK couplings, and the
loop-contracted percolation graph."""

from ._accel import backend
from .lattice import Domain, TorusLattice, ball, region_from_text, torus
from .loops import LoopConfig, SpinConfig, decompose, domain_walls, spin_rep, surrounds, xor
from .sampler import BoundaryCondition, ModelParams, critical_x, exact_distribution, mcmc_chain

__version__ = "0.1.0"

__all__ = [
    "BoundaryCondition", "Domain", "LoopConfig", "ModelParams", "SpinConfig", "TorusLattice",
    "backend", "ball", "critical_x", "decompose", "domain_walls", "exact_distribution",
    "mcmc_chain", "region_from_text", "spin_rep", "surrounds", "torus", "xor",
]
