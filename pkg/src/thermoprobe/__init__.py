"""Bosonic-probe thermometry toolkit.

Prepares Gaussian and non-Gaussian probe states on truncated Fock spaces,
evolves them under thermal damping, and computes quantum and classical
Fisher information for temperature estimation in transient and equilibrium
regimes.
"""

__version__ = "0.1.0"

from .fock import DensityMatrix, FockSpace, StateVector
from .gaussian import BathSpec, GaussianState
from .probes import ProbeSpec, match_energy, mean_energy, prepare

__all__ = [
    "BathSpec",
    "DensityMatrix",
    "FockSpace",
    "GaussianState",
    "ProbeSpec",
    "StateVector",
    "match_energy",
    "mean_energy",
    "prepare",
    "__version__",
]
