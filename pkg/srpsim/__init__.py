"""
srpsim: spatial random permutations on periodic lattices
"""

__version__ = "0.1.0"

from .core import LatticeSpec, JumpEnergy, PermutationState
from .sampling import ChainConfig, Chain, run_experiment
from .exceptions import SRPError

__all__ = [
    "__version__",
    "LatticeSpec",
    "JumpEnergy",
    "PermutationState",
    "ChainConfig",
    "Chain",
    "run_experiment",
    "SRPError",
]
