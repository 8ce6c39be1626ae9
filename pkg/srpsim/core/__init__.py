"""Core lattice, jump energy and permutation state modules."""

from .lattice import LatticeKind, LatticeSpec, JumpVector, periodic_diff, jump, neighbor_pairs
from .energy import EnergyKind, JumpEnergy, ZeroJump, total_energy, jump_energies
from .permutation import (
    CycleDecomposition,
    PermutationState,
    identity_state,
    apply_swap,
    decompose,
    reverse_cycle,
)

__all__ = [
    "LatticeKind",
    "LatticeSpec",
    "JumpVector",
    "periodic_diff",
    "jump",
    "neighbor_pairs",
    "EnergyKind",
    "JumpEnergy",
    "ZeroJump",
    "total_energy",
    "jump_energies",
    "CycleDecomposition",
    "PermutationState",
    "identity_state",
    "apply_swap",
    "decompose",
    "reverse_cycle",
]
