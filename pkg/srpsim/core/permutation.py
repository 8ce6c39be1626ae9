"""
Permutation state with inverse tracking, incremental energy and cycle decomposition
"""

import logging
import math
from dataclasses import dataclass
from typing import List, Optional

import numpy as np

from ..exceptions import InvalidStateError, StaleCycleError
from . import kernels
from .energy import JumpEnergy
from .lattice import LatticeSpec

logger = logging.getLogger(__name__)

# Accepted moves between from-scratch energy resynchronisations
RESYNC_INTERVAL = 1_000_000


@dataclass
class CycleDecomposition:
    """
    Cycles of a permutation in compressed form.

    Cycle k is ``order[offsets[k]:offsets[k + 1]]`` in traversal order
    (fwd[c[j]] == c[j + 1]); cycles are numbered by their minimal site.
    Ids are valid only for the state version they were computed from.
    """
    cycle_of: np.ndarray
    order: np.ndarray
    offsets: np.ndarray
    version: int

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(self.offsets)

    @property
    def n_cycles(self) -> int:
        return len(self.offsets) - 1

    def cycle(self, cycle_id: int) -> np.ndarray:
        return self.order[self.offsets[cycle_id]:self.offsets[cycle_id + 1]]

    @property
    def cycles(self) -> List[np.ndarray]:
        return [self.cycle(k) for k in range(self.n_cycles)]

    def longest(self, count: int, min_length: int = 1) -> np.ndarray:
        """
        Ids of the ``count`` longest cycles with at least ``min_length`` sites,
        ordered by length descending, then minimal site ascending.
        """
        lengths = self.lengths
        ranked = np.argsort(-lengths, kind="stable")
        ranked = ranked[lengths[ranked] >= min_length]
        return ranked[:count]

    def length_of(self, x: int) -> int:
        return int(self.lengths[self.cycle_of[x]])


class PermutationState:
    """
    A permutation pi of the torus sites with cached total energy H_N(pi).

    ``fwd[x] = pi(x)`` and ``inv[pi(x)] = x``. Single writer; every mutation
    bumps ``version`` so that stale cycle ids are detected.
    """

    def __init__(self, fwd: np.ndarray, spec: LatticeSpec, xi: JumpEnergy,
                 energy: Optional[float] = None, validate: bool = True):
        self.spec = spec
        self.xi = xi
        self.fwd = np.ascontiguousarray(fwd, dtype=np.int64).copy()
        if validate:
            self._validate_bijection()
        self.inv = np.empty_like(self.fwd)
        self.inv[self.fwd] = np.arange(spec.N, dtype=np.int64)
        self.table = xi.table(spec)
        self.c1 = np.ascontiguousarray(spec.coords[:, 0])
        self.c2 = np.ascontiguousarray(spec.coords[:, 1])
        self.energy = self.recompute_energy() if energy is None else float(energy)
        if not math.isfinite(self.energy):
            raise InvalidStateError("permutation has infinite energy under this jump energy")
        self.version = 0
        self.moves_since_resync = 0

    # -- construction ---------------------------------------------------------

    @classmethod
    def identity(cls, spec: LatticeSpec, xi: JumpEnergy) -> "PermutationState":
        if not math.isfinite(xi.zero_energy(spec)):
            raise InvalidStateError(f"identity start is impossible: xi(0) is infinite for {xi.name}")
        return cls(np.arange(spec.N, dtype=np.int64), spec, xi, validate=False)

    @classmethod
    def from_targets(cls, fwd, spec: LatticeSpec, xi: JumpEnergy) -> "PermutationState":
        return cls(np.asarray(fwd), spec, xi)

    @classmethod
    def random(cls, spec: LatticeSpec, xi: JumpEnergy, rng: np.random.Generator) -> "PermutationState":
        """Uniformly random permutation; only meaningful for everywhere-finite xi"""
        return cls(rng.permutation(spec.N).astype(np.int64), spec, xi, validate=False)

    def copy(self) -> "PermutationState":
        clone = PermutationState(self.fwd, self.spec, self.xi, energy=self.energy, validate=False)
        clone.version = self.version
        clone.moves_since_resync = self.moves_since_resync
        return clone

    def _validate_bijection(self):
        n = self.spec.N
        if self.fwd.shape != (n,):
            raise InvalidStateError(f"target array must have shape ({n},), got {self.fwd.shape}")
        if self.fwd.min(initial=0) < 0 or self.fwd.max(initial=0) >= n:
            raise InvalidStateError("target out of range")
        if len(np.unique(self.fwd)) != n:
            raise InvalidStateError("targets do not form a bijection")

    # -- energy bookkeeping -----------------------------------------------------

    def recompute_energy(self) -> float:
        return float(kernels.total_energy(self.fwd, self.c1, self.c2,
                                          self.spec.L, self.spec.width, self.table))

    def resync(self):
        drift = self.recompute_energy() - self.energy
        self.energy += drift
        self.moves_since_resync = 0
        logger.debug(f"energy resynchronised, drift {drift:.3e}")

    def record_moves(self, accepted: int, delta: float):
        """Account for moves applied directly to ``fwd``/``inv`` by a kernel"""
        if accepted:
            self.energy += delta
            self.version += 1
            self.moves_since_resync += accepted
            if self.moves_since_resync >= RESYNC_INTERVAL:
                self.resync()

    # -- moves ------------------------------------------------------------------

    def delta_h(self, x: int, y: int) -> float:
        return float(kernels.swap_delta(self.fwd, self.c1, self.c2,
                                        self.spec.L, self.spec.width, self.table, x, y))

    def apply_swap(self, x: int, y: int) -> float:
        """Exchange the targets of x and y; a no-op when x == y. Returns the energy change"""
        if x == y:
            return 0.0
        d = self.delta_h(x, y)
        if math.isinf(d):
            raise InvalidStateError(f"swapping targets of {x} and {y} creates a forbidden jump")
        px, py = self.fwd[x], self.fwd[y]
        self.fwd[x], self.fwd[y] = py, px
        self.inv[py], self.inv[px] = x, y
        self.record_moves(1, d)
        return d

    def decompose(self) -> CycleDecomposition:
        cycle_of, order, offsets = kernels.cycle_labels(self.fwd)
        return CycleDecomposition(cycle_of=cycle_of, order=order, offsets=offsets, version=self.version)

    def _check_fresh(self, decomposition: CycleDecomposition, cycle_id: int):
        if decomposition.version != self.version:
            raise StaleCycleError(
                f"decomposition of version {decomposition.version} used on state version {self.version}"
            )
        if not 0 <= cycle_id < decomposition.n_cycles:
            raise StaleCycleError(f"no cycle with id {cycle_id}")

    def reversal_delta(self, decomposition: CycleDecomposition, cycle_id: int) -> float:
        members = decomposition.cycle(cycle_id)
        if len(members) <= 2:
            return 0.0
        return float(kernels.reversal_delta(members, self.c1, self.c2,
                                            self.spec.L, self.spec.width, self.table))

    def reverse_cycle(self, decomposition: CycleDecomposition, cycle_id: int) -> float:
        """
        Traverse one cycle backwards. Returns the energy change, which is zero
        for symmetric jump energies.
        """
        self._check_fresh(decomposition, cycle_id)
        d = self.reversal_delta(decomposition, cycle_id)
        if math.isinf(d):
            raise InvalidStateError(f"reversing cycle {cycle_id} creates a forbidden jump")
        self._reverse(decomposition.cycle(cycle_id), d)
        # reversal keeps every cycle's site set and minimal site
        decomposition.version = self.version
        return d

    def _reverse(self, members: np.ndarray, delta: float):
        if len(members) <= 2:
            return
        kernels.reverse_members(self.fwd, self.inv, members)
        members[:] = np.concatenate([members[:1], members[:0:-1]])
        self.energy += delta
        self.version += 1

    # -- checks -----------------------------------------------------------------

    def is_consistent(self, tolerance: Optional[float] = None) -> bool:
        """Bijection, inverse and energy bookkeeping all agree"""
        n = self.spec.N
        ids = np.arange(n)
        if not (np.array_equal(self.inv[self.fwd], ids) and np.array_equal(self.fwd[self.inv], ids)):
            return False
        tol = 1e-9 * n if tolerance is None else tolerance
        return abs(self.recompute_energy() - self.energy) <= tol


def identity_state(spec: LatticeSpec, xi: JumpEnergy) -> PermutationState:
    return PermutationState.identity(spec, xi)


def apply_swap(state: PermutationState, x: int, y: int) -> PermutationState:
    state.apply_swap(x, y)
    return state


def decompose(state: PermutationState) -> CycleDecomposition:
    return state.decompose()


def reverse_cycle(state: PermutationState, decomposition: CycleDecomposition,
                  cycle_id: int) -> PermutationState:
    state.reverse_cycle(decomposition, cycle_id)
    return state
