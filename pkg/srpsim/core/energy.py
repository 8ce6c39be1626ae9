"""
Jump energies xi and their tabulation on the torus
"""

import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Mapping, Tuple

import numpy as np

from ..exceptions import InvalidStateError
from .lattice import LatticeSpec, periodic_diff

logger = logging.getLogger(__name__)


class EnergyKind(Enum):
    QUADRATIC = "quadratic"
    NEAREST_NEIGHBOR = "nearest_neighbor"
    TABULATED = "tabulated"


class ZeroJump(Enum):
    """Treatment of the zero jump (fixed points) for nearest-neighbour-only energies"""
    FORBIDDEN = "forbidden"
    FREE = "free"


@dataclass(frozen=True)
class JumpEnergy:
    """
    Jump energy xi evaluated on periodic differences.

    QUADRATIC:        xi(dz) = |dz|^2 (periodic distance squared)
    NEAREST_NEIGHBOR: |dz|^2 on nearest-neighbour jumps, +inf elsewhere; the
                      zero jump costs 0 (FREE) or +inf (FORBIDDEN)
    TABULATED:        explicit values; missing jumps are forbidden
    """
    kind: EnergyKind = EnergyKind.QUADRATIC
    zero_jump: ZeroJump = ZeroJump.FREE
    entries: Tuple[Tuple[Tuple[int, int], float], ...] = ()

    @classmethod
    def quadratic(cls) -> "JumpEnergy":
        return cls(EnergyKind.QUADRATIC)

    @classmethod
    def nearest_neighbor(cls, zero_jump: ZeroJump = ZeroJump.FORBIDDEN) -> "JumpEnergy":
        return cls(EnergyKind.NEAREST_NEIGHBOR, zero_jump=zero_jump)

    @classmethod
    def tabulated(cls, values: Mapping[Tuple[int, int], float]) -> "JumpEnergy":
        if not values:
            raise InvalidStateError("tabulated jump energy needs at least one entry")
        finite = [v for v in values.values() if math.isfinite(v)]
        if not finite:
            raise InvalidStateError("tabulated jump energy has no finite entry")
        entries = tuple(sorted(((int(k[0]), int(k[1])), float(v)) for k, v in values.items()))
        return cls(EnergyKind.TABULATED, entries=entries)

    @property
    def name(self) -> str:
        if self.kind is EnergyKind.NEAREST_NEIGHBOR:
            return f"{self.kind.value}_{self.zero_jump.value}"
        return self.kind.value

    def value(self, dz: Tuple[int, int], spec: LatticeSpec) -> float:
        """xi at the periodic representative of dz"""
        a = int(periodic_diff(dz[0], 0, spec.L)) % spec.L
        b = int(periodic_diff(dz[1], 0, spec.width)) % spec.width
        return float(self.table(spec)[a, b])

    def table(self, spec: LatticeSpec) -> np.ndarray:
        """
        xi on every periodic difference, shape (L, width).

        Entry [a, b] holds xi of the jump whose lattice components are
        congruent to (a, b).
        """
        return _energy_table(self, spec)

    def zero_energy(self, spec: LatticeSpec) -> float:
        return float(self.table(spec)[0, 0])

    def is_symmetric(self, spec: LatticeSpec) -> bool:
        """Whether xi(dz) == xi(-dz) holds for every torus jump"""
        t = self.table(spec)
        mirrored = t[(-np.arange(spec.L)) % spec.L][:, (-np.arange(spec.width)) % spec.width]
        return bool(np.array_equal(t, mirrored))


@lru_cache(maxsize=64)
def _energy_table(xi: JumpEnergy, spec: LatticeSpec) -> np.ndarray:
    a = np.arange(spec.L)[:, None]
    b = np.arange(spec.width)[None, :]
    dz1 = periodic_diff(a, 0, spec.L) * np.ones_like(b)
    dz2 = periodic_diff(b, 0, spec.width) * np.ones_like(a)
    len2 = spec.len2(dz1, dz2).astype(np.float64)

    if xi.kind is EnergyKind.QUADRATIC:
        table = len2
    elif xi.kind is EnergyKind.NEAREST_NEIGHBOR:
        table = np.full(spec.shape, np.inf)
        for e1, e2 in spec.neighbor_jumps():
            table[e1 % spec.L, e2 % spec.width] = len2[e1 % spec.L, e2 % spec.width]
        if xi.zero_jump is ZeroJump.FREE:
            table[0, 0] = 0.0
    else:
        table = np.full(spec.shape, np.inf)
        for (e1, e2), v in xi.entries:
            table[e1 % spec.L, e2 % spec.width] = v

    table = np.ascontiguousarray(table, dtype=np.float64)
    table.flags.writeable = False
    logger.debug(f"tabulated {xi.name} energy on {spec.L}x{spec.width} torus")
    return table


def total_energy(fwd: np.ndarray, spec: LatticeSpec, xi: JumpEnergy) -> float:
    """H_N(pi) recomputed from scratch"""
    return float(jump_energies(fwd, spec, xi).sum())


def jump_energies(fwd: np.ndarray, spec: LatticeSpec, xi: JumpEnergy) -> np.ndarray:
    """xi(pi(x) - x) for every site"""
    c = spec.coords
    a = (c[fwd, 0] - c[:, 0]) % spec.L
    b = (c[fwd, 1] - c[:, 1]) % spec.width
    return xi.table(spec)[a, b]
