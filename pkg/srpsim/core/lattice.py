"""
Periodic regular lattice geometry: site indexing, periodic differences and
nearest-neighbour structure of the torus X_L
"""

import logging
from dataclasses import dataclass
from enum import Enum
from functools import cached_property
from typing import Optional, Tuple, Union

import numpy as np

from ..exceptions import InvalidLatticeError

logger = logging.getLogger(__name__)

# Side of the triangular fundamental triangle; keeps the large-scale density at one
TRIANGULAR_SPACING = (4.0 / 3.0) ** 0.25

MIN_SIDE = 2

IntLike = Union[int, np.ndarray]


class LatticeKind(Enum):
    """Regular planar lattices supported by the simulator"""
    SQUARE = "square"
    TRIANGULAR = "triangular"


# Half of the neighbour offsets in lattice coordinates; the other half are the negatives
_NEIGHBOR_OFFSETS = {
    LatticeKind.SQUARE: ((1, 0), (0, 1)),
    LatticeKind.TRIANGULAR: ((1, 0), (0, 1), (-1, 1)),
}


def periodic_diff(z: IntLike, w: IntLike, L: int) -> IntLike:
    """
    Periodic difference (z - w)_per, the representative of z - w in
    Z ∩ [-L/2, L/2).

    Works elementwise on numpy integer arrays.
    """
    if L <= 0:
        raise InvalidLatticeError(f"side length must be positive, got {L}")
    half = L // 2
    return (z - w + half) % L - half


@dataclass(frozen=True)
class JumpVector:
    """Jump between two sites in lattice and Euclidean coordinates"""
    dz: Tuple[int, int]
    r: Tuple[float, float]
    len2: float


@dataclass(frozen=True)
class LatticeSpec:
    """
    Geometry of the periodic torus X_L.

    Sites carry lattice coordinates (z1, z2) in [0, L) x [0, width) and the
    index i = z1 + L * z2. ``width`` defaults to ``L``; rectangular tori are
    only used for exact enumeration on tiny instances.
    """
    kind: LatticeKind
    L: int
    width: Optional[int] = None

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", LatticeKind(self.kind))
        if self.width is None:
            object.__setattr__(self, "width", self.L)
        for side in (self.L, self.width):
            if int(side) != side or side < MIN_SIDE:
                raise InvalidLatticeError(
                    f"lattice sides must be integers >= {MIN_SIDE}, got {self.L}x{self.width}"
                )

    @classmethod
    def square(cls, L: int, width: Optional[int] = None) -> "LatticeSpec":
        return cls(LatticeKind.SQUARE, L, width)

    @classmethod
    def triangular(cls, L: int, width: Optional[int] = None) -> "LatticeSpec":
        return cls(LatticeKind.TRIANGULAR, L, width)

    @property
    def N(self) -> int:
        return self.L * self.width

    @property
    def shape(self) -> Tuple[int, int]:
        return (self.L, self.width)

    @property
    def is_square_domain(self) -> bool:
        return self.L == self.width

    @property
    def spacing(self) -> float:
        """Nearest-neighbour distance"""
        return 1.0 if self.kind is LatticeKind.SQUARE else TRIANGULAR_SPACING

    @cached_property
    def basis(self) -> np.ndarray:
        """Basis vectors v1, v2 as rows"""
        if self.kind is LatticeKind.SQUARE:
            basis = np.array([[1.0, 0.0], [0.0, 1.0]])
        else:
            s = TRIANGULAR_SPACING
            basis = np.array([[s, 0.0], [s / 2.0, s * np.sqrt(3.0) / 2.0]])
        basis.flags.writeable = False
        return basis

    @cached_property
    def gram(self) -> np.ndarray:
        """Gram matrix of the basis, written exactly for both kinds"""
        if self.kind is LatticeKind.SQUARE:
            gram = np.array([[1.0, 0.0], [0.0, 1.0]])
        else:
            s2 = TRIANGULAR_SPACING ** 2
            gram = np.array([[s2, s2 / 2.0], [s2 / 2.0, s2]])
        gram.flags.writeable = False
        return gram

    @property
    def neighbor_offsets(self) -> Tuple[Tuple[int, int], ...]:
        return _NEIGHBOR_OFFSETS[self.kind]

    @property
    def coordination(self) -> int:
        return 2 * len(self.neighbor_offsets)

    # -- indexing -----------------------------------------------------------

    def encode(self, z1: IntLike, z2: IntLike) -> IntLike:
        """Site index of lattice coordinates, reducing them onto the torus first"""
        return np.mod(z1, self.L) + self.L * np.mod(z2, self.width)

    def decode(self, i: IntLike) -> Tuple[IntLike, IntLike]:
        """Lattice coordinates in [0, L) x [0, width) of a site index"""
        self._check_index(i)
        return i % self.L, i // self.L

    def _check_index(self, i: IntLike):
        if np.any(np.asarray(i) < 0) or np.any(np.asarray(i) >= self.N):
            raise InvalidLatticeError(f"site index out of range [0, {self.N})")

    @cached_property
    def coords(self) -> np.ndarray:
        """Lattice coordinates of all sites, shape (N, 2)"""
        idx = np.arange(self.N, dtype=np.int64)
        coords = np.stack([idx % self.L, idx // self.L], axis=1)
        coords.flags.writeable = False
        return coords

    def positions(self) -> np.ndarray:
        """Euclidean coordinates of all sites, shape (N, 2)"""
        return self.coords @ self.basis

    # -- jumps --------------------------------------------------------------

    def len2(self, dz1: IntLike, dz2: IntLike):
        """Squared Euclidean length of dz1 * v1 + dz2 * v2"""
        g = self.gram
        return g[0, 0] * dz1 * dz1 + 2.0 * g[0, 1] * dz1 * dz2 + g[1, 1] * dz2 * dz2

    def jump_components(self, src: IntLike, dst: IntLike) -> Tuple[IntLike, IntLike]:
        """Periodic lattice-coordinate difference dst - src, componentwise"""
        c = self.coords
        dz1 = periodic_diff(c[dst, 0], c[src, 0], self.L)
        dz2 = periodic_diff(c[dst, 1], c[src, 1], self.width)
        return dz1, dz2

    def jump_arrays(self, fwd: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
        """dz components of every jump pi(x) - x of a permutation"""
        return self.jump_components(np.arange(self.N), fwd)

    # -- neighbours -----------------------------------------------------------

    @cached_property
    def neighbor_pairs(self) -> np.ndarray:
        """
        Unordered nearest-neighbour pairs (a, b) with a < b, shape (P, 2).

        On a side of length 2 the +e and -e neighbours coincide and the
        duplicate pair is kept once.
        """
        c = self.coords
        found = set()
        for e1, e2 in self.neighbor_offsets:
            other = self.encode(c[:, 0] + e1, c[:, 1] + e2)
            for a, b in zip(range(self.N), other.tolist()):
                if a != b:
                    found.add((min(a, b), max(a, b)))
        pairs = np.array(sorted(found), dtype=np.int64).reshape(-1, 2)
        pairs.flags.writeable = False
        logger.debug(f"{self.kind.value} {self.L}x{self.width}: {len(pairs)} neighbour pairs")
        return pairs

    @cached_property
    def neighbor_table(self) -> Tuple[Tuple[int, ...], ...]:
        """Distinct neighbours of every site, ascending"""
        table = [set() for _ in range(self.N)]
        for a, b in self.neighbor_pairs.tolist():
            table[a].add(b)
            table[b].add(a)
        return tuple(tuple(sorted(t)) for t in table)

    def neighbor_jumps(self) -> Tuple[Tuple[int, int], ...]:
        """Periodic representatives of all nearest-neighbour jumps"""
        reps = set()
        for e1, e2 in self.neighbor_offsets:
            for sign in (1, -1):
                reps.add((int(periodic_diff(sign * e1, 0, self.L)),
                          int(periodic_diff(sign * e2, 0, self.width))))
        return tuple(sorted(reps))


def jump(x: int, y: int, spec: LatticeSpec) -> JumpVector:
    """Jump (x - y)_per between two sites"""
    spec._check_index(x)
    spec._check_index(y)
    dz1, dz2 = spec.jump_components(y, x)
    dz1, dz2 = int(dz1), int(dz2)
    r = dz1 * spec.basis[0] + dz2 * spec.basis[1]
    return JumpVector(dz=(dz1, dz2), r=(float(r[0]), float(r[1])), len2=float(spec.len2(dz1, dz2)))


def neighbor_pairs(spec: LatticeSpec) -> np.ndarray:
    """All unordered nearest-neighbour pairs of the torus"""
    return spec.neighbor_pairs
