"""
Observables of sampled permutations: cycle-length tail, winding, jump
statistics, specific heat proxy and pair correlation
"""

import logging
from dataclasses import dataclass, field
from typing import Iterable, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..core.lattice import LatticeSpec
from ..core.permutation import CycleDecomposition, PermutationState
from ..exceptions import EstimationError, WindingConsistencyError

logger = logging.getLogger(__name__)

# Exponent grid {k/100 : 1 <= k < 100} for thresholds K = N^gamma
DEFAULT_GAMMAS = np.arange(1, 100) / 100.0


@dataclass
class NuCurve:
    """Estimated fraction of sites in cycles longer than K"""
    thresholds: np.ndarray
    values: np.ndarray
    stderr: np.ndarray
    sample_count: int
    gamma_grid: Optional[np.ndarray] = None

    @classmethod
    def from_values(cls, thresholds, values, sample_count: int = 1) -> "NuCurve":
        """Curve from given (K, nu) values, e.g. synthetic or read from a table"""
        k = np.asarray(thresholds, dtype=np.float64)
        v = np.asarray(values, dtype=np.float64)
        if k.shape != v.shape:
            raise EstimationError("thresholds and values differ in length")
        return cls(k, v, np.zeros_like(v), sample_count)

    def to_frame(self) -> pd.DataFrame:
        frame = pd.DataFrame({"K": self.thresholds, "nu": self.values, "stderr": self.stderr})
        if self.gamma_grid is not None:
            frame.insert(0, "gamma", self.gamma_grid)
        return frame

    def is_monotone(self) -> bool:
        return bool(np.all(np.diff(self.values) <= 0))


def _check_thresholds(thresholds) -> np.ndarray:
    k = np.asarray(thresholds, dtype=np.float64)
    if k.ndim != 1 or len(k) == 0:
        raise EstimationError("threshold grid must be a non-empty 1-d sequence")
    if np.any(k < 0) or np.any(np.diff(k) <= 0):
        raise EstimationError("thresholds must be non-negative and strictly ascending")
    return k


class NuAccumulator:
    """
    Streaming estimator of nu(K); keeps running sums, not the samples.
    With `site` set, each sample contributes the indicator that this one
    site lies in a cycle longer than K instead of the all-site fraction.
    """

    def __init__(self, thresholds, gamma_grid: Optional[np.ndarray] = None, site: Optional[int] = None):
        self.thresholds = _check_thresholds(thresholds)
        self.gamma_grid = gamma_grid
        if site is not None and site < 0:
            raise EstimationError(f"site must be non-negative, got {site}")
        self.site = site
        self.count = 0
        self._sum = np.zeros(len(self.thresholds))
        self._sum_sq = np.zeros(len(self.thresholds))

    def fractions(self, decomposition: CycleDecomposition) -> np.ndarray:
        """Per-sample fraction of sites with cycle length > K for every K"""
        if self.site is not None:
            return (decomposition.length_of(self.site) > self.thresholds).astype(np.float64)
        site_lengths = np.sort(decomposition.lengths[decomposition.cycle_of])
        n = len(site_lengths)
        at_most = np.searchsorted(site_lengths, self.thresholds, side="right")
        return (n - at_most) / n

    def update(self, decomposition: CycleDecomposition):
        f = self.fractions(decomposition)
        self._sum += f
        self._sum_sq += f * f
        self.count += 1

    def merge(self, other: "NuAccumulator"):
        if not np.array_equal(self.thresholds, other.thresholds):
            raise EstimationError("cannot merge nu estimates on different threshold grids")
        if self.site != other.site:
            raise EstimationError("cannot merge single-site and all-site nu estimates")
        self._sum += other._sum
        self._sum_sq += other._sum_sq
        self.count += other.count

    def result(self) -> NuCurve:
        if self.count == 0:
            raise EstimationError("nu curve needs at least one sample")
        mean = self._sum / self.count
        if self.count > 1:
            var = np.maximum(self._sum_sq / self.count - mean * mean, 0.0) * self.count / (self.count - 1)
            stderr = np.sqrt(var / self.count)
        else:
            stderr = np.zeros_like(mean)
        return NuCurve(self.thresholds.copy(), mean, stderr, self.count, self.gamma_grid)


def nu_curve(samples: Iterable[CycleDecomposition], thresholds,
             gamma_grid: Optional[np.ndarray] = None, site: Optional[int] = None) -> NuCurve:
    acc = NuAccumulator(thresholds, gamma_grid, site)
    for decomposition in samples:
        acc.update(decomposition)
    return acc.result()


def linear_grid(kmin: int = 1, kmax: int = 2000, step: int = 1) -> np.ndarray:
    if kmin < 0 or kmax < kmin or step <= 0:
        raise EstimationError(f"invalid linear grid [{kmin}, {kmax}] step {step}")
    return np.arange(kmin, kmax + 1, step, dtype=np.float64)


def gamma_grid(N: int, gammas: Optional[Sequence[float]] = None) -> Tuple[np.ndarray, np.ndarray]:
    """Thresholds N^gamma and the exponents that produced them"""
    g = DEFAULT_GAMMAS if gammas is None else np.asarray(gammas, dtype=np.float64)
    return float(N) ** g, g


# -- jumps ---------------------------------------------------------------------

def jump_lengths(state: PermutationState) -> np.ndarray:
    dz1, dz2 = state.spec.jump_arrays(state.fwd)
    return np.sqrt(state.spec.len2(dz1, dz2))


def long_jump_fraction(state: PermutationState, x: int, D: float,
                       decomposition: Optional[CycleDecomposition] = None) -> float:
    """Fraction of jumps longer than D (strictly) along the cycle of x"""
    state.spec._check_index(x)
    decomposition = decomposition or state.decompose()
    members = decomposition.cycle(decomposition.cycle_of[x])
    return float(np.mean(jump_lengths(state)[members] > D))


def jump_length_histogram(states: Iterable[np.ndarray], spec: LatticeSpec, x: int) -> pd.Series:
    """Empirical law of the jump pi(x) - x, indexed by (dz1, dz2)"""
    rows = []
    for fwd in states:
        dz1, dz2 = spec.jump_components(x, fwd[x])
        rows.append((int(dz1), int(dz2)))
    if not rows:
        raise EstimationError("jump histogram needs at least one sample")
    frame = pd.DataFrame(rows, columns=["dz1", "dz2"])
    return frame.value_counts(normalize=True).sort_index().rename("probability")


def cycle_length_histogram(samples: Sequence[CycleDecomposition], x: int, N: int) -> np.ndarray:
    """Empirical P(l_x = k) for k = 1..N, returned at index k - 1"""
    if len(samples) == 0:
        raise EstimationError("cycle length histogram needs at least one sample")
    lengths = np.array([s.length_of(x) for s in samples])
    return np.bincount(lengths, minlength=N + 1)[1:N + 1] / len(samples)


# -- winding -------------------------------------------------------------------

@dataclass(frozen=True)
class WindingRecord:
    w: Tuple[int, int]
    w_abs: float


def winding(state: PermutationState, decomposition: Optional[CycleDecomposition] = None) -> WindingRecord:
    """
    Winding vector (sum of jumps over the side length) and absolute winding
    (sum over cycles of the Euclidean norm of each cycle's winding vector)
    """
    spec = state.spec
    decomposition = decomposition or state.decompose()
    dz1, dz2 = spec.jump_arrays(state.fwd)
    n_cycles = decomposition.n_cycles
    per1 = np.bincount(decomposition.cycle_of, weights=dz1, minlength=n_cycles).astype(np.int64)
    per2 = np.bincount(decomposition.cycle_of, weights=dz2, minlength=n_cycles).astype(np.int64)
    if np.any(per1 % spec.L) or np.any(per2 % spec.width):
        raise WindingConsistencyError("cycle jump sum is not a multiple of the side length")
    w1, w2 = per1 // spec.L, per2 // spec.width
    w_abs = float(np.sum(np.hypot(w1, w2)))
    return WindingRecord(w=(int(w1.sum()), int(w2.sum())), w_abs=w_abs)


# -- scalars -------------------------------------------------------------------

@dataclass(frozen=True)
class ScalarObservables:
    avg_jump_length: float
    energy_per_site: float
    max_cycle_length: int
    max_cycle_arc_length: float

    def as_dict(self) -> dict:
        return {
            "avg_jump_length": self.avg_jump_length,
            "energy_per_site": self.energy_per_site,
            "max_cycle_length": self.max_cycle_length,
            "max_cycle_arc_length": self.max_cycle_arc_length,
        }


def scalar_observables(state: PermutationState,
                       decomposition: Optional[CycleDecomposition] = None) -> ScalarObservables:
    decomposition = decomposition or state.decompose()
    lengths = jump_lengths(state)
    longest = int(decomposition.longest(1)[0])
    members = decomposition.cycle(longest)
    return ScalarObservables(
        avg_jump_length=float(lengths.mean()),
        energy_per_site=state.energy / state.spec.N,
        max_cycle_length=len(members),
        max_cycle_arc_length=float(lengths[members].sum()),
    )


def longest_cycle_points(state: PermutationState,
                         decomposition: Optional[CycleDecomposition] = None) -> np.ndarray:
    """Lattice coordinates of the sites of the longest cycle, shape (n, 2)"""
    decomposition = decomposition or state.decompose()
    members = decomposition.cycle(int(decomposition.longest(1)[0]))
    return state.spec.coords[members]


def specific_heat_proxy(alpha, energy_per_site) -> pd.DataFrame:
    """
    C/N = -alpha^2 dE/dalpha from mean energy per site on an ascending
    alpha grid; second-order differences, one-sided at the endpoints.
    Returns columns alpha and c_per_site.
    """
    a = np.asarray(alpha, dtype=np.float64)
    e = np.asarray(energy_per_site, dtype=np.float64)
    if a.shape != e.shape or a.ndim != 1:
        raise EstimationError("alpha and energy series must be 1-d and of equal length")
    if len(a) < 3:
        raise EstimationError("specific heat proxy needs at least 3 alpha points")
    if np.any(np.diff(a) <= 0):
        raise EstimationError("alpha grid must be strictly ascending")
    return pd.DataFrame({"alpha": a, "c_per_site": -a * a * np.gradient(e, a, edge_order=2)})


def pair_correlation(samples: Sequence[CycleDecomposition], x: int, y: int) -> float:
    """Frequency with which x and y lie in the same cycle"""
    if len(samples) == 0:
        raise EstimationError("pair correlation needs at least one sample")
    return float(np.mean([s.cycle_of[x] == s.cycle_of[y] for s in samples]))


@dataclass
class PairCounter:
    """Streaming pair correlation at fixed site pairs"""
    pairs: List[Tuple[int, int]] = field(default_factory=list)
    count: int = 0
    hits: np.ndarray = field(default=None)

    def __post_init__(self):
        if self.hits is None:
            self.hits = np.zeros(len(self.pairs), dtype=np.int64)

    def update(self, decomposition: CycleDecomposition):
        c = decomposition.cycle_of
        for i, (x, y) in enumerate(self.pairs):
            self.hits[i] += c[x] == c[y]
        self.count += 1

    def to_frame(self) -> pd.DataFrame:
        mu = self.hits / self.count if self.count else np.full(len(self.pairs), np.nan)
        return pd.DataFrame({
            "x": [p[0] for p in self.pairs],
            "y": [p[1] for p in self.pairs],
            "mu": mu,
        })
