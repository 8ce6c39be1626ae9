"""
Metropolis chain over spatial permutations

Proposals exchange the targets of a uniformly chosen unordered pair of
nearest neighbours and are accepted with probability min(1, exp(-alpha dH)).
The swap-and-reverse move reverses some of the longest cycles with
probability one half each.
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from ..core import kernels
from ..core.energy import JumpEnergy
from ..core.lattice import LatticeSpec
from ..core.permutation import PermutationState
from ..exceptions import ConfigError
from .rng import RngStream

logger = logging.getLogger(__name__)

# Cycles of length <= 2 are their own reversal
MIN_REVERSIBLE_LENGTH = 3


class InitialKind(Enum):
    IDENTITY = "identity"
    FORCED_WINDING = "forced_winding"


@dataclass(frozen=True)
class InitialCondition:
    kind: InitialKind = InitialKind.IDENTITY
    axis: int = 0

    def __post_init__(self):
        if isinstance(self.kind, str):
            object.__setattr__(self, "kind", InitialKind(self.kind))
        if self.axis not in (0, 1):
            raise ConfigError(f"winding axis must be 0 or 1, got {self.axis}")

    @classmethod
    def identity(cls) -> "InitialCondition":
        return cls(InitialKind.IDENTITY)

    @classmethod
    def forced_winding(cls, axis: int = 0) -> "InitialCondition":
        return cls(InitialKind.FORCED_WINDING, axis)


@dataclass(frozen=True)
class ChainConfig:
    """Parameters of one Metropolis chain; alpha = 0 samples uniform permutations"""
    alpha: float
    xi: JumpEnergy = field(default_factory=JumpEnergy.quadratic)
    seed: int = 0
    thermalization_sweeps: int = 100_000
    sweeps_between_samples: int = 10
    reversal_period_sweeps: int = 1
    reversal_count: int = 10
    initial: InitialCondition = field(default_factory=InitialCondition)
    trace_every: int = 1

    def __post_init__(self):
        if not math.isfinite(self.alpha) or self.alpha < 0:
            raise ConfigError(f"alpha must be finite and >= 0, got {self.alpha}")
        counts = {
            "thermalization_sweeps": self.thermalization_sweeps,
            "sweeps_between_samples": self.sweeps_between_samples,
            "reversal_period_sweeps": self.reversal_period_sweeps,
            "reversal_count": self.reversal_count,
            "trace_every": self.trace_every,
        }
        for name, value in counts.items():
            if int(value) != value or value < 0:
                raise ConfigError(f"{name} must be a non-negative integer, got {value}")
        if not 0 <= self.seed < 2 ** 64:
            raise ConfigError("seed must fit in 64 bits")

    @property
    def sample_interval(self) -> int:
        """Sweeps between samples; 0 is read as 1"""
        return max(1, self.sweeps_between_samples)

    def is_reversal_sweep(self, sweep_index: int) -> bool:
        period = self.reversal_period_sweeps
        return period > 0 and sweep_index % period == 0

    def is_sample_sweep(self, sweep_index: int) -> bool:
        past = sweep_index - self.thermalization_sweeps
        return past > 0 and past % self.sample_interval == 0

    def samples_taken(self, sweeps_done: int) -> int:
        """Number of samples recorded by the end of sweep ``sweeps_done``"""
        return max(0, sweeps_done - self.thermalization_sweeps) // self.sample_interval


def delta_h(state: PermutationState, x: int, y: int) -> float:
    """H(pi') - H(pi) for exchanging the targets of x and y"""
    return state.delta_h(x, y)


def _run_steps(state: PermutationState, alpha: float, picks: np.ndarray, uniforms: np.ndarray) -> int:
    pairs = state.spec.neighbor_pairs
    accepted, delta = kernels.metropolis_sweep(
        state.fwd, state.inv, state.c1, state.c2, state.spec.L, state.spec.width,
        state.table, pairs, picks, uniforms, float(alpha),
    )
    state.record_moves(int(accepted), float(delta))
    return int(accepted)


def metropolis_step(state: PermutationState, cfg: ChainConfig, rng: RngStream) -> bool:
    pick = rng.integers(len(state.spec.neighbor_pairs), 1)
    u = rng.random(1)
    return _run_steps(state, cfg.alpha, pick, u) == 1


def sweep(state: PermutationState, cfg: ChainConfig, rng: RngStream) -> int:
    """
    N Metropolis steps. Pair indices and uniforms for the whole sweep are
    drawn up front, pairs first.
    """
    n = state.spec.N
    picks = rng.integers(len(state.spec.neighbor_pairs), n)
    uniforms = rng.random(n)
    return _run_steps(state, cfg.alpha, picks, uniforms)


def reversal_probability(alpha: float, delta: float) -> float:
    """Fair coin corrected by the energy change of the reversal"""
    if math.isinf(delta):
        return 0.0
    if delta <= 0.0:
        return 0.5
    return 0.5 * math.exp(-alpha * delta)


def swap_and_reverse(state: PermutationState, cfg: ChainConfig, rng: RngStream) -> int:
    """
    Reverse each of the ``reversal_count`` longest non-trivial cycles with
    probability 1/2 (times the Metropolis factor for asymmetric xi).

    Ties are broken by smallest minimal site. Returns the number of cycles reversed.
    """
    if cfg.reversal_count == 0:
        return 0
    decomposition = state.decompose()
    chosen = decomposition.longest(cfg.reversal_count, min_length=MIN_REVERSIBLE_LENGTH)
    if len(chosen) == 0:
        return 0
    coins = rng.random(len(chosen))

    reversed_count = 0
    for cycle_id, u in zip(chosen.tolist(), coins.tolist()):
        d = state.reversal_delta(decomposition, cycle_id)
        if u < reversal_probability(cfg.alpha, d):
            state.reverse_cycle(decomposition, cycle_id)
            reversed_count += 1
        elif math.isinf(d):
            logger.debug(f"reversal of cycle {cycle_id} skipped: reversed jumps are forbidden")
    return reversed_count


def forced_winding_init(spec: LatticeSpec, xi: JumpEnergy, axis: int = 0) -> PermutationState:
    """
    One nearest-neighbour cycle through the row (axis 0) or column (axis 1)
    of the origin, all other sites fixed.
    """
    if axis not in (0, 1):
        raise ConfigError(f"winding axis must be 0 or 1, got {axis}")
    fwd = np.arange(spec.N, dtype=np.int64)
    if axis == 0:
        steps = np.arange(spec.L)
        fwd[spec.encode(steps, 0)] = spec.encode(steps + 1, 0)
    else:
        steps = np.arange(spec.width)
        fwd[spec.encode(0, steps)] = spec.encode(0, steps + 1)
    state = PermutationState(fwd, spec, xi, validate=False)
    logger.debug(f"forced winding start along axis {axis}, energy {state.energy:.6g}")
    return state


def initial_state(spec: LatticeSpec, cfg: ChainConfig) -> PermutationState:
    if cfg.initial.kind is InitialKind.FORCED_WINDING:
        return forced_winding_init(spec, cfg.xi, cfg.initial.axis)
    return PermutationState.identity(spec, cfg.xi)


def is_parity_locked(spec: LatticeSpec, cfg: ChainConfig) -> bool:
    """
    At alpha = 0 every allowed proposal is accepted and flips the parity, so
    samples taken an even number of steps apart share one parity class.
    """
    if cfg.alpha != 0 or not np.all(np.isfinite(cfg.xi.table(spec))):
        return False
    return (spec.N * cfg.sample_interval) % 2 == 0
