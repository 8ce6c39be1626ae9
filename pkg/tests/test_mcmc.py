"""
Tests for Metropolis moves, the swap-and-reverse pass and chain scheduling
"""

import math

import numpy as np
import pytest

from srpsim.analysis.observables import winding
from srpsim.core.energy import JumpEnergy
from srpsim.core.lattice import LatticeSpec
from srpsim.core.permutation import PermutationState, identity_state
from srpsim.exceptions import ConfigError, InvalidStateError
from srpsim.sampling import mcmc
from srpsim.sampling.mcmc import ChainConfig, InitialCondition, forced_winding_init
from srpsim.sampling.rng import RngStream
from srpsim.sampling.runner import Chain
from srpsim.validation.oracle import enumerate_ensemble, exact_acceptance_rate


class HeadsRng:
    """Every coin comes up heads"""

    def random(self, size=None):
        return np.zeros(size)


class TestChainConfig:
    """Validation and schedule arithmetic"""

    def test_rejects_negative_alpha(self):
        with pytest.raises(ConfigError):
            ChainConfig(alpha=-0.1)

    def test_rejects_bad_counts(self):
        with pytest.raises(ConfigError):
            ChainConfig(alpha=1.0, reversal_count=-1)
        with pytest.raises(ConfigError):
            ChainConfig(alpha=1.0, seed=2 ** 64)

    def test_schedule(self):
        cfg = ChainConfig(alpha=1.0, thermalization_sweeps=100, sweeps_between_samples=10,
                          reversal_period_sweeps=3)
        assert cfg.is_reversal_sweep(3) and not cfg.is_reversal_sweep(4)
        assert not cfg.is_sample_sweep(100)
        assert cfg.is_sample_sweep(110) and not cfg.is_sample_sweep(105)
        assert cfg.samples_taken(99) == 0
        assert cfg.samples_taken(125) == 2

    def test_zero_interval_reads_as_one(self):
        cfg = ChainConfig(alpha=1.0, thermalization_sweeps=0, sweeps_between_samples=0)
        assert cfg.sample_interval == 1
        assert cfg.samples_taken(5) == 5


class TestMetropolis:
    """Single steps and sweeps"""

    def test_delta_h_matches_recomputation(self, quadratic, rng):
        spec = LatticeSpec.square(8)
        state = PermutationState.random(spec, quadratic, rng)
        pairs = spec.neighbor_pairs
        e0 = state.recompute_energy()
        for k in rng.integers(0, len(pairs), 1000):
            x, y = (int(v) for v in pairs[k])
            trial = state.copy()
            trial.apply_swap(x, y)
            assert mcmc.delta_h(state, x, y) == pytest.approx(trial.recompute_energy() - e0, abs=1e-12)

    def test_alpha_zero_accepts_everything(self, quadratic):
        spec = LatticeSpec.square(4)
        state = identity_state(spec, quadratic)
        cfg = ChainConfig(alpha=0.0)
        assert mcmc.sweep(state, cfg, RngStream(3)) == 16
        assert state.is_consistent()

    def test_huge_alpha_rejects_from_identity(self, quadratic):
        spec = LatticeSpec.square(4)
        state = identity_state(spec, quadratic)
        assert mcmc.sweep(state, ChainConfig(alpha=1e6), RngStream(3)) == 0
        assert np.array_equal(state.fwd, np.arange(16))

    def test_sweep_deterministic(self, quadratic):
        spec = LatticeSpec.square(6)
        results = []
        for _ in range(2):
            state = identity_state(spec, quadratic)
            rng = RngStream(11, stream=2)
            counts = [mcmc.sweep(state, ChainConfig(alpha=0.7), rng) for _ in range(5)]
            results.append((counts, state.fwd.copy()))
        assert results[0][0] == results[1][0]
        assert np.array_equal(results[0][1], results[1][1])

    def test_streams_differ(self, quadratic):
        spec = LatticeSpec.square(6)
        a, b = identity_state(spec, quadratic), identity_state(spec, quadratic)
        for _ in range(5):
            mcmc.sweep(a, ChainConfig(alpha=0.3), RngStream(11, 0))
            mcmc.sweep(b, ChainConfig(alpha=0.3), RngStream(11, 1))
        assert not np.array_equal(a.fwd, b.fwd)

    @pytest.mark.slow
    def test_acceptance_rate_matches_exact_kernel(self, quadratic):
        spec = LatticeSpec.square(2)
        cfg = ChainConfig(alpha=1.0)
        state = identity_state(spec, quadratic)
        rng = RngStream(5)
        for _ in range(2000):
            mcmc.sweep(state, cfg, rng)
        steps = 1_000_000
        accepted = 0
        for _ in range(steps // spec.N):
            accepted += mcmc.sweep(state, cfg, rng)
        rate = accepted / steps
        exact = exact_acceptance_rate(enumerate_ensemble(spec, 1.0))
        # successive steps are correlated; allow a generous standard error
        stderr = math.sqrt(exact * (1 - exact) / steps) * 5
        assert abs(rate - exact) < 3 * stderr


class TestSwapAndReverse:
    """Long-cycle reversal pass"""

    def test_identity_untouched(self, quadratic):
        state = identity_state(LatticeSpec.square(4), quadratic)
        assert mcmc.swap_and_reverse(state, ChainConfig(alpha=1.0), RngStream(0)) == 0
        assert np.array_equal(state.fwd, np.arange(16))

    def test_heads_reverses_winding_cycle(self, quadratic):
        state = forced_winding_init(LatticeSpec.square(8), quadratic)
        assert mcmc.swap_and_reverse(state, ChainConfig(alpha=1.0), HeadsRng()) == 1
        assert state.energy == pytest.approx(8.0, abs=1e-12)
        assert winding(state).w == (-1, 0)

    def test_reversal_probability(self):
        assert mcmc.reversal_probability(1.0, 0.0) == 0.5
        assert mcmc.reversal_probability(1.0, -3.0) == 0.5
        assert mcmc.reversal_probability(2.0, 1.0) == pytest.approx(0.5 * math.exp(-2.0))
        assert mcmc.reversal_probability(1.0, math.inf) == 0.0


class TestInitialConditions:
    """Forced winding starts"""

    def test_square_row(self, quadratic):
        state = forced_winding_init(LatticeSpec.square(8), quadratic)
        assert state.energy == 8.0
        assert winding(state).w == (1, 0)

    def test_triangular_row(self, quadratic):
        state = forced_winding_init(LatticeSpec.triangular(8), quadratic)
        assert state.energy == pytest.approx(8 * math.sqrt(4.0 / 3.0), abs=1e-12)

    def test_column(self, quadratic):
        state = forced_winding_init(LatticeSpec.square(8), quadratic, axis=1)
        assert winding(state).w == (0, 1)

    def test_chain_uses_initial_condition(self):
        cfg = ChainConfig(alpha=2.0, initial=InitialCondition.forced_winding())
        chain = Chain(cfg, LatticeSpec.square(8))
        assert chain.state.energy == 8.0

    def test_nearest_neighbor_needs_winding_start(self):
        cfg = ChainConfig(alpha=1.0, xi=JumpEnergy.nearest_neighbor())
        with pytest.raises(InvalidStateError):
            mcmc.initial_state(LatticeSpec.square(4), cfg)

    def test_parity_lock_detection(self):
        assert mcmc.is_parity_locked(LatticeSpec.square(4), ChainConfig(alpha=0.0))
        assert not mcmc.is_parity_locked(LatticeSpec.square(3), ChainConfig(alpha=0.0, sweeps_between_samples=1))
        assert not mcmc.is_parity_locked(LatticeSpec.square(4), ChainConfig(alpha=0.5))
