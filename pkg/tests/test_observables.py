"""
Tests for per-sample observables and estimators
"""

import numpy as np
import pandas as pd
import pytest

from srpsim.analysis import observables
from srpsim.analysis.observables import NuAccumulator, nu_curve, scalar_observables, winding
from srpsim.core.lattice import LatticeSpec
from srpsim.core.permutation import PermutationState, identity_state
from srpsim.exceptions import EstimationError
from srpsim.sampling.mcmc import ChainConfig, forced_winding_init
from srpsim.sampling.runner import ObservableRequest, run_experiment, sample_decompositions
from srpsim.validation.oracle import enumerate_ensemble


def full_cycle(spec, quadratic):
    fwd = np.roll(np.arange(spec.N), -1)
    return PermutationState.from_targets(fwd, spec, quadratic)


class TestNuCurve:
    """Fraction of sites in long cycles"""

    def test_identity_is_zero(self, quadratic):
        d = identity_state(LatticeSpec.square(4), quadratic).decompose()
        curve = nu_curve([d], np.arange(1, 20))
        assert np.all(curve.values == 0.0)

    def test_single_cycle(self, quadratic):
        spec = LatticeSpec.square(4)
        d = full_cycle(spec, quadratic).decompose()
        curve = nu_curve([d], np.arange(0, 20))
        assert np.all(curve.values[:16] == 1.0)
        assert np.all(curve.values[16:] == 0.0)

    def test_strict_threshold(self, quadratic):
        d = forced_winding_init(LatticeSpec.square(8), quadratic).decompose()
        curve = nu_curve([d], [7.0, 8.0])
        assert curve.values[0] == pytest.approx(8 / 64)
        assert curve.values[1] == 0.0

    def test_empty_input(self):
        with pytest.raises(EstimationError):
            nu_curve([], [1.0])

    def test_thresholds_must_ascend(self):
        with pytest.raises(EstimationError):
            NuAccumulator([3.0, 2.0])

    def test_merge_equals_single_pass(self, quadratic, rng):
        spec = LatticeSpec.square(4)
        decs = [PermutationState.random(spec, quadratic, rng).decompose() for _ in range(10)]
        k = np.arange(0, 17)
        a, b = NuAccumulator(k), NuAccumulator(k)
        for d in decs[:4]:
            a.update(d)
        for d in decs[4:]:
            b.update(d)
        a.merge(b)
        merged = a.result()
        direct = nu_curve(decs, k)
        assert np.allclose(merged.values, direct.values)
        assert merged.is_monotone()

    def test_single_site_indicator(self, quadratic):
        spec = LatticeSpec.square(8)
        k = [0.0, 7.0, 8.0]
        row = forced_winding_init(spec, quadratic).decompose()
        fixed = identity_state(spec, quadratic).decompose()
        acc = NuAccumulator(k, site=0)
        assert np.array_equal(acc.fractions(row), [1.0, 1.0, 0.0])
        assert np.array_equal(acc.fractions(fixed), [0.0, 0.0, 0.0])
        curve = nu_curve([row, fixed, row, row], k, site=0)
        assert np.allclose(curve.values, [0.75, 0.75, 0.0])

    def test_merge_rejects_mixed_sites(self):
        a, b = NuAccumulator([1.0, 2.0], site=3), NuAccumulator([1.0, 2.0])
        with pytest.raises(EstimationError):
            a.merge(b)

    def test_site_outside_lattice(self):
        cfg = ChainConfig(alpha=1.0, seed=1, thermalization_sweeps=0)
        request = ObservableRequest(nu_thresholds=np.arange(1.0, 4.0), nu_site=16)
        with pytest.raises(EstimationError):
            run_experiment(cfg, LatticeSpec.square(4), 1, request)

    def test_grids(self):
        assert np.array_equal(observables.linear_grid(1, 5), [1, 2, 3, 4, 5])
        k, g = observables.gamma_grid(10_000, [0.5, 1.0])
        assert np.allclose(k, [100.0, 10_000.0])
        assert np.array_equal(g, [0.5, 1.0])

    @pytest.mark.slow
    def test_uniform_law_at_alpha_zero(self):
        spec = LatticeSpec.square(3)
        cfg = ChainConfig(alpha=0.0, seed=4, thermalization_sweeps=50, sweeps_between_samples=1)
        decs = sample_decompositions(cfg, spec, 20_000)
        k = np.arange(0, 9)
        curve = nu_curve(decs, k)
        expected = (spec.N - k) / spec.N
        # consecutive sweeps are correlated; widen the iid standard error
        assert np.all(np.abs(curve.values - expected) <= 5 * curve.stderr + 5e-3)

    def test_cycle_length_histogram(self, quadratic):
        spec = LatticeSpec.square(4)
        decs = [identity_state(spec, quadratic).decompose(), full_cycle(spec, quadratic).decompose()]
        hist = observables.cycle_length_histogram(decs, 0, spec.N)
        assert hist[0] == 0.5 and hist[15] == 0.5
        assert hist.sum() == pytest.approx(1.0)


def _total_variation(p: pd.Series, q: pd.Series) -> float:
    return 0.5 * float(p.sub(q, fill_value=0.0).abs().sum())


@pytest.mark.slow
class TestExactAgreement:
    """Chain marginals on the 2x3 torus against full enumeration"""

    SPEC = LatticeSpec.square(2, 3)
    SAMPLES = 300_000

    @pytest.fixture(scope="class", params=[0.0, 0.5, 1.0])
    def run(self, request):
        alpha = request.param
        cfg = ChainConfig(alpha=alpha, seed=21, thermalization_sweeps=100, sweeps_between_samples=5)
        series = run_experiment(cfg, self.SPEC, self.SAMPLES,
                                ObservableRequest(scalars=False, winding=False, cycle_length_sites=(),
                                                  keep_samples=True, traces=False))
        return alpha, series.kept

    def _reference(self, alpha, kept):
        ens = enumerate_ensemble(self.SPEC, alpha)
        if alpha == 0.0:
            # N * interval is even: every sample shares the parity of the start
            parities = {(self.SPEC.N - d.n_cycles) % 2 for _, d in kept}
            assert len(parities) == 1
            ens = ens.restrict_to_parity(parities.pop())
        return ens

    def test_cycle_length_law(self, run):
        alpha, kept = run
        ens = self._reference(alpha, kept)
        empirical = observables.cycle_length_histogram([d for _, d in kept], 0, self.SPEC.N)
        assert 0.5 * np.abs(empirical - ens.cycle_length_law(0)).sum() <= 0.01

    def test_joint_jump_and_cycle_law(self, run):
        alpha, kept = run
        ens = self._reference(alpha, kept)
        dz1, dz2 = ens.jump_dz
        exact = pd.DataFrame({"dz1": dz1[:, 0], "dz2": dz2[:, 0], "ell": ens.cycle_lengths[:, 0],
                              "p": ens.probs}).groupby(["dz1", "dz2", "ell"])["p"].sum()

        fwd0 = np.array([fwd[0] for fwd, _ in kept])
        s1, s2 = self.SPEC.jump_components(np.zeros_like(fwd0), fwd0)
        ell = np.array([d.length_of(0) for _, d in kept])
        empirical = pd.DataFrame({"dz1": s1, "dz2": s2, "ell": ell}).value_counts(normalize=True)
        assert _total_variation(empirical, exact) <= 0.01


class TestJumpObservables:
    """Long jumps and jump laws"""

    def test_identity_has_no_long_jumps(self, quadratic):
        state = identity_state(LatticeSpec.square(4), quadratic)
        assert observables.long_jump_fraction(state, 0, 0.0) == 0.0

    def test_unit_jumps_strict_inequality(self, quadratic):
        state = forced_winding_init(LatticeSpec.square(8), quadratic)
        assert observables.long_jump_fraction(state, 0, 0.5) == 1.0
        assert observables.long_jump_fraction(state, 0, 1.0) == 0.0

    def test_jump_histogram(self, quadratic):
        spec = LatticeSpec.square(8)
        state = forced_winding_init(spec, quadratic)
        hist = observables.jump_length_histogram([state.fwd, np.arange(spec.N)], spec, 0)
        assert hist[(1, 0)] == 0.5
        assert hist[(0, 0)] == 0.5


class TestWinding:
    """Winding vector"""

    def test_identity(self, quadratic):
        w = winding(identity_state(LatticeSpec.square(4), quadratic))
        assert w.w == (0, 0)
        assert w.w_abs == 0.0

    def test_forced_row(self, quadratic):
        w = winding(forced_winding_init(LatticeSpec.square(8), quadratic))
        assert w.w == (1, 0)
        assert w.w_abs == 1.0

    def test_integer_on_random_states(self, quadratic, rng):
        spec = LatticeSpec.triangular(5)
        for _ in range(20):
            state = PermutationState.random(spec, quadratic, rng)
            w = winding(state)
            assert all(isinstance(v, int) for v in w.w)


class TestScalars:
    """Per-sample scalars"""

    def test_identity(self, quadratic):
        s = scalar_observables(identity_state(LatticeSpec.square(4), quadratic))
        assert s.avg_jump_length == 0.0
        assert s.energy_per_site == 0.0
        assert s.max_cycle_length == 1
        assert s.max_cycle_arc_length == 0.0

    def test_forced_row(self, quadratic):
        s = scalar_observables(forced_winding_init(LatticeSpec.square(8), quadratic))
        assert s.avg_jump_length == pytest.approx(0.125)
        assert s.energy_per_site == pytest.approx(0.125)
        assert s.max_cycle_length == 8
        assert s.max_cycle_arc_length == pytest.approx(8.0)

    def test_energy_per_site_consistent(self, quadratic, rng):
        state = PermutationState.random(LatticeSpec.square(6), quadratic, rng)
        s = scalar_observables(state)
        assert s.energy_per_site * 36 == pytest.approx(state.recompute_energy(), abs=1e-9)


class TestSpecificHeat:
    """-alpha^2 dE/dalpha"""

    def test_constant(self):
        a = np.linspace(0.5, 2.0, 16)
        frame = observables.specific_heat_proxy(a, np.full_like(a, 3.0))
        assert list(frame.columns) == ["alpha", "c_per_site"]
        assert np.array_equal(frame["alpha"], a)
        assert np.allclose(frame["c_per_site"], 0.0)

    def test_inverse_law(self):
        a = np.linspace(0.5, 2.0, 301)
        c = observables.specific_heat_proxy(a, 1.0 / a)["c_per_site"]
        assert np.allclose(c, 1.0, atol=1e-3)

    def test_quadratic_law(self):
        a = np.linspace(0.5, 2.0, 31)
        assert np.allclose(observables.specific_heat_proxy(a, a ** 2)["c_per_site"], -2.0 * a ** 3, atol=1e-9)

    def test_needs_three_points(self):
        with pytest.raises(EstimationError):
            observables.specific_heat_proxy([1.0, 2.0], [0.0, 0.0])


class TestPairCorrelation:
    """Same-cycle frequency"""

    def test_identity_and_diagonal(self, quadratic):
        d = identity_state(LatticeSpec.square(4), quadratic).decompose()
        assert observables.pair_correlation([d], 2, 2) == 1.0
        assert observables.pair_correlation([d], 0, 1) == 0.0

    @pytest.mark.slow
    def test_uniform_pair_correlation(self):
        spec = LatticeSpec.square(3)
        cfg = ChainConfig(alpha=0.0, seed=9, thermalization_sweeps=50, sweeps_between_samples=1)
        decs = sample_decompositions(cfg, spec, 20_000)
        exact = enumerate_ensemble(spec, 0.0).pair_correlation(0, 4)
        # uniform permutation: P(same cycle) = 1/2
        assert exact == pytest.approx(0.5, abs=1e-12)
        assert observables.pair_correlation(decs, 0, 4) == pytest.approx(exact, abs=0.02)
