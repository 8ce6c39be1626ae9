"""
Tests for box counting and the dimension scan
"""

import math

import numpy as np
import pytest

from srpsim.analysis import fractal
from srpsim.analysis.fractal import BoxLadder, box_count, boxdim
from srpsim.core.lattice import LatticeSpec
from srpsim.exceptions import EstimationError
from srpsim.sampling.mcmc import ChainConfig, InitialCondition


class TestBoxCount:
    """Occupied boxes of a tiling"""

    def test_full_grid(self):
        assert box_count(fractal.grid_points(16), 4, 16) == 16

    @pytest.mark.parametrize("n", [1, 2, 4, 8, 16])
    def test_full_grid_divisors(self, n):
        assert box_count(fractal.grid_points(16), n, 16) == n * n

    def test_single_point(self):
        for n in (1, 3, 7):
            assert box_count([[5, 9]], n, 16) == 1

    def test_refinement_monotone(self, rng):
        pts = rng.integers(0, 32, size=(40, 2))
        for n in (1, 2, 4, 8):
            assert box_count(pts, 2 * n, 32) >= box_count(pts, n, 32)

    def test_out_of_domain(self):
        with pytest.raises(EstimationError):
            box_count([[16, 0]], 4, 16)


class TestLadder:
    """Geometric box-size ladders"""

    def test_descending_unique(self):
        nj = BoxLadder.for_min_box(64, 8).nj
        assert nj[0] == 8
        assert np.all(np.diff(nj) < 0)

    def test_window(self):
        ladder = BoxLadder.geometric(1000, 400)
        n = ladder.in_window((136, 378))
        assert n.min() >= 136 and n.max() <= 378

    def test_min_box_too_large(self):
        with pytest.raises(EstimationError):
            BoxLadder.for_min_box(8, 16)


class TestCalibration:
    """Point sets of known dimension"""

    def test_grid_is_two(self):
        points, ladder = fractal.calibration_set("grid", 64)
        curve = boxdim(points, ladder)
        assert curve.slope == pytest.approx(2.0, abs=0.01)
        assert curve.saturated

    def test_window_scan_on_grid(self):
        frame = fractal.dimension_vs_window(fractal.grid_points(64), 64, [64, 32])
        assert frame["n_max"].tolist() == [64, 32]
        assert np.allclose(frame["slope"], 2.0)
        assert (frame["n_min"] <= frame["n_max"] / 3 + 1).all()

    def test_line_is_one(self):
        points, ladder = fractal.calibration_set("line", 64)
        curve = boxdim(points, ladder)
        assert curve.slope == pytest.approx(1.0, abs=0.01)
        assert not curve.saturated

    def test_sierpinski(self):
        points, ladder = fractal.calibration_set("sierpinski", 128)
        curve = boxdim(points, ladder)
        assert curve.slope == pytest.approx(math.log(3) / math.log(2), abs=0.02)

    def test_sierpinski_needs_power_of_two(self):
        with pytest.raises(EstimationError):
            fractal.calibration_set("sierpinski", 100)

    def test_random_points_fill_plane(self, rng):
        pts = rng.random((10_000, 2)) * 64.0
        curve = boxdim(pts, BoxLadder.geometric(64.0, 16, 0.95, 21))
        assert 0.0 <= curve.slope <= 2.05
        assert curve.slope == pytest.approx(2.0, abs=0.05)

    def test_degenerate_window(self):
        points, ladder = fractal.calibration_set("line", 64)
        with pytest.raises(EstimationError):
            boxdim(points, ladder, window=(1000, 2000))

    def test_deterministic(self):
        points, ladder = fractal.calibration_set("sierpinski", 64)
        a, b = boxdim(points, ladder), boxdim(points, ladder)
        assert a.slope == b.slope
        assert np.array_equal(a.ln_count, b.ln_count)


class TestDimensionScan:
    """Longest-cycle dimension over alpha"""

    def test_small_scan(self):
        spec = LatticeSpec.square(16)
        cfg = ChainConfig(alpha=1.0, seed=3, thermalization_sweeps=20, sweeps_between_samples=2,
                          initial=InitialCondition.forced_winding())
        frame = fractal.dimension_scan([0.8, 1.5], cfg, spec, 3, min_box_side=2)
        assert list(frame.columns) == ["alpha", "mean_dim", "std_dim", "samples", "saturated"]
        assert list(frame["alpha"]) == [0.8, 1.5]
        assert np.all(frame["samples"] + frame["saturated"] == 3)
        good = frame["mean_dim"].dropna()
        assert np.all((good >= 0.0) & (good <= 2.0))

    def test_needs_square_domain(self):
        cfg = ChainConfig(alpha=1.0)
        with pytest.raises(EstimationError):
            fractal.dimension_scan([1.0], cfg, LatticeSpec.square(16, 8), 1)

    def test_std_decay_fit(self):
        sizes = np.array([256.0 ** 2, 512.0 ** 2, 1000.0 ** 2])
        stds = 0.034 * np.exp(-2.62e-8 * sizes)
        fit = fractal.std_decay_fit(sizes, stds)
        assert fit["B"] == pytest.approx(2.62e-8, rel=1e-6)
        assert fit["A"] == pytest.approx(0.034, rel=1e-6)
