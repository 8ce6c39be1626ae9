"""
Box-counting dimension of point sets on integer tilings of the square domain
"""

import dataclasses
import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import stats

from ..exceptions import EstimationError
from .fits import FitResult, exp_decay_fit

logger = logging.getLogger(__name__)

DEFAULT_RATIO = 0.95
DEFAULT_RUNGS = 21
DEFAULT_MIN_BOX_SIDE = 8


@dataclass(frozen=True)
class BoxLadder:
    """
    Tilings of [0, L)^2 into n_j x n_j boxes, n_j the nearest integer to
    n0 c^j for j < m. Collisions are collapsed, so ``nj`` is strictly
    decreasing and may hold fewer than m rungs.
    """
    L: float
    n0: int
    c: float = DEFAULT_RATIO
    m: int = DEFAULT_RUNGS

    def __post_init__(self):
        if self.L <= 0 or self.n0 < 1 or self.m < 1 or not 0 < self.c < 1:
            raise EstimationError(f"invalid box ladder L={self.L} n0={self.n0} c={self.c} m={self.m}")

    @classmethod
    def geometric(cls, L: float, n0: int, c: float = DEFAULT_RATIO, m: int = DEFAULT_RUNGS) -> "BoxLadder":
        return cls(L, n0, c, m)

    @classmethod
    def for_min_box(cls, L: int, min_box_side: int = DEFAULT_MIN_BOX_SIDE,
                    c: float = DEFAULT_RATIO, m: int = DEFAULT_RUNGS) -> "BoxLadder":
        """Ladder whose finest boxes have side at least ``min_box_side``"""
        n0 = int(L // min_box_side)
        if n0 < 1:
            raise EstimationError(f"minimal box side {min_box_side} exceeds the domain side {L}")
        return cls(L, n0, c, m)

    @property
    def nj(self) -> np.ndarray:
        raw = np.rint(self.n0 * self.c ** np.arange(self.m)).astype(np.int64)
        raw = np.maximum(raw, 1)
        # descending, collisions collapsed
        return np.unique(raw)[::-1]

    @property
    def rj(self) -> np.ndarray:
        return self.L / self.nj

    def in_window(self, window: Optional[Tuple[int, int]]) -> np.ndarray:
        n = self.nj
        if window is None:
            return n
        lo, hi = min(window), max(window)
        return n[(n >= lo) & (n <= hi)]


def box_count(points, n: int, L: float) -> int:
    """Occupied boxes of the n x n tiling of [0, L)^2"""
    if n < 1:
        raise EstimationError(f"tiling size must be >= 1, got {n}")
    p = np.asarray(points)
    if p.size == 0:
        return 0
    p = p.reshape(-1, 2)
    if np.any(p < 0) or np.any(p >= L):
        raise EstimationError(f"points must lie in [0, {L})^2")
    if np.issubdtype(p.dtype, np.integer) and float(L).is_integer():
        cells = (p * n) // int(L)
    else:
        cells = np.minimum(np.floor(p * (n / L)).astype(np.int64), n - 1)
    return int(len(np.unique(cells[:, 0] + n * cells[:, 1])))


@dataclass
class BoxCountCurve:
    n: np.ndarray
    ln_inv_r: np.ndarray
    ln_count: np.ndarray
    window: Tuple[int, int]
    slope: float
    intercept: float
    slope_stderr: float
    saturated: bool = False

    @property
    def counts(self) -> np.ndarray:
        return np.rint(np.exp(self.ln_count)).astype(np.int64)

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"rung": np.arange(len(self.n)), "n": self.n,
                             "ln_inv_r": self.ln_inv_r, "ln_count": self.ln_count})


def boxdim(points, ladder: BoxLadder, window: Optional[Tuple[int, int]] = None) -> BoxCountCurve:
    """
    Slope of ln N(r) against ln(1/r) over the ladder rungs with n inside
    ``window`` (all rungs by default). The sample is flagged saturated when
    every box is occupied at more than half of the rungs.
    """
    n = ladder.in_window(window)
    if len(n) < 2:
        raise EstimationError(f"window {window} holds {len(n)} ladder rung(s), need at least 2")
    counts = np.array([box_count(points, int(k), ladder.L) for k in n])
    if np.any(counts == 0):
        raise EstimationError("empty point set")
    ln_inv_r = np.log(n / ladder.L)
    ln_count = np.log(counts)
    reg = stats.linregress(ln_inv_r, ln_count)
    saturated = bool(np.sum(counts == n * n) > len(n) / 2)
    return BoxCountCurve(
        n=n, ln_inv_r=ln_inv_r, ln_count=ln_count,
        window=(int(n.min()), int(n.max())),
        slope=float(reg.slope), intercept=float(reg.intercept), slope_stderr=float(reg.stderr),
        saturated=saturated,
    )


def dimension_vs_window(points, L: int, n_max_values: Sequence[int], c: float = DEFAULT_RATIO) -> pd.DataFrame:
    """Local slope as the window [n_max / 3, n_max] slides over box sizes"""
    rungs = int(math.ceil(math.log(3.0) / -math.log(c))) + 1
    rows = []
    for n_max in n_max_values:
        ladder = BoxLadder.geometric(L, int(n_max), c, rungs)
        curve = boxdim(points, ladder)
        rows.append({"n_max": int(n_max), "n_min": curve.window[0], "slope": curve.slope,
                     "stderr": curve.slope_stderr, "min_box_side": L / int(n_max)})
    return pd.DataFrame(rows)


def std_decay_fit(sizes, stds) -> FitResult:
    """std ~ A exp(-B N) across system sizes N"""
    return exp_decay_fit(sizes, stds)


def dimension_scan(alphas: Sequence[float], cfg, spec, samples_per_alpha: int,
                   min_box_side: int = DEFAULT_MIN_BOX_SIDE,
                   window: Optional[Tuple[int, int]] = None, workers: int = 1,
                   c: float = DEFAULT_RATIO, m: int = DEFAULT_RUNGS) -> pd.DataFrame:
    """
    Mean and standard deviation of the longest-cycle box dimension per alpha.

    Saturated samples are excluded from the statistics and counted.
    """
    from ..sampling.parallel import Cell, run_cells
    from ..sampling.runner import ObservableRequest

    if not spec.is_square_domain:
        raise EstimationError("box counting needs a square domain")
    ladder = BoxLadder.for_min_box(spec.L, min_box_side, c, m)
    request = ObservableRequest(box_ladder=ladder, box_window=window)
    cells = [
        Cell(cfg=dataclasses.replace(cfg, alpha=float(a)), spec=spec, sample_count=samples_per_alpha,
             request=request, stream=i)
        for i, a in enumerate(alphas)
    ]
    rows = []
    for cell, series in zip(cells, run_cells(cells, workers=workers)):
        dims = series.boxdims
        good = dims.loc[~dims["saturated"], "slope"]
        n_sat = int(dims["saturated"].sum())
        if n_sat:
            logger.warning(f"alpha={cell.cfg.alpha}: {n_sat} saturated sample(s) excluded")
        rows.append({
            "alpha": cell.cfg.alpha,
            "mean_dim": float(good.mean()) if len(good) else math.nan,
            "std_dim": float(good.std(ddof=1)) if len(good) > 1 else math.nan,
            "samples": int(len(good)),
            "saturated": n_sat,
        })
    return pd.DataFrame(rows)


# -- calibration point sets -------------------------------------------------------

def grid_points(L: int) -> np.ndarray:
    z1, z2 = np.meshgrid(np.arange(L), np.arange(L), indexing="ij")
    return np.column_stack([z1.ravel(), z2.ravel()])


def line_points(L: int) -> np.ndarray:
    return np.column_stack([np.arange(L), np.zeros(L, dtype=np.int64)])


def sierpinski_points(depth: int = 7) -> np.ndarray:
    """Sites (x, y) of the 2^depth grid with x & y == 0"""
    side = 2 ** depth
    pts = grid_points(side)
    return pts[(pts[:, 0] & pts[:, 1]) == 0]


def calibration_set(name: str, L: int = 128) -> Tuple[np.ndarray, BoxLadder]:
    """
    Point set with known dimension and the ladder it is measured on:
    full grid (2), straight line (1), Sierpinski triangle (log2 3)
    """
    if name == "grid":
        return grid_points(L), BoxLadder.for_min_box(L, 1)
    if name == "line":
        return line_points(L), BoxLadder.for_min_box(L, 1)
    if name == "sierpinski":
        depth = int(round(math.log2(L)))
        if 2 ** depth != L:
            raise EstimationError(f"Sierpinski calibration needs a power-of-two side, got {L}")
        return sierpinski_points(depth), BoxLadder.geometric(L, L, 0.5, depth + 1)
    raise EstimationError(f"unknown calibration set {name}")
