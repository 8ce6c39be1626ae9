"""
Regression and curve fitting for cycle-tail exponents, decay rates,
Kosterlitz-Thouless critical forms and dimension laws
"""

import logging
import math
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np
import pandas as pd
from scipy import optimize, stats

from ..exceptions import FitError

logger = logging.getLogger(__name__)

# Critical exponent of nu(K) at the transition
UNIVERSAL_EXPONENT = 0.25

NM_OPTIONS = {"xatol": 1e-10, "fatol": 1e-20, "maxfev": 100_000, "maxiter": 100_000}
POLISH_TOL = 1e-15
_EPS = 1e-9


def _grid(start: float, stop: float, step: float) -> np.ndarray:
    n = int(round((stop - start) / step))
    return np.round(start + step * np.arange(n + 1), 6)


# Alpha grids of the published measurements, used for synthetic recovery
REFERENCE_GRIDS = {
    "kt_power": np.concatenate([_grid(0.25, 0.70, 0.025), [0.705, 0.71]]),
    "kt_rate": np.concatenate([_grid(0.75, 1.30, 0.05), _grid(1.4, 2.0, 0.1)]),
    "dimension_linear": _grid(0.15, 0.65, 0.05),
    "dimension_power": _grid(0.75, 1.5, 0.05),
}


class FitModel(Enum):
    POWER_LAW_SLOPE = "power_law_slope"
    EXP_RATE = "exp_rate"
    KT_POWER = "kt_power"
    KT_RATE = "kt_rate"
    LINEAR_LAW = "linear_law"
    POWER_LAW_1PLUS = "power_law_1plus"
    EXP_DECAY = "exp_decay"


@dataclass
class FitResult:
    model: FitModel
    params: Dict[str, float]
    residual_sum_squares: float
    param_stderr: Optional[Dict[str, float]] = None
    converged: bool = True
    iterations: int = 0
    n_points: int = 0
    extra: Dict[str, float] = field(default_factory=dict)

    def __getitem__(self, name: str) -> float:
        return self.params[name]

    def as_dict(self) -> Dict[str, object]:
        out: Dict[str, object] = {
            "model": self.model.value,
            "converged": self.converged,
            "iterations": self.iterations,
            "n_points": self.n_points,
            "rss": self.residual_sum_squares,
        }
        out.update(self.params)
        for name, value in (self.param_stderr or {}).items():
            out[f"{name}_stderr"] = value
        out.update(self.extra)
        return out


def as_xy(points) -> Tuple[np.ndarray, np.ndarray]:
    """Split (alpha, value) pairs or a two-column frame into arrays"""
    if isinstance(points, pd.DataFrame):
        arr = points.iloc[:, :2].to_numpy(dtype=np.float64)
    else:
        arr = np.asarray(points, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] != 2:
        raise FitError("points must be (alpha, value) pairs")
    if not np.all(np.isfinite(arr)):
        raise FitError("points must be finite")
    order = np.argsort(arr[:, 0], kind="stable")
    return arr[order, 0], arr[order, 1]


def _ols(x: np.ndarray, y: np.ndarray, model: FitModel, slope_name: str, intercept_name: str,
         slope_sign: float = 1.0) -> FitResult:
    if len(x) < 2:
        raise FitError(f"{model.value} needs at least 2 points, got {len(x)}")
    if np.ptp(x) == 0:
        raise FitError(f"{model.value}: abscissae are all equal")
    reg = stats.linregress(x, y)
    resid = y - (reg.intercept + reg.slope * x)
    return FitResult(
        model=model,
        params={slope_name: slope_sign * float(reg.slope), intercept_name: float(reg.intercept)},
        residual_sum_squares=float(resid @ resid),
        param_stderr={slope_name: float(reg.stderr), intercept_name: float(reg.intercept_stderr)},
        n_points=len(x),
    )


# -- cycle-tail curves ----------------------------------------------------------

def loglog_slope(curve, window: Optional[Tuple[float, float]] = None) -> FitResult:
    """
    Power-law exponent p from OLS on (ln K, ln nu); ``p`` is minus the slope.

    ``window`` restricts the thresholds K to a closed range.
    """
    k, nu = np.asarray(curve.thresholds, dtype=np.float64), np.asarray(curve.values, dtype=np.float64)
    if window is not None:
        mask = (k >= window[0]) & (k <= window[1])
        k, nu = k[mask], nu[mask]
    if np.any(nu <= 0) or np.any(k <= 0):
        raise FitError("log-log fit needs positive K and nu in the window")
    return _ols(np.log(k), np.log(nu), FitModel.POWER_LAW_SLOPE, "p", "intercept", slope_sign=-1.0)


def exp_rate(curve, band: Tuple[float, float] = (1e-6, 1e-3)) -> FitResult:
    """
    Exponential decay rate r from OLS of -ln nu against K over points with
    nu inside ``band``; also reports the correlation length 1/r.
    """
    lo, hi = min(band), max(band)
    k, nu = np.asarray(curve.thresholds, dtype=np.float64), np.asarray(curve.values, dtype=np.float64)
    mask = (nu >= lo) & (nu <= hi) & (nu > 0)
    if mask.sum() < 2:
        raise FitError(
            f"only {int(mask.sum())} points with nu in [{lo:g}, {hi:g}]; widen the band or extend the K grid"
        )
    result = _ols(k[mask], -np.log(nu[mask]), FitModel.EXP_RATE, "r", "intercept")
    r = result.params["r"]
    result.extra["correlation_length"] = 1.0 / r if r != 0 else math.inf
    return result


# -- nonlinear fits -------------------------------------------------------------

def _linear_solve(basis: np.ndarray, y: np.ndarray) -> Tuple[np.ndarray, float]:
    coef, _, _, _ = np.linalg.lstsq(basis, y, rcond=None)
    resid = y - basis @ coef
    return coef, float(resid @ resid)


def _multistart(objective: Callable[[np.ndarray], float], starts: Sequence[Sequence[float]],
                bounds: List[Tuple[float, float]]) -> Tuple[optimize.OptimizeResult, int]:
    """Bounded Nelder-Mead from each start; best residual wins, ties by start index"""
    best, best_index, total = None, -1, 0
    for i, x0 in enumerate(starts):
        res = optimize.minimize(objective, np.asarray(x0, dtype=np.float64), method="Nelder-Mead",
                                bounds=bounds, options=NM_OPTIONS)
        total += int(res.nfev)
        if best is None or res.fun < best.fun:
            best, best_index = res, i
    logger.debug(f"best of {len(starts)} starts is #{best_index} with rss {best.fun:.3e}")
    return best, total


def _stderr(jac: np.ndarray, rss: float, n: int) -> np.ndarray:
    dof = n - jac.shape[1]
    if dof <= 0:
        return np.full(jac.shape[1], np.nan)
    cov = np.linalg.pinv(jac.T @ jac) * rss / dof
    return np.sqrt(np.clip(np.diag(cov), 0.0, None))


def _kt_power_basis(alpha: np.ndarray, alpha0: float, gamma: float) -> np.ndarray:
    return np.column_stack([np.ones_like(alpha), np.abs(alpha - alpha0) ** gamma])


def kt_power_form(alpha, a: float, b: float, alpha0: float, gamma: float):
    return a + b * np.abs(np.asarray(alpha) - alpha0) ** gamma


def fit_kt_power(points) -> FitResult:
    """
    p(alpha) = a + b |alpha - alpha0|^gamma with alpha0 in (max alpha, max alpha + 1]
    and gamma in (0, 2].

    (a, b) are solved linearly inside the objective; (alpha0, gamma) are
    searched by bounded Nelder-Mead from 8 starts and the best start is
    polished with a trust-region least-squares step.
    """
    alpha, p = as_xy(points)
    if len(alpha) < 5:
        raise FitError(f"KT power fit needs at least 5 points, got {len(alpha)}")
    top = float(alpha.max())
    bounds = [(top + _EPS, top + 1.0), (1e-6, 2.0)]

    def profile(theta):
        alpha0, gamma = theta
        if alpha0 <= top or gamma <= 0:
            return np.inf
        return _linear_solve(_kt_power_basis(alpha, alpha0, gamma), p)[1]

    starts = [(top + d, g) for d in (0.01, 0.05, 0.2, 0.6) for g in (0.5, 1.2)]
    best, nfev = _multistart(profile, starts, bounds)
    alpha0, gamma = best.x
    (a, b), _ = _linear_solve(_kt_power_basis(alpha, alpha0, gamma), p)

    def residuals(x):
        return kt_power_form(alpha, *x) - p

    lower = [-np.inf, -np.inf, bounds[0][0], bounds[1][0]]
    upper = [np.inf, np.inf, bounds[0][1], bounds[1][1]]
    x0 = np.clip([a, b, alpha0, gamma], lower, upper)
    polished = optimize.least_squares(residuals, x0, method="trf", bounds=(lower, upper),
                                      xtol=POLISH_TOL, ftol=POLISH_TOL, gtol=POLISH_TOL)
    rss = float(polished.fun @ polished.fun)
    x = polished.x if rss <= best.fun else x0
    rss = min(rss, float(best.fun))
    names = ["a", "b", "alpha0", "gamma"]
    err = _stderr(polished.jac, rss, len(alpha))
    return FitResult(
        model=FitModel.KT_POWER,
        params=dict(zip(names, map(float, x))),
        residual_sum_squares=rss,
        param_stderr=dict(zip(names, map(float, err))),
        converged=bool(best.success or polished.success),
        iterations=nfev + int(polished.nfev),
        n_points=len(alpha),
    )


def kt_rate_form(alpha, c: float, b: float, alpha_c: float):
    return c * np.exp(-b / np.sqrt(np.asarray(alpha) - alpha_c))


def _kt_rate_profile(alpha: np.ndarray, log_r: np.ndarray, alpha_c: float) -> Tuple[np.ndarray, float]:
    """(ln c, b) solved linearly at fixed alpha_c, with the residual sum of squares"""
    if np.any(alpha <= alpha_c):
        return np.array([np.nan, np.nan]), np.inf
    basis = np.column_stack([np.ones_like(alpha), -1.0 / np.sqrt(alpha - alpha_c)])
    return _linear_solve(basis, log_r)


def fit_kt_rate(points) -> FitResult:
    """
    r(alpha) = c exp(-b / |alpha - alpha_c|^(1/2)) fitted on ln r, with
    alpha_c in [0, min alpha), b > 0 and c > 0.
    """
    alpha, r = as_xy(points)
    if len(alpha) < 4:
        raise FitError(f"KT rate fit needs at least 4 points, got {len(alpha)}")
    if np.any(r <= 0):
        raise FitError("KT rate fit needs positive rates")
    if alpha.min() <= 0:
        raise FitError("KT rate fit needs positive alpha")
    log_r = np.log(r)
    low = float(alpha.min())
    bounds = [(0.0, low - _EPS)]

    def profile(theta):
        return _kt_rate_profile(alpha, log_r, theta[0])[1]

    starts = [((k + 0.5) / 8.0 * low,) for k in range(8)]
    best, nfev = _multistart(profile, starts, bounds)
    alpha_c = float(best.x[0])
    (log_c, b), _ = _kt_rate_profile(alpha, log_r, alpha_c)

    def residuals(x):
        lc, bb, ac = x
        return lc - bb / np.sqrt(alpha - ac) - log_r

    lower, upper = [-np.inf, 0.0, 0.0], [np.inf, np.inf, bounds[0][1]]
    x0 = np.clip([log_c, b, alpha_c], lower, upper)
    polished = optimize.least_squares(residuals, x0, method="trf", bounds=(lower, upper),
                                      xtol=POLISH_TOL, ftol=POLISH_TOL, gtol=POLISH_TOL)
    rss = float(polished.fun @ polished.fun)
    x = polished.x if rss <= best.fun else x0
    rss = min(rss, float(best.fun))
    err = _stderr(polished.jac, rss, len(alpha))
    return FitResult(
        model=FitModel.KT_RATE,
        params={"c": float(np.exp(x[0])), "b": float(x[1]), "alpha_c": float(x[2])},
        residual_sum_squares=rss,
        param_stderr={"c": float(np.exp(x[0]) * err[0]), "b": float(err[1]), "alpha_c": float(err[2])},
        converged=bool(best.success or polished.success),
        iterations=nfev + int(polished.nfev),
        n_points=len(alpha),
        extra={"correlation_length_scale": float(np.exp(-x[0]))},
    )


# -- linear laws ----------------------------------------------------------------

def linear_crossing_fit(points, level: float = UNIVERSAL_EXPONENT,
                        alpha_max: Optional[float] = None) -> FitResult:
    """
    OLS line through (alpha, p) points with the alpha at which it reaches
    ``level`` in ``extra["crossing"]``. Only points with alpha <= alpha_max
    enter when it is given.
    """
    alpha, p = as_xy(points)
    if alpha_max is not None:
        keep = alpha <= alpha_max
        alpha, p = alpha[keep], p[keep]
    fit = _ols(alpha, p, FitModel.LINEAR_LAW, "slope", "intercept")
    slope = fit.params["slope"]
    if slope == 0:
        raise FitError("line is flat; no crossing")
    crossing = (level - fit.params["intercept"]) / slope
    fit.extra.update({"level": float(level), "crossing": float(crossing)})
    logger.info(f"p_lin(alpha) = {fit.params['intercept']:.4g} + {slope:.4g} alpha crosses {level} at {crossing:.4f}")
    return fit


def linear_extrapolate_crossing(points, level: float = UNIVERSAL_EXPONENT,
                                alpha_max: Optional[float] = None) -> float:
    """Alpha at which the OLS line through the points reaches ``level``"""
    return linear_crossing_fit(points, level, alpha_max).extra["crossing"]


def fit_dimension_laws(points, linear_max: float = 0.65,
                       power_min: float = 0.75) -> Tuple[FitResult, FitResult]:
    """
    d(alpha) = d0 - s alpha for alpha <= linear_max and
    d(alpha) = 1 + b alpha^(-c) for alpha >= power_min (log-transformed OLS)
    """
    alpha, d = as_xy(points)
    lin_mask = alpha <= linear_max
    linear = _ols(alpha[lin_mask], d[lin_mask], FitModel.LINEAR_LAW, "s", "d0", slope_sign=-1.0)

    pow_mask = alpha >= power_min
    above = pow_mask & (d > 1.0)
    dropped = int(pow_mask.sum() - above.sum())
    if dropped:
        logger.warning(f"{dropped} point(s) with d <= 1 excluded from the power law")
    fit = _ols(np.log(alpha[above]), np.log(d[above] - 1.0), FitModel.POWER_LAW_1PLUS, "c", "log_b",
               slope_sign=-1.0)
    log_b = fit.params.pop("log_b")
    fit.params["b"] = float(np.exp(log_b))
    stderr = fit.param_stderr or {}
    fit.param_stderr = {"c": stderr.get("c", np.nan), "b": float(np.exp(log_b) * stderr.get("log_b", np.nan))}
    fit.extra["excluded"] = dropped
    return linear, fit


def exp_decay_fit(x, y) -> FitResult:
    """y = A exp(-B x) by OLS on ln y"""
    x, y = np.asarray(x, dtype=np.float64), np.asarray(y, dtype=np.float64)
    if np.any(y <= 0):
        raise FitError("exponential decay fit needs positive values")
    fit = _ols(x, np.log(y), FitModel.EXP_DECAY, "B", "log_A", slope_sign=-1.0)
    fit.params["A"] = float(np.exp(fit.params.pop("log_A")))
    return fit
