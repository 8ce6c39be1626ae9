"""Observables, box-counting dimension and fits."""

from .observables import (
    NuCurve,
    NuAccumulator,
    WindingRecord,
    ScalarObservables,
    nu_curve,
    long_jump_fraction,
    winding,
    scalar_observables,
    specific_heat_proxy,
    pair_correlation,
    cycle_length_histogram,
    jump_length_histogram,
    linear_grid,
    gamma_grid,
    longest_cycle_points,
)
from .fractal import BoxLadder, BoxCountCurve, box_count, boxdim, dimension_scan, dimension_vs_window
from .fits import (
    FitModel,
    FitResult,
    UNIVERSAL_EXPONENT,
    loglog_slope,
    exp_rate,
    fit_kt_power,
    fit_kt_rate,
    linear_crossing_fit,
    linear_extrapolate_crossing,
    fit_dimension_laws,
)

__all__ = [
    "NuCurve",
    "NuAccumulator",
    "WindingRecord",
    "ScalarObservables",
    "nu_curve",
    "long_jump_fraction",
    "winding",
    "scalar_observables",
    "specific_heat_proxy",
    "pair_correlation",
    "cycle_length_histogram",
    "jump_length_histogram",
    "linear_grid",
    "gamma_grid",
    "longest_cycle_points",
    "BoxLadder",
    "BoxCountCurve",
    "box_count",
    "boxdim",
    "dimension_scan",
    "dimension_vs_window",
    "FitModel",
    "FitResult",
    "UNIVERSAL_EXPONENT",
    "loglog_slope",
    "exp_rate",
    "fit_kt_power",
    "fit_kt_rate",
    "linear_crossing_fit",
    "linear_extrapolate_crossing",
    "fit_dimension_laws",
]
