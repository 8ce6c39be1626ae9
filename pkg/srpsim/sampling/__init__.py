"""Markov chain sampling: random streams, Metropolis moves, experiment runner."""

from .rng import RngStream
from .mcmc import (
    ChainConfig,
    InitialCondition,
    InitialKind,
    delta_h,
    metropolis_step,
    sweep,
    swap_and_reverse,
    forced_winding_init,
    initial_state,
)
from .runner import Chain, ObservableRequest, ObservableSeries, run_experiment
from .parallel import Cell, run_cells

__all__ = [
    "RngStream",
    "ChainConfig",
    "InitialCondition",
    "InitialKind",
    "delta_h",
    "metropolis_step",
    "sweep",
    "swap_and_reverse",
    "forced_winding_init",
    "initial_state",
    "Chain",
    "ObservableRequest",
    "ObservableSeries",
    "run_experiment",
    "Cell",
    "run_cells",
]
