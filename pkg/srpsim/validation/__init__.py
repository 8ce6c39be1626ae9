"""Exact enumeration oracle and identity checks for tiny tori."""

from .oracle import (
    ExactEnsemble,
    GeometricBound,
    enumerate_ensemble,
    exact_kernel,
    metropolis_step_kernel,
    reversal_kernel,
    detailed_balance_violation,
    stationarity_violation,
    kernel_is_ergodic,
    check_translation_lemmas,
    geometric_bound,
)
from .loops import open_cycle_ensemble, check_domain_markov, double_dimer_projection
from .suite import run_validation_suite

__all__ = [
    "ExactEnsemble",
    "GeometricBound",
    "enumerate_ensemble",
    "exact_kernel",
    "metropolis_step_kernel",
    "reversal_kernel",
    "detailed_balance_violation",
    "stationarity_violation",
    "kernel_is_ergodic",
    "check_translation_lemmas",
    "geometric_bound",
    "open_cycle_ensemble",
    "check_domain_markov",
    "double_dimer_projection",
    "run_validation_suite",
]
