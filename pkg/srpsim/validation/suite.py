"""
Exact validation suite run by ``srpsim validate``
"""

import logging
from dataclasses import dataclass
from typing import List

import numpy as np
import pandas as pd

from ..core.lattice import LatticeKind, LatticeSpec
from ..exceptions import EnumerationBudgetError
from . import loops, oracle

logger = logging.getLogger(__name__)

KERNEL_TOLERANCE = 1e-12
IDENTITY_TOLERANCE = 1e-13


@dataclass
class CheckResult:
    check: str
    instance: str
    value: float
    tolerance: float
    passed: bool


@dataclass
class SuiteReport:
    results: List[CheckResult]

    @property
    def passed(self) -> bool:
        return all(r.passed for r in self.results)

    @property
    def failures(self) -> List[CheckResult]:
        return [r for r in self.results if not r.passed]

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame([r.__dict__ for r in self.results])


def _record(results: List[CheckResult], check: str, instance: str, value: float, tolerance: float):
    passed = bool(np.isfinite(value) and value <= tolerance)
    results.append(CheckResult(check, instance, float(value), tolerance, passed))
    level = logging.INFO if passed else logging.ERROR
    logger.log(level, f"{check} [{instance}]: {value:.3e} (tolerance {tolerance:g})")


def _kernel_checks(results, acceptance_scale: float):
    spec = LatticeSpec.square(2)
    for alpha in (0.5, 1.0, 2.0):
        ens = oracle.enumerate_ensemble(spec, alpha)
        tag = f"square 2x2 alpha={alpha}"
        step = oracle.metropolis_step_kernel(ens, acceptance_scale)
        _record(results, "row_sums", tag, float(np.max(np.abs(step.sum(axis=1) - 1.0))), 1e-14)
        _record(results, "detailed_balance", tag, oracle.detailed_balance_violation(ens.probs, step),
                KERNEL_TOLERANCE)
        composite = oracle.exact_kernel(ens, include_reversals=True, acceptance_scale=acceptance_scale)
        _record(results, "stationarity_with_reversals", tag,
                oracle.stationarity_violation(ens.probs, composite), KERNEL_TOLERANCE)
        if alpha == 1.0:
            ergodic = oracle.kernel_is_ergodic(composite)
            _record(results, "ergodicity", tag, 0.0 if ergodic else 1.0, 0.0)


def _lemma_checks(results):
    cases = [(LatticeSpec.square(2), 1.0), (LatticeSpec.square(2, 3), 0.5), (LatticeSpec.triangular(2), 1.0)]
    for spec, alpha in cases:
        ens = oracle.enumerate_ensemble(spec, alpha)
        report = oracle.check_translation_lemmas(ens)
        tag = f"{spec.kind.value} {spec.L}x{spec.width} alpha={alpha}"
        _record(results, "jump_translation_lemma", tag, report.jump_law_discrepancy, IDENTITY_TOLERANCE)
        _record(results, "long_jump_lemma", tag, report.long_jump_discrepancy, IDENTITY_TOLERANCE)


def _bound_checks(results):
    for kind, spec in ((LatticeKind.SQUARE, LatticeSpec.square(2, 3)),
                       (LatticeKind.TRIANGULAR, LatticeSpec.triangular(2, 3))):
        bound = oracle.geometric_bound(kind, 2.0)
        ens = oracle.enumerate_ensemble(spec, 2.0)
        tag = f"{kind.value} {spec.L}x{spec.width} alpha=2 s={bound.s:.6f}"
        _record(results, "geometric_bound", tag, max(oracle.bound_excess(ens, bound), 0.0), 0.0)


def _loop_checks(results):
    spec = LatticeSpec.square(3)
    A = [0, 1, 2, 3, 6]
    for prefix in ([4], [4, 5], [4, 7]):
        report = loops.check_domain_markov(spec, A, 1, 1.0, prefix)
        _record(results, "domain_markov", f"square 3x3 prefix={prefix}", report.discrepancy, IDENTITY_TOLERANCE)
    for spec in (LatticeSpec.square(2), LatticeSpec.square(2, 4)):
        report = loops.double_dimer_projection(spec)
        _record(results, "double_dimer_multiplicity", f"square {spec.L}x{spec.width}",
                float(report.mismatches), 0.0)


def _budget_check(results):
    try:
        oracle.enumerate_ensemble(LatticeSpec.square(2, 5), 1.0)
        refused = False
    except EnumerationBudgetError:
        refused = True
    _record(results, "budget_refusal", "square 2x5", 0.0 if refused else 1.0, 0.0)


def run_validation_suite(acceptance_scale: float = 1.0) -> SuiteReport:
    """
    Every exact check on the enumerable instances. ``acceptance_scale``
    corrupts the Metropolis exponent of the kernels under test.
    """
    results: List[CheckResult] = []
    _kernel_checks(results, acceptance_scale)
    _lemma_checks(results)
    _bound_checks(results)
    _loop_checks(results)
    _budget_check(results)
    report = SuiteReport(results)
    logger.info(f"validation: {len(results) - len(report.failures)}/{len(results)} checks passed")
    return report
