"""
Open-cycle ensembles and loop projections

An open cycle from x in a domain A is an injective map on D = A^c + {x}
whose image meets A in exactly one point y, so that following it from x
traces a self-avoiding path through A^c that ends in y. Sites of A other
than x stay fixed and do not enter the energy.
"""

import itertools
import logging
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, Optional, Sequence, Tuple

import numpy as np
import pandas as pd

from ..core.energy import JumpEnergy
from ..core.lattice import LatticeSpec
from ..exceptions import EnumerationBudgetError, InfeasibleDomainError
from .oracle import boltzmann_weights, cycles_of

logger = logging.getLogger(__name__)

MAX_FREE_SITES = 8
MAX_DIMER_SITES = 8

MapKey = Tuple[Tuple[int, int], ...]


@dataclass
class OpenCycleEnsemble:
    spec: LatticeSpec
    A: FrozenSet[int]
    x: int
    excluded: FrozenSet[int]
    domain: Tuple[int, ...]
    maps: np.ndarray
    energies: np.ndarray
    probs: np.ndarray

    def path(self, i: int) -> Tuple[int, ...]:
        """Sites visited from x until the path enters A"""
        target = dict(zip(self.domain, self.maps[i].tolist()))
        path = [self.x]
        while True:
            nxt = target[path[-1]]
            path.append(nxt)
            if nxt in self.A:
                return tuple(path)

    def condition(self, prefix: Sequence[int]) -> Dict[MapKey, float]:
        """
        Law of the map on the sites not yet decided, given that the path
        starts x -> prefix[0] -> ... -> prefix[-1]
        """
        steps = [self.x] + list(prefix)
        col = {z: j for j, z in enumerate(self.domain)}
        mask = np.ones(len(self.maps), dtype=bool)
        for a, b in zip(steps, steps[1:]):
            mask &= self.maps[:, col[a]] == b
        total = float(self.probs[mask].sum())
        if total == 0:
            raise InfeasibleDomainError(f"prefix {list(prefix)} has probability zero")
        decided = set(steps[:-1])
        keep = [j for j, z in enumerate(self.domain) if z not in decided]
        law: Dict[MapKey, float] = {}
        for row, p in zip(self.maps[mask], self.probs[mask]):
            key = tuple((self.domain[j], int(row[j])) for j in keep)
            law[key] = law.get(key, 0.0) + p / total
        return law

    def law(self) -> Dict[MapKey, float]:
        return self.condition([])


def open_cycle_ensemble(spec: LatticeSpec, A: Iterable[int], x: int, alpha: float,
                        xi: Optional[JumpEnergy] = None,
                        excluded: Iterable[int] = ()) -> OpenCycleEnsemble:
    """
    Every open cycle from x in A that avoids ``excluded``, with Boltzmann
    probabilities of the jumps on D = A^c + {x}
    """
    xi = xi or JumpEnergy.quadratic()
    A = frozenset(int(a) for a in A)
    excluded = frozenset(int(e) for e in excluded)
    sites = frozenset(range(spec.N))
    if x not in A:
        raise InfeasibleDomainError(f"start {x} must belong to the domain")
    complement = sorted(sites - A)
    if len(complement) > MAX_FREE_SITES:
        raise EnumerationBudgetError(f"open-cycle enumeration limited to {MAX_FREE_SITES} free sites")
    free_targets = sorted(set(complement) - excluded)
    exits = sorted(A - excluded - {x})
    if len(free_targets) != len(complement) or not exits:
        raise InfeasibleDomainError(f"domain A={sorted(A)} from {x} admits no open cycle")

    domain = tuple(sorted(set(complement) | {x}))
    rows = []
    for i in range(len(domain)):
        for y in exits:
            for image in itertools.permutations(free_targets):
                row = list(image)
                row.insert(i, y)
                rows.append(row)
    maps = np.array(rows, dtype=np.int64).reshape(-1, len(domain))

    src = np.array(domain)
    c = spec.coords
    table = xi.table(spec)
    energies = table[(c[maps, 0] - c[src, 0]) % spec.L, (c[maps, 1] - c[src, 1]) % spec.width].sum(axis=1)
    weights = boltzmann_weights(energies, alpha)
    if weights.sum() == 0:
        raise InfeasibleDomainError("every open cycle has infinite energy")
    logger.debug(f"open cycles from {x}: {len(maps)} maps on {len(domain)} sites")
    return OpenCycleEnsemble(spec, A, x, excluded, domain, maps, energies, weights / weights.sum())


@dataclass
class DomainMarkovReport:
    discrepancy: float
    naive_discrepancy: float
    prefix_probability: float
    continuations: int

    def passed(self, tolerance: float = 1e-13) -> bool:
        return self.discrepancy <= tolerance


def _law_distance(p: Dict[MapKey, float], q: Dict[MapKey, float]) -> float:
    keys = set(p) | set(q)
    return max((abs(p.get(k, 0.0) - q.get(k, 0.0)) for k in keys), default=0.0)


def check_domain_markov(spec: LatticeSpec, A: Iterable[int], x: int, alpha: float,
                        prefix: Sequence[int], xi: Optional[JumpEnergy] = None) -> DomainMarkovReport:
    """
    Condition the open cycle from x in A on the path prefix and compare with
    the open cycle from the last prefix site in A + prefix that also avoids
    the sites already visited. The comparison without that exclusion is
    reported as ``naive_discrepancy``.
    """
    A = frozenset(A)
    prefix = [int(p) for p in prefix]
    if any(p in A for p in prefix) or len(set(prefix)) != len(prefix):
        raise InfeasibleDomainError("prefix must be a self-avoiding path outside the domain")
    base = open_cycle_ensemble(spec, A, x, alpha, xi)
    conditioned = base.condition(prefix)
    if not prefix:
        return DomainMarkovReport(0.0, 0.0, 1.0, len(conditioned))

    grown = A | set(prefix)
    last = prefix[-1]
    visited = {x} | set(prefix[:-1])
    absorbed = open_cycle_ensemble(spec, grown, last, alpha, xi, excluded=visited)
    naive = open_cycle_ensemble(spec, grown, last, alpha, xi)

    steps = [x] + prefix
    col = {z: j for j, z in enumerate(base.domain)}
    mask = np.ones(len(base.maps), dtype=bool)
    for a, b in zip(steps, steps[1:]):
        mask &= base.maps[:, col[a]] == b
    report = DomainMarkovReport(
        discrepancy=_law_distance(conditioned, absorbed.law()),
        naive_discrepancy=_law_distance(conditioned, naive.law()),
        prefix_probability=float(base.probs[mask].sum()),
        continuations=len(conditioned),
    )
    logger.info(f"domain Markov, prefix {prefix}: discrepancy {report.discrepancy:.2e} "
                f"(without exclusion {report.naive_discrepancy:.2e})")
    return report


# -- double dimer ------------------------------------------------------------------

@dataclass
class DoubleDimerReport:
    permutations: int
    configurations: int
    mismatches: int
    table: pd.DataFrame = field(repr=False)

    @property
    def passed(self) -> bool:
        return self.mismatches == 0


def loop_key(fwd: Sequence[int]) -> Tuple[FrozenSet, int]:
    """Undirected loop configuration of a permutation and its number of cycles longer than 2"""
    parts, long_cycles = [], 0
    for cyc in cycles_of(fwd):
        if len(cyc) <= 2:
            parts.append(("pair", frozenset(cyc)))
        else:
            long_cycles += 1
            parts.append(("loop", frozenset(frozenset(e) for e in zip(cyc, cyc[1:] + cyc[:1]))))
    return frozenset(parts), long_cycles


def nearest_neighbor_permutations(spec: LatticeSpec):
    """Permutations in which every site jumps to a nearest neighbour"""
    for choice in itertools.product(*spec.neighbor_table):
        if len(set(choice)) == spec.N:
            yield choice


def double_dimer_projection(spec: LatticeSpec) -> DoubleDimerReport:
    """
    Group nearest-neighbour-only permutations (no fixed points) by loop
    configuration and compare each multiplicity with 2^k
    """
    if spec.N > MAX_DIMER_SITES:
        raise EnumerationBudgetError(f"double dimer enumeration limited to N <= {MAX_DIMER_SITES}")
    counts: Dict[FrozenSet, int] = {}
    long_counts: Dict[FrozenSet, int] = {}
    total = 0
    for fwd in nearest_neighbor_permutations(spec):
        key, k = loop_key(fwd)
        counts[key] = counts.get(key, 0) + 1
        long_counts[key] = k
        total += 1
    rows = [{"config": i, "k": long_counts[key], "multiplicity": n, "expected": 2 ** long_counts[key]}
            for i, (key, n) in enumerate(sorted(counts.items(), key=lambda kv: (long_counts[kv[0]], -kv[1])))]
    table = pd.DataFrame(rows, columns=["config", "k", "multiplicity", "expected"])
    mismatches = int((table["multiplicity"] != table["expected"]).sum()) if len(table) else 0
    if total == 0:
        logger.warning(f"{spec.kind.value} {spec.L}x{spec.width} admits no nearest-neighbour permutation")
    return DoubleDimerReport(total, len(counts), mismatches, table)


def loop_measure(report: DoubleDimerReport) -> pd.Series:
    """Induced probability of each loop configuration, proportional to 2^k"""
    weights = report.table["multiplicity"].astype(np.float64)
    return (weights / weights.sum()).rename("probability")
