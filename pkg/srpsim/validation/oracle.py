"""
Exact enumeration oracle for tiny tori

Enumerates every permutation of the sites, builds the Boltzmann
distribution and the exact Metropolis / swap-and-reverse transition
matrices, and evaluates the identities a correct sampler must satisfy.
"""

import itertools
import logging
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Dict, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np
import pandas as pd

from ..core.energy import EnergyKind, JumpEnergy
from ..core.lattice import LatticeKind, LatticeSpec
from ..exceptions import EnumerationBudgetError, EstimationError
from ..sampling.mcmc import MIN_REVERSIBLE_LENGTH, reversal_probability

logger = logging.getLogger(__name__)

MAX_ENSEMBLE_SITES = 9
MAX_KERNEL_SITES = 6
BOUND_TAIL_TOLERANCE = 1e-12


def _check_budget(n: int, limit: int, what: str):
    if n > limit:
        raise EnumerationBudgetError(f"{what} limited to N <= {limit} sites, got N = {n}")


def all_permutations(n: int) -> np.ndarray:
    """Every permutation of range(n) in lexicographic order, shape (n!, n)"""
    return np.array(list(itertools.permutations(range(n))), dtype=np.int64).reshape(-1, n)


def permutation_rank(perms: np.ndarray) -> np.ndarray:
    """Lexicographic rank of each row (Lehmer code)"""
    perms = np.atleast_2d(perms)
    n = perms.shape[1]
    smaller_later = np.triu(perms[:, None, :] < perms[:, :, None], k=1).sum(axis=2)
    weights = np.array([math.factorial(n - 1 - i) for i in range(n)], dtype=np.int64)
    return smaller_later @ weights


def _orbit_step(states: np.ndarray, cur: np.ndarray) -> np.ndarray:
    return np.take_along_axis(states, cur, axis=1)


@dataclass
class ExactEnsemble:
    """All N! permutations of a torus with their exact Boltzmann probabilities"""
    spec: LatticeSpec
    alpha: float
    xi: JumpEnergy
    states: np.ndarray
    energies: np.ndarray
    weights: np.ndarray
    Z: float
    probs: np.ndarray

    @property
    def N(self) -> int:
        return self.spec.N

    def __len__(self) -> int:
        return len(self.states)

    # -- per-state quantities ---------------------------------------------------

    @cached_property
    def cycle_lengths(self) -> np.ndarray:
        """l_x of every site in every state, shape (n!, N)"""
        sites = np.broadcast_to(np.arange(self.N), self.states.shape)
        lengths = np.zeros(self.states.shape, dtype=np.int64)
        cur = self.states.copy()
        for k in range(1, self.N + 1):
            closed = (cur == sites) & (lengths == 0)
            lengths[closed] = k
            cur = _orbit_step(self.states, cur)
        return lengths

    @cached_property
    def jump_dz(self) -> Tuple[np.ndarray, np.ndarray]:
        """dz components of pi(x) - x, each shape (n!, N)"""
        return self.spec.jump_components(np.arange(self.N)[None, :], self.states)

    @cached_property
    def jump_lengths(self) -> np.ndarray:
        dz1, dz2 = self.jump_dz
        return np.sqrt(self.spec.len2(dz1, dz2))

    @cached_property
    def n_cycles(self) -> np.ndarray:
        return np.rint((1.0 / self.cycle_lengths).sum(axis=1)).astype(np.int64)

    @cached_property
    def parity(self) -> np.ndarray:
        """0 for even permutations, 1 for odd"""
        return (self.N - self.n_cycles) % 2

    def same_cycle(self, x: int, y: int) -> np.ndarray:
        hit = np.zeros(len(self.states), dtype=bool)
        cur = np.full(len(self.states), x, dtype=np.int64)
        for _ in range(self.N):
            cur = self.states[np.arange(len(self.states)), cur]
            hit |= cur == y
        return hit

    # -- marginals --------------------------------------------------------------

    def expectation(self, values: np.ndarray) -> float:
        return float(self.probs @ values)

    def jump_law(self, x: int = 0, m: int = 1) -> pd.Series:
        """Law of pi^m(x) - pi^(m-1)(x), indexed by (dz1, dz2)"""
        idx = np.arange(len(self.states))
        prev = np.full(len(self.states), x, dtype=np.int64)
        for _ in range(m - 1):
            prev = self.states[idx, prev]
        nxt = self.states[idx, prev]
        dz1, dz2 = self.spec.jump_components(prev, nxt)
        frame = pd.DataFrame({"dz1": dz1, "dz2": dz2, "probability": self.probs})
        return frame.groupby(["dz1", "dz2"])["probability"].sum()

    def cycle_length_law(self, x: int = 0) -> np.ndarray:
        """P(l_x = k) for k = 1..N at index k - 1"""
        return np.bincount(self.cycle_lengths[:, x] - 1, weights=self.probs, minlength=self.N)

    def nu(self, thresholds, x: int = 0) -> np.ndarray:
        """P(l_x > K) for each K"""
        k = np.asarray(thresholds, dtype=np.float64)
        ell = self.cycle_lengths[:, x]
        return np.array([self.expectation((ell > t).astype(np.float64)) for t in k])

    def pair_correlation(self, x: int, y: int) -> float:
        if x == y:
            return 1.0
        return self.expectation(self.same_cycle(x, y).astype(np.float64))

    def long_jump_probability(self, x: int, D: float) -> float:
        return self.expectation((self.jump_lengths[:, x] > D).astype(np.float64))

    def long_jump_fraction_mean(self, x: int, D: float) -> float:
        """E[R_{x,D}]: expected fraction of long jumps along the cycle of x"""
        long = self.jump_lengths > D
        ell = self.cycle_lengths[:, x]
        idx = np.arange(len(self.states))
        cur = np.full(len(self.states), x, dtype=np.int64)
        count = np.zeros(len(self.states))
        for k in range(self.N):
            count += long[idx, cur] & (k < ell)
            cur = self.states[idx, cur]
        return self.expectation(count / ell)

    def energy_per_site(self) -> float:
        finite = self.probs > 0
        return float(self.probs[finite] @ self.energies[finite]) / self.N

    def restrict_to_parity(self, parity: int) -> "ExactEnsemble":
        """The ensemble conditioned on one parity class"""
        mask = self.parity == parity
        weights = np.where(mask, self.weights, 0.0)
        Z = float(weights.sum())
        if Z == 0:
            raise EstimationError(f"no weight in parity class {parity}")
        return ExactEnsemble(self.spec, self.alpha, self.xi, self.states, self.energies, weights, Z, weights / Z)

    def marginal_tables(self, x: int = 0) -> Dict[str, pd.DataFrame]:
        """Exact marginals as frames: jump law, cycle-length law, nu, pair correlation"""
        jumps = self.jump_law(x).reset_index()
        lengths = pd.DataFrame({"k": np.arange(1, self.N + 1), "probability": self.cycle_length_law(x)})
        ks = np.arange(0, self.N + 1)
        nu = pd.DataFrame({"K": ks, "nu": self.nu(ks, x)})
        pairs = pd.DataFrame(
            [(x, y, self.pair_correlation(x, y)) for y in range(self.N)], columns=["x", "y", "mu"]
        )
        return {"jump_law": jumps, "cycle_length_law": lengths, "nu": nu, "pair_correlation": pairs}


def boltzmann_weights(energies: np.ndarray, alpha: float) -> np.ndarray:
    """exp(-alpha H) with forbidden states at weight 0 (also at alpha = 0)"""
    finite = np.isfinite(energies)
    weights = np.zeros(len(energies))
    weights[finite] = np.exp(-alpha * energies[finite])
    return weights


def enumerate_ensemble(spec: LatticeSpec, alpha: float, xi: Optional[JumpEnergy] = None) -> ExactEnsemble:
    """Exact Boltzmann distribution over all N! permutations (N <= 9)"""
    _check_budget(spec.N, MAX_ENSEMBLE_SITES, "exact enumeration")
    xi = xi or JumpEnergy.quadratic()
    states = all_permutations(spec.N)
    table = xi.table(spec)
    c = spec.coords
    a = (c[states, 0] - c[None, :, 0]) % spec.L
    b = (c[states, 1] - c[None, :, 1]) % spec.width
    energies = table[a, b].sum(axis=1)
    weights = boltzmann_weights(energies, alpha)
    Z = float(weights.sum())
    if Z == 0:
        raise EstimationError(f"no permutation of finite energy under {xi.name}")
    logger.debug(f"enumerated {len(states)} permutations of {spec.L}x{spec.width}, Z={Z:.6g}")
    return ExactEnsemble(spec, float(alpha), xi, states, energies, weights, Z, weights / Z)


# -- exact kernels ----------------------------------------------------------------

def metropolis_step_kernel(ensemble: ExactEnsemble, acceptance_scale: float = 1.0) -> np.ndarray:
    """
    One Metropolis step: uniform unordered neighbour pair, acceptance
    min(1, exp(-scale * alpha * dH)). ``acceptance_scale`` != 1 corrupts the
    rule on purpose.
    """
    _check_budget(ensemble.N, MAX_KERNEL_SITES, "exact kernels")
    states, energies = ensemble.states, ensemble.energies
    pairs = ensemble.spec.neighbor_pairs
    M = len(states)
    kernel = np.zeros((M, M))
    rows = np.arange(M)
    for x, y in pairs.tolist():
        swapped = states.copy()
        swapped[:, [x, y]] = states[:, [y, x]]
        target = permutation_rank(swapped)
        with np.errstate(invalid="ignore", over="ignore"):
            d = energies[target] - energies
            accept = np.where(np.isfinite(energies[target]),
                              np.minimum(1.0, np.exp(-acceptance_scale * ensemble.alpha * np.where(np.isfinite(d), d, 0.0))),
                              0.0)
        np.add.at(kernel, (rows, target), accept / len(pairs))
        np.add.at(kernel, (rows, rows), (1.0 - accept) / len(pairs))
    return kernel


def reversal_kernel(ensemble: ExactEnsemble, reversal_count: int = 10) -> np.ndarray:
    """Swap-and-reverse pass as a transition matrix"""
    _check_budget(ensemble.N, MAX_KERNEL_SITES, "exact kernels")
    spec, xi = ensemble.spec, ensemble.xi
    table = xi.table(spec)
    c = spec.coords
    M = len(ensemble.states)
    kernel = np.zeros((M, M))
    for i, fwd in enumerate(ensemble.states):
        cycles = cycles_of(fwd)
        chosen = [cyc for cyc in sorted(cycles, key=lambda cy: (-len(cy), min(cy)))
                  if len(cyc) >= MIN_REVERSIBLE_LENGTH][:reversal_count]
        probs = []
        for cyc in chosen:
            d = sum(table[(c[a, 0] - c[b, 0]) % spec.L, (c[a, 1] - c[b, 1]) % spec.width]
                    - table[(c[b, 0] - c[a, 0]) % spec.L, (c[b, 1] - c[a, 1]) % spec.width]
                    for a, b in zip(cyc, cyc[1:] + cyc[:1]))
            probs.append(reversal_probability(ensemble.alpha, float(d)))
        for flips in itertools.product((False, True), repeat=len(chosen)):
            p = 1.0
            target = fwd.copy()
            for flip, q, cyc in zip(flips, probs, chosen):
                p *= q if flip else 1.0 - q
                if flip:
                    for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                        target[b] = a
            if p > 0:
                kernel[i, permutation_rank(target)[0]] += p
    return kernel


def cycles_of(fwd) -> List[List[int]]:
    """Cycles in traversal order, each starting at its minimal site"""
    seen, cycles = set(), []
    for s in range(len(fwd)):
        if s in seen:
            continue
        cyc, x = [], s
        while x not in seen:
            seen.add(x)
            cyc.append(x)
            x = int(fwd[x])
        cycles.append(cyc)
    return cycles


def exact_kernel(ensemble: ExactEnsemble, include_reversals: bool = False,
                 reversal_count: int = 10, acceptance_scale: float = 1.0) -> np.ndarray:
    """
    Transition matrix of one sweep (N Metropolis steps), followed by a
    swap-and-reverse pass when ``include_reversals``
    """
    step = metropolis_step_kernel(ensemble, acceptance_scale)
    kernel = np.linalg.matrix_power(step, ensemble.N)
    if include_reversals:
        kernel = kernel @ reversal_kernel(ensemble, reversal_count)
    return kernel


def exact_acceptance_rate(ensemble: ExactEnsemble) -> float:
    """Stationary probability that a single Metropolis proposal is accepted"""
    step = metropolis_step_kernel(ensemble)
    # a swap never maps a state to itself, so the diagonal is the rejection mass
    stay = np.diag(step)
    return float(ensemble.probs @ (1.0 - stay))


def detailed_balance_violation(probs: np.ndarray, kernel: np.ndarray) -> float:
    flow = probs[:, None] * kernel
    return float(np.max(np.abs(flow - flow.T)))


def stationarity_violation(probs: np.ndarray, kernel: np.ndarray) -> float:
    return float(np.max(np.abs(probs @ kernel - probs)))


def kernel_is_ergodic(kernel: np.ndarray, support: Optional[np.ndarray] = None) -> bool:
    """Irreducible and aperiodic on ``support`` (default: every state)"""
    idx = np.arange(len(kernel)) if support is None else np.flatnonzero(support)
    sub = kernel[np.ix_(idx, idx)]
    graph = nx.from_numpy_array(sub > 0, create_using=nx.DiGraph)
    if not nx.is_strongly_connected(graph):
        return False
    return bool(np.any(np.diag(sub) > 0) or nx.is_aperiodic(graph))


# -- identities -------------------------------------------------------------------

@dataclass
class LemmaReport:
    jump_law_discrepancy: float
    long_jump_discrepancy: float
    details: pd.DataFrame = field(repr=False, default_factory=pd.DataFrame)

    @property
    def max_discrepancy(self) -> float:
        return max(self.jump_law_discrepancy, self.long_jump_discrepancy)


def check_translation_lemmas(ensemble: ExactEnsemble, m_max: int = 3,
                             distances: Sequence[float] = (0.5, 1.0, 1.5)) -> LemmaReport:
    """
    Compare the law of pi(x) - x with the law of the m-th jump along the
    orbit of x, and P(|pi(x) - x| > D) with E[R_{x,D}], for every site x
    """
    rows = []
    for x in range(ensemble.N):
        first = ensemble.jump_law(x, 1)
        for m in range(2, m_max + 1):
            other = ensemble.jump_law(x, m)
            aligned = pd.concat([first, other], axis=1, keys=["first", "other"]).fillna(0.0)
            gap = float((aligned["first"] - aligned["other"]).abs().max())
            rows.append({"x": x, "check": f"jump_m{m}", "discrepancy": gap})
        for D in distances:
            gap = abs(ensemble.long_jump_probability(x, D) - ensemble.long_jump_fraction_mean(x, D))
            rows.append({"x": x, "check": f"long_jump_D{D:g}", "discrepancy": gap})
    details = pd.DataFrame(rows)
    jump_rows = details["check"].str.startswith("jump")
    return LemmaReport(
        jump_law_discrepancy=float(details.loc[jump_rows, "discrepancy"].max()) if jump_rows.any() else 0.0,
        long_jump_discrepancy=float(details.loc[~jump_rows, "discrepancy"].max()) if (~jump_rows).any() else 0.0,
        details=details,
    )


# -- geometric bound ---------------------------------------------------------------

@dataclass(frozen=True)
class GeometricBound:
    """
    s = sum over nonzero lattice vectors of exp(-alpha xi(x)); when s < 1,
    P(l_x > K) <= s^K / (1 - s)
    """
    alpha: float
    kind: LatticeKind
    s: float
    tail: float
    radius: int
    valid: bool

    def bound(self, K) -> np.ndarray:
        k = np.asarray(K, dtype=np.float64)
        if not self.valid:
            return np.full(k.shape, np.inf)
        return self.s ** k / (1.0 - self.s)

    def bounds(self, k_max: int) -> pd.DataFrame:
        ks = np.arange(0, k_max + 1)
        return pd.DataFrame({"K": ks, "bound": self.bound(ks)})


def _shell(n: int) -> np.ndarray:
    """Integer vectors with max(|z1|, |z2|) == n"""
    r = np.arange(-n, n + 1)
    edges = [np.column_stack([r, np.full_like(r, n)]), np.column_stack([r, np.full_like(r, -n)]),
             np.column_stack([np.full(2 * n - 1, n), r[1:-1]]), np.column_stack([np.full(2 * n - 1, -n), r[1:-1]])]
    return np.concatenate(edges)


def geometric_bound(kind: LatticeKind, alpha: float, xi: Optional[JumpEnergy] = None,
                    tolerance: float = BOUND_TAIL_TOLERANCE, max_radius: int = 100_000) -> GeometricBound:
    """
    s on the infinite lattice, summed shell by shell until the certified tail
    sum_{n>R} 8n exp(-alpha lambda n^2) drops below ``tolerance``
    (lambda the smallest eigenvalue of the Gram matrix)
    """
    xi = xi or JumpEnergy.quadratic()
    geometry = LatticeSpec(kind, 8)
    if xi.kind is EnergyKind.NEAREST_NEIGHBOR:
        s = geometry.coordination * math.exp(-alpha * geometry.spacing ** 2)
        return GeometricBound(alpha, kind, s, 0.0, 1, s < 1)
    if xi.kind is not EnergyKind.QUADRATIC:
        raise EstimationError("geometric bound is certified only for quadratic or nearest-neighbour energies")

    lam = float(np.linalg.eigvalsh(geometry.gram)[0])
    s, tail = 0.0, math.inf
    for n in range(1, max_radius + 1):
        z = _shell(n)
        s += float(np.exp(-alpha * geometry.len2(z[:, 0], z[:, 1])).sum())
        if s >= 1.0:
            logger.debug(f"alpha={alpha}: partial sum reached {s:.4f} at radius {n}")
            return GeometricBound(alpha, kind, s, math.nan, n, False)
        q = (n + 2) / (n + 1) * math.exp(-alpha * lam * (2 * n + 3))
        if q < 1:
            tail = 8 * (n + 1) * math.exp(-alpha * lam * (n + 1) ** 2) / (1 - q)
            if tail < tolerance:
                return GeometricBound(alpha, kind, s, tail, n, s + tail < 1)
    raise EstimationError(f"tail bound did not reach {tolerance} within radius {max_radius}")


def bound_excess(ensemble: ExactEnsemble, bound: GeometricBound, x: int = 0) -> float:
    """max_K (P(l_x > K) - s^K / (1 - s)); non-positive when the bound holds"""
    ks = np.arange(0, ensemble.N + 1)
    return float(np.max(ensemble.nu(ks, x) - bound.bound(ks)))
