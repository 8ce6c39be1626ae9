"""
Experiment runner: thermalisation, sampling schedule, traces and observables
"""

import logging
from dataclasses import dataclass, field
from typing import Callable, List, Optional, Tuple

import numpy as np
import pandas as pd
from tqdm import tqdm

from ..analysis import fractal, observables
from ..analysis.observables import NuAccumulator, NuCurve, PairCounter
from ..core.lattice import LatticeSpec
from ..core.permutation import CycleDecomposition, PermutationState
from ..exceptions import EstimationError
from . import mcmc
from .mcmc import ChainConfig
from .rng import RngStream

logger = logging.getLogger(__name__)


@dataclass
class ObservableRequest:
    """Which observables to record at every sample"""
    nu_thresholds: Optional[np.ndarray] = None
    gamma_grid: Optional[np.ndarray] = None
    # nu at one site instead of the all-site fraction
    nu_site: Optional[int] = None
    scalars: bool = True
    winding: bool = True
    cycle_length_sites: Tuple[int, ...] = (0,)
    pair_sites: Tuple[Tuple[int, int], ...] = ()
    box_ladder: Optional["fractal.BoxLadder"] = None
    box_window: Optional[Tuple[int, int]] = None
    keep_samples: bool = False
    traces: bool = True


@dataclass
class ObservableSeries:
    """
    Output of a run: per-sweep traces, per-sample records, and the
    streaming estimators (nu curve, pair correlation)
    """
    traces: pd.DataFrame
    samples: pd.DataFrame
    boxdims: pd.DataFrame
    nu: Optional[NuAccumulator] = None
    pairs: Optional[PairCounter] = None
    kept: List[Tuple[np.ndarray, CycleDecomposition]] = field(default_factory=list)

    @property
    def sample_count(self) -> int:
        return len(self.samples)

    def nu_curve(self) -> NuCurve:
        if self.nu is None:
            raise EstimationError("nu curve was not requested")
        return self.nu.result()

    def extend(self, other: "ObservableSeries") -> "ObservableSeries":
        """This series followed by ``other`` (e.g. a resumed continuation)"""
        nu = self.nu
        if nu is not None and other.nu is not None:
            nu = NuAccumulator(self.nu.thresholds, self.nu.gamma_grid, self.nu.site)
            nu.merge(self.nu)
            nu.merge(other.nu)
        pairs = self.pairs
        if pairs is not None and other.pairs is not None:
            pairs = PairCounter(list(self.pairs.pairs))
            pairs.hits = self.pairs.hits + other.pairs.hits
            pairs.count = self.pairs.count + other.pairs.count
        return ObservableSeries(
            traces=pd.concat([self.traces, other.traces], ignore_index=True),
            samples=pd.concat([self.samples, other.samples], ignore_index=True),
            boxdims=pd.concat([self.boxdims, other.boxdims], ignore_index=True),
            nu=nu,
            pairs=pairs,
            kept=self.kept + other.kept,
        )


class Chain:
    """
    One Metropolis chain: state, configuration, random stream and the
    absolute sweep counter. Sweep s (1-based) is followed by a
    swap-and-reverse pass when s is a multiple of the reversal period, and
    by a sample when s lies past thermalisation on the sampling grid.
    """

    def __init__(self, cfg: ChainConfig, spec: LatticeSpec, stream: int = 0,
                 state: Optional[PermutationState] = None):
        self.cfg = cfg
        self.spec = spec
        self.stream = stream
        self.rng = RngStream(cfg.seed, stream)
        self.state = state if state is not None else mcmc.initial_state(spec, cfg)
        self.sweeps_done = 0

    @property
    def samples_taken(self) -> int:
        return self.cfg.samples_taken(self.sweeps_done)

    def advance(self) -> Tuple[int, int]:
        """Run the next sweep; returns (accepted moves, reversed cycles)"""
        accepted = mcmc.sweep(self.state, self.cfg, self.rng)
        self.sweeps_done += 1
        reversed_count = 0
        if self.cfg.is_reversal_sweep(self.sweeps_done):
            reversed_count = mcmc.swap_and_reverse(self.state, self.cfg, self.rng)
        return accepted, reversed_count

    def at_sample(self) -> bool:
        return self.cfg.is_sample_sweep(self.sweeps_done)


def _trace_row(chain: Chain, accepted: int, reversed_count: int,
               decomposition: CycleDecomposition) -> dict:
    scalars = observables.scalar_observables(chain.state, decomposition)
    return {
        "sweep": chain.sweeps_done,
        "accepted": accepted,
        "reversed": reversed_count,
        "energy": chain.state.energy,
        "avg_jump_length": scalars.avg_jump_length,
        "longest_arc_length": scalars.max_cycle_arc_length,
    }


def _sample_row(chain: Chain, index: int, request: ObservableRequest,
                decomposition: CycleDecomposition) -> dict:
    row = {"sample": index, "sweep": chain.sweeps_done}
    if request.scalars:
        row.update(observables.scalar_observables(chain.state, decomposition).as_dict())
    if request.winding:
        w = observables.winding(chain.state, decomposition)
        row.update({"w1": w.w[0], "w2": w.w[1], "w_abs": w.w_abs})
    for x in request.cycle_length_sites:
        row[f"ell_{x}"] = decomposition.length_of(x)
    return row


def run_experiment(cfg: ChainConfig, spec: LatticeSpec, sample_count: int,
                   request: Optional[ObservableRequest] = None, chain: Optional[Chain] = None,
                   stream: int = 0, callback: Optional[Callable[[Chain, int], None]] = None,
                   progress: bool = False) -> ObservableSeries:
    """
    Thermalise, then record ``sample_count`` samples in total.

    A ``chain`` restored from a checkpoint continues where it stopped: only
    the missing samples are produced and the returned series is the exact
    continuation of the interrupted run. ``callback(chain, sample_index)``
    runs after each sample (used for checkpointing).
    """
    request = request or ObservableRequest()
    if chain is None:
        chain = Chain(cfg, spec, stream)
    cfg = chain.cfg
    if mcmc.is_parity_locked(spec, cfg):
        logger.warning(
            "alpha=0 with N*sweeps_between_samples even: samples stay in the parity class of the start"
        )

    if request.nu_site is not None and not 0 <= request.nu_site < spec.N:
        raise EstimationError(f"nu site {request.nu_site} outside a lattice of {spec.N} sites")
    nu = (NuAccumulator(request.nu_thresholds, request.gamma_grid, request.nu_site)
          if request.nu_thresholds is not None else None)
    pairs = PairCounter(list(request.pair_sites)) if request.pair_sites else None
    if request.box_ladder is not None and not spec.is_square_domain:
        raise EstimationError("box counting needs a square domain")

    traces, samples, boxdims, kept = [], [], [], []
    start = chain.samples_taken
    total_sweeps = cfg.thermalization_sweeps + sample_count * cfg.sample_interval
    if chain.samples_taken == 0 and chain.sweeps_done == 0:
        logger.info(f"chain {chain.stream}: alpha={cfg.alpha} {spec.kind.value} L={spec.L}, "
                    f"{total_sweeps} sweeps for {sample_count} samples")

    with tqdm(total=total_sweeps, initial=chain.sweeps_done, disable=not progress,
              desc=f"alpha={cfg.alpha}") as bar:
        while chain.samples_taken < sample_count:
            accepted, reversed_count = chain.advance()
            bar.update(1)
            if chain.sweeps_done == cfg.thermalization_sweeps:
                logger.info(f"chain {chain.stream}: thermalisation finished")
            sampling = chain.at_sample()
            tracing = request.traces and cfg.trace_every and chain.sweeps_done % cfg.trace_every == 0
            if not (sampling or tracing):
                continue
            decomposition = chain.state.decompose()
            if tracing:
                traces.append(_trace_row(chain, accepted, reversed_count, decomposition))
            if not sampling:
                continue

            index = chain.samples_taken - 1
            samples.append(_sample_row(chain, index, request, decomposition))
            if nu is not None:
                nu.update(decomposition)
            if pairs is not None:
                pairs.update(decomposition)
            if request.box_ladder is not None:
                points = observables.longest_cycle_points(chain.state, decomposition)
                curve = fractal.boxdim(points, request.box_ladder, request.box_window)
                boxdims.append({"sample": index, "sweep": chain.sweeps_done, "slope": curve.slope,
                                "stderr": curve.slope_stderr, "saturated": curve.saturated})
            if request.keep_samples:
                kept.append((chain.state.fwd.copy(), decomposition))
            if callback is not None:
                callback(chain, index)

    logger.info(f"chain {chain.stream}: {chain.samples_taken - start} samples recorded")
    return ObservableSeries(
        traces=pd.DataFrame(traces, columns=["sweep", "accepted", "reversed", "energy",
                                             "avg_jump_length", "longest_arc_length"]),
        samples=pd.DataFrame(samples),
        boxdims=pd.DataFrame(boxdims, columns=["sample", "sweep", "slope", "stderr", "saturated"]),
        nu=nu,
        pairs=pairs,
        kept=kept,
    )


def sample_decompositions(cfg: ChainConfig, spec: LatticeSpec, sample_count: int,
                          stream: int = 0) -> List[CycleDecomposition]:
    """Convenience: the cycle decompositions of ``sample_count`` samples"""
    series = run_experiment(cfg, spec, sample_count,
                            ObservableRequest(scalars=False, winding=False, cycle_length_sites=(),
                                              keep_samples=True, traces=False),
                            stream=stream)
    return [d for _, d in series.kept]
