"""
Independent chains in parallel processes
"""

import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

from ..core.lattice import LatticeSpec
from .mcmc import ChainConfig
from .runner import ObservableRequest, ObservableSeries, run_experiment

logger = logging.getLogger(__name__)


@dataclass
class Cell:
    """One (alpha, seed, lattice) point of an experiment grid"""
    cfg: ChainConfig
    spec: LatticeSpec
    sample_count: int
    request: ObservableRequest = field(default_factory=ObservableRequest)
    stream: int = 0


def run_cell(cell: Cell) -> ObservableSeries:
    return run_experiment(cell.cfg, cell.spec, cell.sample_count, cell.request, stream=cell.stream)


def run_cells(cells: Sequence[Cell], workers: Optional[int] = 1) -> List[ObservableSeries]:
    """
    Run every cell and return the series in submission order. Cells share
    no state, so results do not depend on ``workers``.
    """
    cells = list(cells)
    if workers is not None and workers <= 1 or len(cells) <= 1:
        return [run_cell(c) for c in cells]

    logger.info(f"running {len(cells)} cells on {workers} workers")
    with ProcessPoolExecutor(max_workers=workers) as pool:
        futures = [pool.submit(run_cell, c) for c in cells]
        results = []
        for i, f in enumerate(futures):
            results.append(f.result())
            logger.info(f"cell {i + 1}/{len(cells)} done (alpha={cells[i].cfg.alpha})")
    return results
