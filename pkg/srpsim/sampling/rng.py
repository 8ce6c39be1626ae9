"""
Reproducible random streams for parallel chains
"""

import logging
from dataclasses import dataclass, field
from typing import Any, Dict

import numpy as np

from ..exceptions import CheckpointError

logger = logging.getLogger(__name__)

ALGORITHM = "Philox"


@dataclass
class RngStream:
    """
    Counter-based generator keyed by (master seed, stream index).

    Streams with the same seed and distinct indices are independent; the
    index is the chain id.
    """
    seed: int
    stream: int = 0
    algorithm: str = ALGORITHM
    generator: np.random.Generator = field(init=False, repr=False)

    def __post_init__(self):
        if self.algorithm != ALGORITHM:
            raise ValueError(f"unsupported bit generator {self.algorithm}")
        seq = np.random.SeedSequence(int(self.seed), spawn_key=(int(self.stream),))
        self.generator = np.random.Generator(np.random.Philox(seq))

    def spawn(self, stream: int) -> "RngStream":
        return RngStream(self.seed, stream, self.algorithm)

    # -- draws used by the chain ------------------------------------------------

    def integers(self, high: int, size: int) -> np.ndarray:
        return self.generator.integers(0, high, size, dtype=np.int64)

    def random(self, size=None):
        return self.generator.random(size)

    # -- checkpointing ------------------------------------------------------------

    def get_state(self) -> Dict[str, Any]:
        """JSON-friendly bit generator state"""
        return _to_jsonable(self.generator.bit_generator.state)

    def set_state(self, state: Dict[str, Any]):
        if state.get("bit_generator") != self.algorithm:
            raise CheckpointError(
                f"checkpoint RNG is {state.get('bit_generator')}, expected {self.algorithm}"
            )
        try:
            self.generator.bit_generator.state = _from_jsonable(state)
        except (KeyError, TypeError, ValueError) as e:
            raise CheckpointError(f"invalid RNG state: {e}") from e


def _to_jsonable(value):
    if isinstance(value, dict):
        return {k: _to_jsonable(v) for k, v in value.items()}
    if isinstance(value, np.ndarray):
        return [int(v) for v in value.tolist()]
    if isinstance(value, np.integer):
        return int(value)
    return value


def _from_jsonable(state: Dict[str, Any]) -> Dict[str, Any]:
    restored = dict(state)
    restored["state"] = {
        "counter": np.array(state["state"]["counter"], dtype=np.uint64),
        "key": np.array(state["state"]["key"], dtype=np.uint64),
    }
    restored["buffer"] = np.array(state["buffer"], dtype=np.uint64)
    return restored
