"""
Chain checkpoints

A checkpoint is an uncompressed ``.npz`` archive with two members:

    fwd   int64[N]  permutation targets
    meta  str       JSON document (see docs/checkpoint_format.md)

Restoring a checkpoint and continuing gives the same draws, states and
samples as the uninterrupted run.
"""

import json
import logging
import math
from pathlib import Path
from typing import Any, Dict, Optional, Union

import numpy as np

from ..core.energy import EnergyKind, JumpEnergy, ZeroJump
from ..core.lattice import LatticeKind, LatticeSpec
from ..core.permutation import PermutationState
from ..exceptions import CheckpointError, SRPError
from ..sampling.mcmc import ChainConfig, InitialCondition
from ..sampling.runner import Chain

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1


def energy_to_dict(xi: JumpEnergy) -> Dict[str, Any]:
    return {
        "kind": xi.kind.value,
        "zero_jump": xi.zero_jump.value,
        "entries": [[list(dz), value] for dz, value in xi.entries],
    }


def energy_from_dict(data: Dict[str, Any]) -> JumpEnergy:
    kind = EnergyKind(data["kind"])
    if kind is EnergyKind.TABULATED:
        return JumpEnergy.tabulated({tuple(dz): float(v) for dz, v in data["entries"]})
    if kind is EnergyKind.NEAREST_NEIGHBOR:
        return JumpEnergy.nearest_neighbor(ZeroJump(data["zero_jump"]))
    return JumpEnergy.quadratic()


def chain_config_to_dict(cfg: ChainConfig) -> Dict[str, Any]:
    return {
        "alpha": cfg.alpha,
        "xi": energy_to_dict(cfg.xi),
        "seed": cfg.seed,
        "thermalization_sweeps": cfg.thermalization_sweeps,
        "sweeps_between_samples": cfg.sweeps_between_samples,
        "reversal_period_sweeps": cfg.reversal_period_sweeps,
        "reversal_count": cfg.reversal_count,
        "initial": {"kind": cfg.initial.kind.value, "axis": cfg.initial.axis},
        "trace_every": cfg.trace_every,
    }


def chain_config_from_dict(data: Dict[str, Any]) -> ChainConfig:
    fields = dict(data)
    fields["xi"] = energy_from_dict(data["xi"])
    fields["initial"] = InitialCondition(data["initial"]["kind"], int(data["initial"]["axis"]))
    return ChainConfig(**fields)


def save_checkpoint(chain: Chain, path: Union[str, Path], config_hash: Optional[str] = None) -> Path:
    """Write the chain's complete resumable state"""
    path = Path(path)
    state = chain.state
    meta = {
        "version": FORMAT_VERSION,
        "lattice": {"kind": chain.spec.kind.value, "L": chain.spec.L, "width": chain.spec.width},
        "chain": chain_config_to_dict(chain.cfg),
        "stream": chain.stream,
        "rng": chain.rng.get_state(),
        "sweeps_done": chain.sweeps_done,
        "energy": state.energy,
        "state_version": state.version,
        "moves_since_resync": state.moves_since_resync,
        "config_hash": config_hash,
    }
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "wb") as fh:
            np.savez(fh, fwd=state.fwd, meta=np.array(json.dumps(meta)))
    except OSError as e:
        raise CheckpointError(f"cannot write checkpoint {path}: {e}") from e
    logger.info(f"checkpoint written to {path} after {chain.sweeps_done} sweeps")
    return path


def _read(path: Path):
    try:
        with np.load(path, allow_pickle=False) as archive:
            fwd = archive["fwd"].astype(np.int64)
            meta = json.loads(str(archive["meta"]))
    except (OSError, KeyError, ValueError) as e:
        raise CheckpointError(f"cannot read checkpoint {path}: {e}") from e
    if meta.get("version") != FORMAT_VERSION:
        raise CheckpointError(f"checkpoint version {meta.get('version')} is not supported "
                              f"(expected {FORMAT_VERSION})")
    return fwd, meta


def load_checkpoint(path: Union[str, Path], expected_hash: Optional[str] = None) -> Chain:
    """
    Rebuild a :class:`Chain` from ``path``. A ``config_hash`` different from
    ``expected_hash`` is logged; resuming under another configuration is
    allowed but no longer reproduces a single run.
    """
    path = Path(path)
    fwd, meta = _read(path)
    try:
        lat = meta["lattice"]
        spec = LatticeSpec(LatticeKind(lat["kind"]), int(lat["L"]), int(lat["width"]))
        cfg = chain_config_from_dict(meta["chain"])
        if len(fwd) != spec.N:
            raise CheckpointError(f"checkpoint holds {len(fwd)} sites, lattice has {spec.N}")
        energy = float(meta["energy"])
        if not math.isfinite(energy):
            raise CheckpointError("checkpoint energy is not finite")
        state = PermutationState(fwd, spec, cfg.xi, energy=energy)
        state.version = int(meta["state_version"])
        state.moves_since_resync = int(meta["moves_since_resync"])
        chain = Chain(cfg, spec, stream=int(meta["stream"]), state=state)
        chain.rng.set_state(meta["rng"])
        chain.sweeps_done = int(meta["sweeps_done"])
    except CheckpointError:
        raise
    except (KeyError, TypeError, ValueError, SRPError) as e:
        raise CheckpointError(f"corrupt checkpoint {path}: {e}") from e

    stored = meta.get("config_hash")
    if expected_hash is not None and stored is not None and stored != expected_hash:
        logger.warning(f"checkpoint {path} was written under config {stored}, resuming under {expected_hash}")
    if not state.is_consistent():
        raise CheckpointError(f"checkpoint {path}: stored energy disagrees with the permutation")
    logger.info(f"resumed {spec.kind.value} L={spec.L} chain at sweep {chain.sweeps_done}")
    return chain
