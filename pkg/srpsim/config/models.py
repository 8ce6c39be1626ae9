"""
Pydantic models for experiment configuration
"""

import hashlib
import json
from enum import Enum
from typing import List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from ..core.energy import JumpEnergy, ZeroJump
from ..core.lattice import LatticeKind, LatticeSpec
from ..sampling.mcmc import ChainConfig, InitialCondition, InitialKind


class EnergyName(str, Enum):
    QUADRATIC = "quadratic"
    NEAREST_NEIGHBOR = "nearest_neighbor"


class Section(BaseModel):
    model_config = ConfigDict(extra="forbid")


class LatticeSection(Section):
    """Torus geometry"""
    kind: LatticeKind = LatticeKind.SQUARE
    L: int = Field(default=64, ge=2, description="Side length")

    def spec(self) -> LatticeSpec:
        return LatticeSpec(self.kind, self.L)


class ChainSection(Section):
    """Metropolis chain parameters"""
    alpha: float = Field(default=1.0, ge=0, allow_inf_nan=False)
    alphas: Optional[List[float]] = Field(default=None, description="Alpha grid for scans")
    energy: EnergyName = EnergyName.QUADRATIC
    zero_jump: ZeroJump = ZeroJump.FORBIDDEN
    seed: int = Field(default=0, ge=0, lt=2 ** 64)
    thermalization_sweeps: int = Field(default=100_000, ge=0)
    sweeps_between_samples: int = Field(default=10, ge=0)
    reversal_period_sweeps: int = Field(default=1, ge=0)
    reversal_count: int = Field(default=10, ge=0)
    initial: InitialKind = InitialKind.IDENTITY
    winding_axis: int = Field(default=0, ge=0, le=1)
    samples: int = Field(default=1000, ge=1)
    trace_every: int = Field(default=1, ge=0)
    chains: int = Field(default=1, ge=1, description="Independent chains per alpha")

    @field_validator("alphas")
    @classmethod
    def _alphas_non_negative(cls, v):
        if v is not None and any(a < 0 or a != a for a in v):
            raise ValueError("alphas must be finite and >= 0")
        return v

    def jump_energy(self) -> JumpEnergy:
        if self.energy is EnergyName.NEAREST_NEIGHBOR:
            return JumpEnergy.nearest_neighbor(self.zero_jump)
        return JumpEnergy.quadratic()

    def alpha_grid(self) -> List[float]:
        return list(self.alphas) if self.alphas else [self.alpha]


class NuCurveSection(Section):
    """Threshold grid for nu(K)"""
    kmin: int = Field(default=1, ge=0)
    kmax: int = Field(default=2000, ge=1)
    step: int = Field(default=1, ge=1)
    gammas: Optional[List[float]] = Field(default=None, description="Exponents for K = N^gamma")
    site: Optional[int] = Field(default=None, ge=0, description="Estimate nu at this one site")
    band: Tuple[float, float] = (1e-6, 1e-3)

    @model_validator(mode="after")
    def _ordered(self):
        if self.kmax < self.kmin:
            raise ValueError("kmax must be >= kmin")
        if not 0 < self.band[0] < self.band[1]:
            raise ValueError("band must satisfy 0 < low < high")
        return self


class BoxDimSection(Section):
    """Box-counting ladder"""
    ratio: float = Field(default=0.95, gt=0, lt=1)
    rungs: int = Field(default=21, ge=2)
    min_box_side: int = Field(default=8, ge=1)
    window: Optional[Tuple[int, int]] = None


class FitSection(Section):
    """Post-processing fits"""
    model: str = "kt_power"
    level: float = 0.25
    linear_max: float = 0.65
    power_min: float = 0.75


class OutputSection(Section):
    directory: str = "results"
    checkpoint_every: int = Field(default=0, ge=0, description="Samples between checkpoints; 0 disables")
    workers: int = Field(default=1, ge=1)
    progress: bool = False


class ExperimentConfig(Section):
    """Complete experiment description as read from YAML"""
    lattice: LatticeSection = Field(default_factory=LatticeSection)
    chain: ChainSection = Field(default_factory=ChainSection)
    nu_curve: NuCurveSection = Field(default_factory=NuCurveSection)
    boxdim: BoxDimSection = Field(default_factory=BoxDimSection)
    fit: FitSection = Field(default_factory=FitSection)
    output: OutputSection = Field(default_factory=OutputSection)

    def to_lattice(self) -> LatticeSpec:
        return self.lattice.spec()

    def to_chain_config(self, alpha: Optional[float] = None) -> ChainConfig:
        c = self.chain
        return ChainConfig(
            alpha=c.alpha if alpha is None else float(alpha),
            xi=c.jump_energy(),
            seed=c.seed,
            thermalization_sweeps=c.thermalization_sweeps,
            sweeps_between_samples=c.sweeps_between_samples,
            reversal_period_sweeps=c.reversal_period_sweeps,
            reversal_count=c.reversal_count,
            initial=InitialCondition(c.initial, c.winding_axis),
            trace_every=c.trace_every,
        )

    def config_hash(self) -> str:
        """sha256 of the canonical JSON dump"""
        canonical = json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()
