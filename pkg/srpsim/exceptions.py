"""
Exception hierarchy for srpsim
"""


class SRPError(Exception):
    """Base class for all srpsim errors"""


class InvalidLatticeError(SRPError, ValueError):
    """Lattice geometry or site index is invalid"""


class InvalidStateError(SRPError, ValueError):
    """Permutation state cannot be constructed or is inconsistent"""


class StaleCycleError(SRPError):
    """Cycle id refers to a decomposition of an earlier state"""


class WindingConsistencyError(SRPError):
    """Jump sum of a permutation is not a multiple of the side length"""


class EstimationError(SRPError, ValueError):
    """Observable estimator received unusable input"""


class FitError(SRPError, ValueError):
    """Fit input is insufficient or outside the model domain"""


class EnumerationBudgetError(SRPError):
    """Exact enumeration request exceeds the size budget"""


class InfeasibleDomainError(SRPError):
    """Open-cycle domain admits no valid map"""


class CheckpointError(SRPError):
    """Checkpoint is corrupt or was written by an incompatible version"""


class ConfigError(SRPError, ValueError):
    """Experiment configuration is invalid"""


class TableParseError(SRPError, ValueError):
    """Malformed CSV input"""

    def __init__(self, message: str, line: int):
        super().__init__(f"line {line}: {message}")
        self.line = line
