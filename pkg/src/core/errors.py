"""
Exception hierarchy for the multicast routing toolkit
Every error raised on purpose by the package derives from MulticastError
"""
from typing import Optional


class MulticastError(Exception):
    """Base class for all package errors"""


class InstanceFormatError(MulticastError, ValueError):
    """Malformed instance, tree or solution document"""


class InvalidConfigError(MulticastError, ValueError):
    """A configuration value violates its invariants"""


class GenerationError(MulticastError):
    """Random instance generation failed"""


class TreeError(MulticastError):
    """Structural problem with a multicast tree"""


class CycleError(TreeError):
    """The parent map loops back on itself"""


class InfeasibleError(MulticastError):
    """A destination cannot be reached (or an episode hit a dead end)"""

    def __init__(self, message: str, node: Optional[int] = None):
        super().__init__(message)
        self.node = node


class BudgetExceededError(MulticastError):
    """Instance is too large for the requested exact method"""


class InvalidActionError(MulticastError):
    """A policy selected an action outside the valid action set"""


class NonFiniteError(MulticastError):
    """NaN or Inf appeared inside the policy network"""

    def __init__(self, layer: str, detail: str = ""):
        message = f"non-finite values in layer {layer}"
        if detail:
            message = f"{message}: {detail}"
        super().__init__(message)
        self.layer = layer


class CheckpointError(MulticastError):
    """Corrupt, truncated or incompatible checkpoint file"""


class TrainingDivergedError(MulticastError):
    """Validation cost stayed far above the optimum for too long"""
