"""
Errors raised by the simulation core.

Validation-type errors also derive from ValueError and run-time failures from
RuntimeError, so callers that only know the builtin types keep working.
"""

from typing import TYPE_CHECKING, Any, List, Optional

if TYPE_CHECKING:
    from .identify import RaceState


class DoralError(Exception):
    """Base class for every error raised by doral_sim."""


class ModelValidationError(DoralError, ValueError):
    """The environment model violates one of its invariants."""


class ConfigurationError(DoralError, ValueError):
    """A policy or experiment setting is invalid or inconsistent."""


class InvalidParameterError(DoralError, ValueError):
    """A numeric parameter is outside the range an estimator accepts."""


class InsufficientSamplesError(DoralError, ValueError):
    """Not enough pulls or returned observations for the requested statistic."""


class NotResolvedError(DoralError, ValueError):
    """Some pulls are too recent for their censoring at m to be settled."""


class BudgetExhaustedError(DoralError, RuntimeError):
    """A pull was attempted with less remaining budget than its cost."""

    def __init__(self, cost: float, remaining: float):
        super().__init__(f"budget exhausted: cost {cost} exceeds remaining {remaining}")
        self.cost = cost
        self.remaining = remaining


class IdentificationFailedError(DoralError, RuntimeError):
    """
    The responsive-arm race ran out of budget or rounds before accepting A' arms.

    Attributes:
        accepted: Arms accepted before the race stopped
        spend: Identification spend B_id
        rounds: Decision rounds consumed
        state: Final race state (when available)
        metrics: Partial run metrics, attached by the policy layer
    """

    def __init__(
        self,
        message: str,
        accepted: List[int],
        spend: float,
        rounds: int,
        state: Optional["RaceState"] = None,
    ):
        super().__init__(message)
        self.accepted = list(accepted)
        self.spend = spend
        self.rounds = rounds
        self.state = state
        self.metrics: Optional[Any] = None
