"""
PolicyBase - Base class for all decision-making agents

Defines the hooks the round loop calls on a policy.
"""

from typing import TYPE_CHECKING, Optional

import numpy as np

from .config import PolicyConfig

if TYPE_CHECKING:
    from ..context import RunContext
    from ..env import PendingFeedback
    from ..metrics import RunMetrics


class PolicyBase:
    """
    Base class for policies.

    Policies plug into the Simulator round loop at five points.

    Available hooks (in order of execution):
    1. prepare - Once, before the first allocation round (identification, estimators)
    2. on_feedback - For every feedback record arriving at the start of a round
    3. choose - Pick an arm (or None to skip) for the round's context
    4. on_pull - After the environment accepted the pull and charged its cost
    5. finalize - Last modification of the metrics before returning

    Example:
        class AlwaysFirst(PolicyBase):
            name = "first"

            def choose(self, run, t, context, available):
                return 0 if available[0] else None
    """

    name: str = "base"

    def __init__(self, config: Optional[PolicyConfig] = None):
        self.config = config or PolicyConfig()

    @property
    def label(self) -> str:
        return self.config.label or self.name

    def prepare(self, run: "RunContext") -> "RunContext":
        """
        Hook executed once before the allocation rounds.

        May consume decision rounds (advancing run.t) and budget.

        Args:
            run: Run context

        Returns:
            Modified context (or the same)
        """
        run.cutoff = self.config.cutoff
        run.accepted = list(range(run.env.model.n_arms))
        return run

    def on_feedback(self, run: "RunContext", record: "PendingFeedback") -> None:
        """
        Hook executed for each feedback record that arrives.

        Args:
            run: Run context
            record: The arrived record (reward, delay, context, arm)
        """
        return None

    def choose(
        self, run: "RunContext", t: int, context: int, available: np.ndarray
    ) -> Optional[int]:
        """
        Pick the arm for this round.

        Args:
            run: Run context
            t: Decision round
            context: Observed context
            available: Boolean mask of available arms

        Returns:
            Arm index, or None to skip the round
        """
        return None

    def on_pull(self, run: "RunContext", t: int, context: int, arm: int) -> None:
        """Hook executed after the environment accepted a pull."""
        return None

    def finalize(self, run: "RunContext", metrics: "RunMetrics") -> "RunMetrics":
        """
        Hook to finalize the metrics before returning.

        Args:
            run: Run context
            metrics: Metrics assembled from the pull ledger

        Returns:
            Modified metrics
        """
        return metrics
