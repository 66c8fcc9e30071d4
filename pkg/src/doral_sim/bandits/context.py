"""
RunContext - Shared state of one simulated run

This object is passed between the round loop and the policy hooks, allowing
each stage of a policy to read and record what it needs.
"""

from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional

import numpy as np

from .env import Environment


@dataclass
class RunContext:
    """
    Run context that flows through the policy hooks.

    Attributes:
        env: Per-run environment (queue, ledger, random streams)
        contexts: Pre-drawn context of every round
        rng: The policy's own random stream (skip coins)
        seed: Replication seed
        t: Next free decision round (advanced by the identification stage)

        # Fields that policies populate
        cutoff: Cut-off m in use
        accepted: Arms the allocation stage may pull
        identification_spend: B_id (0 when there is no identification stage)
        identification_rounds: Rounds consumed by identification
        race_trace: Identification trace rows

        # Diagnostics
        diagnostics_every: Sampling period of per-round diagnostic rows (0 disables)
        diagnostics: Collected diagnostic rows
        extra_data: Free-form values reported alongside the metrics
    """

    env: Environment
    contexts: np.ndarray
    rng: np.random.Generator
    seed: int = 0
    t: int = 0

    cutoff: float = 500.0
    accepted: List[int] = field(default_factory=list)
    identification_spend: float = 0.0
    identification_rounds: int = 0
    race_trace: List[Dict[str, Any]] = field(default_factory=list)

    diagnostics_every: int = 1000
    diagnostics: List[Dict[str, Any]] = field(default_factory=list)
    extra_data: Dict[str, Any] = field(default_factory=dict)

    @property
    def horizon(self) -> int:
        return self.env.model.horizon

    def wants_diagnostics(self, t: int) -> bool:
        return self.diagnostics_every > 0 and t % self.diagnostics_every == 0

    def add_diagnostic(self, source: str, t: int, **values: Any) -> None:
        """Record one diagnostic row; ``source`` names the module that produced it."""
        self.diagnostics.append({"source": source, "round": t, **values})

    def add_to_result(self, key: str, value: Any) -> None:
        """Add extra data that will be included in the run metrics"""
        self.extra_data[key] = value

    def context_at(self, t: int) -> int:
        return int(self.contexts[t])

    def cheapest(self, arms: Optional[List[int]] = None) -> float:
        pool = range(self.env.model.n_arms) if arms is None else arms
        return min(self.env.model.arms[arm].cost for arm in pool)
