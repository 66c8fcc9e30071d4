"""
RandomLinUCBPolicy - Delayed LinUCB that pulls with probability b_t / B
"""

from typing import TYPE_CHECKING, Optional

import numpy as np

from .config import PolicyConfig
from .dlinucb import DLinUCBPolicy

if TYPE_CHECKING:
    from ..context import RunContext


class RandomLinUCBPolicy(DLinUCBPolicy):
    """
    Each round, flips a coin with success probability remaining / initial budget
    and, on success, pulls the delayed LinUCB choice. The coin is drawn every
    round, so the coin sequence only depends on the seed.
    """

    name = "Random"

    def __init__(self, config: Optional[PolicyConfig] = None):
        super().__init__(config or PolicyConfig(kind="Random"))

    def choose(
        self, run: "RunContext", t: int, context: int, available: np.ndarray
    ) -> Optional[int]:
        rho = min(max(run.env.remaining / run.env.budget, 0.0), 1.0)
        if run.wants_diagnostics(t):
            run.add_diagnostic("random", t, context=context, rho=rho)
        if run.rng.random() >= rho:
            return None
        return super().choose(run, t, context, available)
