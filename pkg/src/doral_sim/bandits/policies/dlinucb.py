"""
DLinUCBPolicy - Greedy delayed LinUCB over every arm

Pulls the arm with the highest delayed LinUCB index in the observed context
every round until the budget runs out. No allocation, no skipping.
"""

import logging
from typing import TYPE_CHECKING, Dict, List, Optional, Tuple

import numpy as np

from ..linear import ContextRegressor, regressors_for
from .base import PolicyBase
from .config import PolicyConfig

if TYPE_CHECKING:
    from ..context import RunContext
    from ..env import PendingFeedback

logger = logging.getLogger(__name__)


class DLinUCBPolicy(PolicyBase):
    """
    Delayed LinUCB with a fixed cut-off.

    Keeps one censored ridge regressor per context. Index vectors are cached
    per context and recomputed only when that context's regressor changed.

    Example:
        policy = DLinUCBPolicy(PolicyConfig(kind="DLinUCB", cutoff=500))
    """

    name = "D-LinUCB"

    def __init__(self, config: Optional[PolicyConfig] = None):
        super().__init__(config or PolicyConfig(kind="DLinUCB"))
        self.regressors: List[ContextRegressor] = []
        self.features: np.ndarray = np.zeros((0, 0))
        self.learn_from = 0
        self._scores: Dict[int, Tuple[int, np.ndarray]] = {}

    def setup_learning(self, run: "RunContext", window: float) -> None:
        """Fresh regressors over every context; feedback of earlier pulls is ignored."""
        model = run.env.model
        self.features = model.features
        self.regressors = regressors_for(model.n_contexts, model.dim, self.config.lam, window)
        self.learn_from = run.t
        self._scores = {}

    def prepare(self, run: "RunContext") -> "RunContext":
        model = run.env.model
        self.config.validate(n_arms=model.n_arms, costs=model.costs)
        run = super().prepare(run)
        self.setup_learning(run, run.cutoff)
        return run

    def scores(self, context: int) -> np.ndarray:
        """Delayed LinUCB index of every arm in this context."""
        reg = self.regressors[context]
        cached = self._scores.get(context)
        if cached is None or cached[0] != reg.version:
            cached = (reg.version, reg.index_all(self.features, self.config.delta))
            self._scores[context] = cached
        return cached[1]

    def candidates(self, run: "RunContext", available: np.ndarray) -> List[int]:
        return [arm for arm in run.accepted if available[arm]]

    def choose(
        self, run: "RunContext", t: int, context: int, available: np.ndarray
    ) -> Optional[int]:
        arms = self.candidates(run, available)
        if not arms:
            return None
        values = self.scores(context)[arms]
        return arms[int(np.argmax(values))]

    def on_pull(self, run: "RunContext", t: int, context: int, arm: int) -> None:
        self.regressors[context].record_pull(self.features[arm])

    def on_feedback(self, run: "RunContext", record: "PendingFeedback") -> None:
        if record.decision_round < self.learn_from:
            return
        self.regressors[record.context].record_feedback(
            self.features[record.arm],
            record.reward,
            within_cutoff=record.delay <= run.cutoff,
        )
