"""
Run metrics and the hindsight-oracle regret pass.

Everything here is computed after the run from the pull ledger, so the round
loop only has to remember what it pulled.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence

import numpy as np
import pandas as pd

from .env import EnvModel, PendingFeedback, taus_for

logger = logging.getLogger(__name__)


@dataclass
class RegretSeries:
    """
    Attributes:
        oracle: Per-round oracle payoff max_a tau_a(m) <theta_j, f_a>
        cum_oracle: Cumulative oracle payoff
        cum_reward: Rewards observed by each round (indexed by arrival, delay <= m)
        cum_windowed: Rewards observable within min(m, T - t) (indexed by decision round)
        cum_regret: cum_oracle - cum_windowed
    """

    oracle: np.ndarray
    cum_oracle: np.ndarray
    cum_reward: np.ndarray
    cum_windowed: np.ndarray
    cum_regret: np.ndarray


def oracle_and_regret(
    contexts: np.ndarray,
    ledger: Sequence[PendingFeedback],
    model: EnvModel,
    m: float,
) -> RegretSeries:
    """
    Regret of a run against the per-round hindsight oracle.

    A pull at round t with delay D is credited to the windowed series at t when
    D <= min(m, T - t), and to the observed reward series at round t + D when
    D <= m and t + D <= T (a reward landing exactly at T counts at the last
    round). Feedback later than m is never observed by the policy.

    Args:
        contexts: Realized context of every round
        ledger: Every pull of the run
        model: Environment truth
        m: Cut-off window used by the policy

    Returns:
        RegretSeries over the T rounds
    """
    horizon = len(contexts)
    taus = taus_for(model.arms, m)
    expected = model.expected_rewards()
    oracle = np.max(expected[np.asarray(contexts, dtype=int)] * taus[None, :], axis=1)

    windowed = np.zeros(horizon)
    observed = np.zeros(horizon)
    for record in ledger:
        t = record.decision_round
        if record.delay <= min(m, horizon - t):
            windowed[t] += record.reward
        if record.delay <= m and record.arrival_round <= horizon:
            observed[min(record.arrival_round, horizon - 1)] += record.reward

    cum_oracle = np.cumsum(oracle)
    cum_windowed = np.cumsum(windowed)
    return RegretSeries(
        oracle=oracle,
        cum_oracle=cum_oracle,
        cum_reward=np.cumsum(observed),
        cum_windowed=cum_windowed,
        cum_regret=cum_oracle - cum_windowed,
    )


@dataclass
class RunMetrics:
    """
    Per-round trace of one policy run plus its stage-1 summary.

    Attributes:
        policy: Policy label
        seed: Replication seed
        contexts, actions, spend, remaining: Per-round records (action -1 = skip)
        cum_reward, cum_regret, cum_windowed, cum_oracle: Per-round cumulative series
        ledger: Every pull of the run
        cutoff: Cut-off m the run was evaluated with
        accepted: Arms available to the allocation stage
        identification_spend: B_id
        identification_rounds: Rounds used by identification
        status: "ok" or "failed"
        error: Failure message
    """

    policy: str
    seed: int
    contexts: np.ndarray
    actions: np.ndarray
    spend: np.ndarray
    remaining: np.ndarray
    cum_reward: np.ndarray
    cum_regret: np.ndarray
    cum_windowed: np.ndarray
    cum_oracle: np.ndarray
    ledger: List[PendingFeedback] = field(default_factory=list)
    cutoff: float = math.nan
    accepted: List[int] = field(default_factory=list)
    identification_spend: float = 0.0
    identification_rounds: int = 0
    race_trace: List[Dict[str, Any]] = field(default_factory=list)
    diagnostics: List[Dict[str, Any]] = field(default_factory=list)
    extra_data: Dict[str, Any] = field(default_factory=dict)
    status: str = "ok"
    error: Optional[str] = None

    @property
    def rounds(self) -> int:
        return len(self.contexts)

    @property
    def pulls(self) -> int:
        return int(np.sum(self.actions >= 0))

    @property
    def total_spend(self) -> float:
        return float(self.spend.sum())

    @property
    def final_reward(self) -> float:
        return float(self.cum_reward[-1]) if self.rounds else 0.0

    @property
    def final_regret(self) -> float:
        return float(self.cum_regret[-1]) if self.rounds else 0.0

    def to_frame(self) -> pd.DataFrame:
        """Per-round records as a DataFrame."""
        return pd.DataFrame(
            {
                "round": np.arange(self.rounds),
                "context": self.contexts,
                "action": self.actions,
                "spend": self.spend,
                "cum_reward": self.cum_reward,
                "cum_regret": self.cum_regret,
                "remaining": self.remaining,
            }
        )

    def summary(self) -> Dict[str, Any]:
        return {
            "policy": self.policy,
            "seed": self.seed,
            "status": self.status,
            "error": self.error or "",
            "rounds": self.rounds,
            "pulls": self.pulls,
            "total_spend": self.total_spend,
            "final_reward": self.final_reward,
            "final_regret": self.final_regret,
            "cutoff": self.cutoff,
            "accepted": " ".join(str(arm) for arm in sorted(self.accepted)),
            "identification_spend": self.identification_spend,
            "identification_rounds": self.identification_rounds,
        }


def build_metrics(
    policy: str,
    seed: int,
    model: EnvModel,
    contexts: np.ndarray,
    ledger: Sequence[PendingFeedback],
    cutoff: float,
    **extra: Any,
) -> RunMetrics:
    """Assemble RunMetrics from the contexts and the pull ledger of a run."""
    horizon = len(contexts)
    actions = np.full(horizon, -1, dtype=np.int64)
    spend = np.zeros(horizon)
    costs = model.costs
    for record in ledger:
        actions[record.decision_round] = record.arm
        spend[record.decision_round] += costs[record.arm]

    series = oracle_and_regret(contexts, ledger, model, cutoff)
    return RunMetrics(
        policy=policy,
        seed=seed,
        contexts=np.asarray(contexts, dtype=np.int64),
        actions=actions,
        spend=spend,
        remaining=model.budget - np.cumsum(spend),
        cum_reward=series.cum_reward,
        cum_regret=series.cum_regret,
        cum_windowed=series.cum_windowed,
        cum_oracle=series.cum_oracle,
        ledger=list(ledger),
        cutoff=cutoff,
        **extra,
    )
