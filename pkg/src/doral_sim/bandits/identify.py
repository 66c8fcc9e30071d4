"""
Patient-racing successive accept/reject over mean delays.

Stage 1 of DORAL: race arms on their robust delay estimates until the A'
most responsive arms are accepted, then report the accepted set, the cut-off m
and the identification spend B_id.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Set

import numpy as np

from .env import Environment
from .errors import ConfigurationError, IdentificationFailedError
from .estimators import (
    ConfidenceBounds,
    DelayStats,
    basket_count,
    median_of_means,
    robust_bounds,
)

logger = logging.getLogger(__name__)

ACCEPTANCE_RULES = ("responsive", "as_printed")
CUTOFF_SCOPES = ("accepted", "all")

UNBOUNDED = ConfidenceBounds(ucb=math.inf, lcb=0.0)


@dataclass
class RaceState:
    """
    Book-keeping of one identification race.

    Attributes:
        accepted: S, arms accepted so far (in acceptance order)
        remaining: L, arms still racing
        rejected: E, arms excluded so far
        stats: Delay statistics per arm
        target: A', number of arms to accept
        spend: B_id, identification spend so far
        bounds: Latest confidence bounds per arm
        estimates: Latest median-of-means estimate per arm
        trace: Per-round diagnostic rows
    """

    accepted: List[int]
    remaining: Set[int]
    rejected: Set[int]
    stats: Dict[int, DelayStats]
    target: int
    spend: float = 0.0
    round: int = 0
    acceptance_rule: str = "responsive"
    bounds: Dict[int, ConfidenceBounds] = field(default_factory=dict)
    estimates: Dict[int, float] = field(default_factory=dict)
    trace: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def done(self) -> bool:
        return len(self.accepted) >= self.target

    @classmethod
    def start(
        cls,
        n_arms: int,
        target: int,
        delta: float = 0.05,
        alpha: float = 1.0,
        budget: float = 85_000.0,
        radius_mode: str = "plugin",
        acceptance_rule: str = "responsive",
        start_round: int = 0,
    ) -> "RaceState":
        if not 1 <= target <= n_arms:
            raise ConfigurationError(f"target_arms: A' must lie in [1, {n_arms}], got {target}")
        if acceptance_rule not in ACCEPTANCE_RULES:
            raise ConfigurationError(f"acceptance_rule: expected one of {ACCEPTANCE_RULES}")
        stats = {
            arm: DelayStats(
                arm=arm, alpha=alpha, delta=delta, budget=budget, radius_mode=radius_mode
            )
            for arm in range(n_arms)
        }
        return cls(
            accepted=[],
            remaining=set(range(n_arms)),
            rejected=set(),
            stats=stats,
            target=target,
            round=start_round,
            acceptance_rule=acceptance_rule,
            bounds={arm: UNBOUNDED for arm in range(n_arms)},
        )


@dataclass
class RaceResult:
    accepted: List[int]
    cutoff: float
    spend: float
    rounds: int
    state: RaceState


def refresh_bounds(state: RaceState, arm: int) -> ConfidenceBounds:
    """
    Recompute an arm's bounds from its settled prefix.

    Only pulls up to the first one still in flight enter the estimate, and
    T_a in the radius counts those pulls. Until two of them have returned the
    arm is reset to (0, inf) and loses its estimate.
    """
    stats = state.stats[arm]
    settled = stats.settled_count
    if settled < 2:
        state.bounds[arm] = UNBOUNDED
        state.estimates.pop(arm, None)
        return UNBOUNDED
    h, _ = basket_count(settled, stats.delta)
    d_m = median_of_means(stats, h=h, settled=True)
    state.estimates[arm] = d_m
    state.bounds[arm] = robust_bounds(stats, d_m, pulls=settled)
    return state.bounds[arm]


def _ingest(state: RaceState, env: Environment, t: int) -> int:
    arrived = env.pop_due(t)
    for record in arrived:
        state.stats[record.arm].record_return(record.seq, record.delay)
    return len(arrived)


def _fail(state: RaceState, reason: str) -> IdentificationFailedError:
    return IdentificationFailedError(
        f"identification failed after {state.round} rounds: {reason}",
        accepted=state.accepted,
        spend=state.spend,
        rounds=state.round,
        state=state,
    )


def decide(state: RaceState) -> Dict[int, str]:
    """Accept/reject decisions for this round, taken on a snapshot of the bounds."""
    racing = sorted(state.remaining)
    slots = state.target - len(state.accepted)
    decisions: Dict[int, str] = {}

    for arm in racing:
        own = state.bounds[arm]
        if not math.isfinite(own.ucb):
            continue
        others = [state.bounds[other] for other in racing if other != arm]

        if state.acceptance_rule == "responsive":
            faster = sum(1 for other in others if own.ucb < other.lcb)
            slower = sum(1 for other in others if own.lcb > other.ucb)
            if faster >= len(racing) - slots:
                decisions[arm] = "accept"
            elif slower >= slots and len(racing) - 1 >= slots:
                decisions[arm] = "reject"
        else:
            accepted_now = sum(1 for verdict in decisions.values() if verdict == "accept")
            dominated = sum(1 for other in others if own.lcb > other.ucb)
            if dominated > slots and accepted_now < slots:
                decisions[arm] = "accept"
    return decisions


def race_round(
    state: RaceState,
    env: Environment,
    t: Optional[int] = None,
    contexts: Optional[np.ndarray] = None,
    budget_cap: float = math.inf,
) -> RaceState:
    """
    Pull every racing arm once, ingest returned delays, then accept and reject.

    Args:
        state: Race state (mutated and returned)
        env: Per-run environment
        t: Round of the first pull (defaults to state.round)
        contexts: Pre-drawn context sequence (drawn on demand when None)
        budget_cap: Identification budget cap

    Returns:
        The updated state; state.round is the next free decision round

    Raises:
        IdentificationFailedError: If the cap, the budget or the horizon runs
            out before A' arms are accepted
    """
    if state.done:
        return state
    if t is not None:
        state.round = t

    pulled = set()
    for arm in sorted(state.remaining):
        cost = env.model.arms[arm].cost
        if state.round >= env.model.horizon:
            raise _fail(state, "horizon reached")
        if cost > env.remaining or state.spend + cost > budget_cap:
            raise _fail(state, f"budget cap {budget_cap} exhausted")

        _ingest(state, env, state.round)
        context = (
            int(contexts[state.round]) if contexts is not None else env.sample_context()
        )
        state.spend += env.step(state.round, arm, context)
        state.stats[arm].record_pull(state.round, key=env.ledger[-1].seq)
        pulled.add(arm)
        state.round += 1

    for arm in sorted(state.remaining):
        refresh_bounds(state, arm)

    decisions = decide(state)
    for arm, verdict in sorted(decisions.items()):
        state.remaining.discard(arm)
        if verdict == "accept":
            state.accepted.append(arm)
        else:
            state.rejected.add(arm)
        logger.debug("Race round %d: arm %d %sed", state.round, arm, verdict)

    for arm in sorted(pulled):
        bounds = state.bounds[arm]
        state.trace.append(
            {
                "round": state.round,
                "arm": arm,
                "pulled": state.stats[arm].pulls,
                "returned": state.stats[arm].returned,
                "d_m": state.estimates.get(arm, math.nan),
                "lcb": bounds.lcb,
                "ucb": bounds.ucb,
                "decision": decisions.get(arm, "continue"),
            }
        )
    return state


def cutoff_from(state: RaceState, scope: str = "accepted") -> float:
    """Cut-off m: largest final UCB over the accepted arms (or every arm with finite bounds)."""
    if scope not in CUTOFF_SCOPES:
        raise ConfigurationError(f"cutoff_scope: expected one of {CUTOFF_SCOPES}")
    pool = state.accepted if scope == "accepted" else sorted(state.stats)
    finite = [state.bounds[arm].ucb for arm in pool if math.isfinite(state.bounds[arm].ucb)]
    return max(finite) if finite else math.inf


def rank_fill(state: RaceState) -> List[int]:
    """
    Complete a stalled race by ranking the arms still in L on their estimates.

    Arms without a median-of-means estimate come last, by index.
    """
    slots = state.target - len(state.accepted)
    ranked = sorted(
        state.remaining, key=lambda arm: (state.estimates.get(arm, math.inf), arm)
    )
    for arm in ranked[:slots]:
        state.remaining.discard(arm)
        state.accepted.append(arm)
    return state.accepted


def run_race(
    env: Environment,
    target: int,
    delta: float = 0.05,
    alpha: float = 1.0,
    budget_cap: Optional[float] = None,
    contexts: Optional[np.ndarray] = None,
    start_round: int = 0,
    radius_mode: str = "plugin",
    acceptance_rule: str = "responsive",
    cutoff_scope: str = "accepted",
    fallback: str = "fail",
) -> RaceResult:
    """
    Race until A' arms are accepted.

    Args:
        env: Per-run environment
        target: A', number of responsive arms to identify
        delta: Confidence parameter
        alpha: Tail parameter
        budget_cap: Identification budget cap (default B/4)
        contexts: Pre-drawn context sequence
        start_round: First decision round available to the race
        radius_mode: "plugin" or "worst_case"
        acceptance_rule: "responsive" or "as_printed"
        cutoff_scope: "accepted" or "all"
        fallback: "fail" raises on a stalled race, "rank" fills the missing
            slots from the best remaining estimates

    Returns:
        RaceResult with the accepted arms, cut-off m, spend B_id and next round

    Raises:
        IdentificationFailedError: With the partial state, when fallback is "fail"
    """
    budget = env.model.budget
    cap = budget / 4.0 if budget_cap is None else budget_cap
    if cap > budget:
        raise ConfigurationError(f"budget_cap: {cap} exceeds the total budget {budget}")

    state = RaceState.start(
        n_arms=env.model.n_arms,
        target=target,
        delta=delta,
        alpha=alpha,
        budget=budget,
        radius_mode=radius_mode,
        acceptance_rule=acceptance_rule,
        start_round=start_round,
    )

    try:
        while not state.done:
            if not state.remaining:
                raise _fail(state, "no racing arms left")
            race_round(state, env, contexts=contexts, budget_cap=cap)
    except IdentificationFailedError:
        if fallback != "rank":
            raise
        logger.warning(
            "Identification stalled at round %d with %d/%d arms accepted; ranking the rest",
            state.round,
            len(state.accepted),
            target,
        )
        rank_fill(state)

    for arm in sorted(state.stats):
        refresh_bounds(state, arm)
    cutoff = cutoff_from(state, cutoff_scope)

    logger.info(
        "Identification accepted %s, cut-off %.2f, spend %.0f over %d rounds",
        sorted(state.accepted),
        cutoff,
        state.spend,
        state.round - start_round,
    )
    return RaceResult(
        accepted=sorted(state.accepted),
        cutoff=cutoff,
        spend=state.spend,
        rounds=state.round,
        state=state,
    )
