"""
Robust estimation of per-arm mean delays from censored observations.

Delayed empirical means, median-of-means over disjoint baskets, and the
delayed robust confidence bounds used to race arms on responsiveness.
Logarithms are natural throughout.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, List, NamedTuple, Optional, Tuple

import numpy as np

from .errors import InsufficientSamplesError, InvalidParameterError, NotResolvedError

logger = logging.getLogger(__name__)

RADIUS_MODES = ("plugin", "worst_case")


class ConfidenceBounds(NamedTuple):
    ucb: float
    lcb: float


@dataclass
class DelayStats:
    """
    Delay observations of one arm.

    Returns may arrive out of pull order; ``observed`` always lists the
    returned delays in the order their pulls were made. ``settled`` is the
    longest run of pulls, from the first, whose delays have all returned.

    Attributes:
        arm: Arm index
        alpha: Tail parameter of the delay assumption
        delta: Confidence parameter in (0, 1)
        budget: Total budget B (enters the confidence radius)
        radius_mode: "plugin" (bias term uses d_M) or "worst_case" (uses B/2)
    """

    arm: int
    alpha: float = 1.0
    delta: float = 0.05
    budget: float = 85_000.0
    radius_mode: str = "plugin"
    pull_rounds: List[int] = field(default_factory=list)
    _returns: Dict[int, int] = field(default_factory=dict)
    _keys: Dict[Hashable, int] = field(default_factory=dict)
    _settled: List[int] = field(default_factory=list)

    @property
    def pulls(self) -> int:
        """T_a: number of pulls, returned or not."""
        return len(self.pull_rounds)

    @property
    def observed(self) -> List[int]:
        return [self._returns[index] for index in sorted(self._returns)]

    @property
    def returned(self) -> int:
        return len(self._returns)

    @property
    def settled(self) -> List[int]:
        return list(self._settled)

    @property
    def settled_count(self) -> int:
        return len(self._settled)

    def record_pull(self, round_: int, key: Optional[Hashable] = None) -> int:
        """Register a pull made at ``round_``; ``key`` later identifies its return."""
        index = len(self.pull_rounds)
        self.pull_rounds.append(round_)
        self._keys[index if key is None else key] = index
        return index

    def record_return(self, key: Hashable, delay: int) -> None:
        if delay < 1:
            raise InvalidParameterError(f"delay: observed delays must be >= 1, got {delay}")
        index = self._keys.pop(key)
        self._returns[index] = int(delay)
        while len(self._settled) in self._returns:
            self._settled.append(self._returns[len(self._settled)])

    @classmethod
    def from_observations(cls, arm: int, observed, pulls: Optional[int] = None, **kwargs):
        """
        Build stats from a list of delays returned in pull order.

        Extra pulls beyond ``len(observed)`` are recorded as still pending.
        """
        stats = cls(arm=arm, **kwargs)
        total = len(observed) if pulls is None else pulls
        if total < len(observed):
            raise InvalidParameterError("pulls: fewer pulls than observations")
        for index in range(total):
            stats.record_pull(index)
        for index, delay in enumerate(observed):
            stats.record_return(index, delay)
        return stats


def basket_count(pulls: int, delta: float) -> Tuple[int, int]:
    """
    Number of median-of-means baskets h and basket size N.

    h = max(1, min(floor(8 ln(e^{1/8} / delta)), floor(T_a / 2))), N = floor(T_a / h).

    Raises:
        InsufficientSamplesError: If fewer than two pulls were made
    """
    if pulls < 2:
        raise InsufficientSamplesError(f"T_a: basket count needs at least 2 pulls, got {pulls}")
    if not 0 < delta <= 1:
        raise InvalidParameterError(f"delta: must lie in (0, 1], got {delta}")
    confidence_baskets = math.floor(8.0 * (0.125 - math.log(delta)))
    h = max(1, min(confidence_baskets, pulls // 2))
    return h, pulls // h


def median_of_means(stats: DelayStats, h: Optional[int] = None, settled: bool = False) -> float:
    """
    Median of the basket means of the returned delays.

    The first h*N observations (pull order) are split into h consecutive
    baskets of N; any surplus is ignored. With an even h the two middle
    basket means are averaged.

    Args:
        stats: Delay observations
        h: Basket count (defaults to basket_count over the pull count, or over
            the settled count when ``settled`` is set)
        settled: Use only the settled prefix instead of every returned delay

    Raises:
        InsufficientSamplesError: If fewer than h delays are available
    """
    observed = stats.settled if settled else stats.observed
    if h is None:
        h, _ = basket_count(len(observed) if settled else stats.pulls, stats.delta)
    if len(observed) < h:
        raise InsufficientSamplesError(
            f"arm {stats.arm}: {len(observed)} returned delays cannot fill {h} baskets"
        )
    size = len(observed) // h
    baskets = np.asarray(observed[: h * size], dtype=float).reshape(h, size)
    return float(np.median(baskets.mean(axis=1)))


def confidence_radius(
    pulls: int, d_m: float, alpha: float, budget: float, radius_mode: str = "plugin"
) -> float:
    if radius_mode not in RADIUS_MODES:
        raise InvalidParameterError(f"radius_mode: expected one of {RADIUS_MODES}")
    if pulls < 1:
        raise InsufficientSamplesError("T_a: confidence radius needs at least one pull")
    if budget <= 1:
        raise InvalidParameterError(f"budget: B must exceed 1, got {budget}")
    tail = budget ** (-alpha)
    deviation = math.sqrt(2.0 * math.log(16.0 / (1.0 - tail)) / pulls)
    scale = 2.0 * d_m if radius_mode == "plugin" else budget / 2.0
    return deviation + scale * pulls ** (-min(alpha, 0.5))


def robust_bounds(
    stats: DelayStats, d_m: float, pulls: Optional[int] = None
) -> ConfidenceBounds:
    """
    Delayed robust UCB and LCB around a median-of-means estimate.

    The LCB is clamped at zero. ``pulls`` overrides T_a in the radius.

    Raises:
        InvalidParameterError: If B <= 1 (the log argument would be nonpositive)
    """
    count = stats.pulls if pulls is None else pulls
    radius = confidence_radius(count, d_m, stats.alpha, stats.budget, stats.radius_mode)
    return ConfidenceBounds(ucb=d_m + radius, lcb=max(0.0, d_m - radius))


def delayed_empirical_mean(stats: DelayStats) -> float:
    observed = stats.observed
    if not observed:
        raise InsufficientSamplesError(f"arm {stats.arm}: no returned delays")
    return float(np.mean(observed))


def empirical_mean_upper_bound(
    d_a: float, pulls: int, alpha: float, delta: float, budget: float
) -> float:
    """High-probability ceiling on the delayed empirical mean of an arm with mean delay d_a."""
    return (
        d_a
        + math.sqrt(2.0 * budget * math.log(2.0 / delta) / pulls)
        + 2.0 * d_a * pulls ** (-min(alpha, 0.5))
    )


def estimate_tau(stats: DelayStats, m: float, now: int, strict: bool = True) -> float:
    """
    Fraction of pulls whose feedback returned with delay <= m.

    Args:
        stats: Delay observations
        m: Cut-off window
        now: Current round
        strict: Raise when some pull is younger than m rounds; otherwise only
            pulls at least m rounds old enter the estimate

    Raises:
        InsufficientSamplesError: If no (resolved) pull exists
        NotResolvedError: If strict and a pull is younger than m rounds
    """
    if stats.pulls < 1:
        raise InsufficientSamplesError(f"arm {stats.arm}: no pulls to estimate tau from")

    resolved = [index for index, made in enumerate(stats.pull_rounds) if now - made >= m]
    if strict and len(resolved) < stats.pulls:
        raise NotResolvedError(
            f"arm {stats.arm}: {stats.pulls - len(resolved)} pulls are younger than m={m}"
        )
    if not resolved:
        raise InsufficientSamplesError(f"arm {stats.arm}: no pull is at least {m} rounds old")

    returns = stats._returns
    hits = sum(1 for index in resolved if index in returns and returns[index] <= m)
    return hits / len(resolved)
