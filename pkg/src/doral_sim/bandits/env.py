"""
Environment - the synthetic world a policy plays against

Generates contexts, rewards and delays, holds pulled arms in the delayed
feedback queue until their arrival round, and keeps the budget ledger.
"""

import heapq
import logging
import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .errors import BudgetExhaustedError, ModelValidationError

logger = logging.getLogger(__name__)

PI_TOLERANCE = 1e-12


# =============================================================================
# DELAY DISTRIBUTIONS
# =============================================================================


@dataclass(frozen=True)
class GeometricDelay:
    """Delay supported on {1, 2, ...} with success probability 1/mean."""

    mean: float
    kind: str = field(default="geometric", init=False)

    def validate(self) -> None:
        if not math.isfinite(self.mean) or self.mean < 1:
            raise ModelValidationError(f"geometric delay: mean must be >= 1, got {self.mean}")

    @property
    def expected(self) -> float:
        return float(self.mean)

    def sample(self, rng: np.random.Generator, size: Optional[int] = None):
        draws = rng.geometric(1.0 / self.mean, size=size)
        return int(draws) if size is None else draws.astype(np.int64)

    def tau(self, m: float) -> float:
        if m < 1:
            return 0.0
        if math.isinf(m):
            return 1.0
        return 1.0 - (1.0 - 1.0 / self.mean) ** math.floor(m)


@dataclass(frozen=True)
class ParetoDelay:
    """Pareto(x_min, shape) delay, rounded up to whole decision rounds."""

    x_min: float
    shape: float
    kind: str = field(default="pareto", init=False)

    def validate(self) -> None:
        if not self.x_min > 0:
            raise ModelValidationError(f"pareto delay: x_min must be > 0, got {self.x_min}")
        if not self.shape > 0:
            raise ModelValidationError(f"pareto delay: shape must be > 0, got {self.shape}")

    @property
    def expected(self) -> float:
        if self.shape <= 1:
            return math.inf
        return self.shape * self.x_min / (self.shape - 1.0)

    def sample(self, rng: np.random.Generator, size: Optional[int] = None):
        # 1 - U lies in (0, 1], so the power never blows up
        u = 1.0 - rng.random(size=size)
        draws = np.ceil(self.x_min * u ** (-1.0 / self.shape))
        return int(draws) if size is None else draws.astype(np.int64)

    def tau(self, m: float) -> float:
        """P(D <= m); delays are whole rounds, so only floor(m) matters."""
        if math.isinf(m):
            return 1.0
        whole = math.floor(m)
        if whole < self.x_min:
            return 0.0
        return 1.0 - (self.x_min / whole) ** self.shape


DelayDistribution = Union[GeometricDelay, ParetoDelay]


# =============================================================================
# MODEL TYPES
# =============================================================================


@dataclass(frozen=True, eq=False)
class ArmSpec:
    """
    One selectable arm.

    Attributes:
        id: Arm index
        features: Feature vector f_a of dimension d
        cost: Cost paid on every pull
        delay: Delay distribution of the arm's feedback
    """

    id: int
    features: np.ndarray
    cost: float
    delay: DelayDistribution

    def validate(self) -> None:
        if not self.cost >= 0:
            raise ModelValidationError(f"arms[{self.id}].cost: must be >= 0, got {self.cost}")
        if not np.all(np.isfinite(self.features)):
            raise ModelValidationError(f"arms[{self.id}].features: non-finite component")
        self.delay.validate()


@dataclass(frozen=True, eq=False)
class EnvModel:
    """
    Immutable description of a synthetic world.

    Attributes:
        pi: Context probabilities pi_j
        thetas: J x d matrix of per-context parameters theta_j
        arms: Arm specifications
        noise_sigma: Std of the additive Gaussian reward noise
        horizon: Number of decision rounds T
        budget: Total budget B
        arm_availability: Per-round probability that an arm is available
        enforce_delay_bound: Reject worlds where a mean delay exceeds B/4
    """

    pi: np.ndarray
    thetas: np.ndarray
    arms: Tuple[ArmSpec, ...]
    noise_sigma: float = 0.1
    horizon: int = 100_000
    budget: float = 85_000.0
    arm_availability: float = 1.0
    enforce_delay_bound: bool = True

    @property
    def n_contexts(self) -> int:
        return len(self.pi)

    @property
    def n_arms(self) -> int:
        return len(self.arms)

    @property
    def dim(self) -> int:
        return int(self.thetas.shape[1])

    @property
    def features(self) -> np.ndarray:
        """A x d matrix stacking every arm's feature vector."""
        return np.vstack([arm.features for arm in self.arms])

    @property
    def costs(self) -> np.ndarray:
        return np.array([arm.cost for arm in self.arms], dtype=float)

    def expected_rewards(self) -> np.ndarray:
        """J x A matrix of <theta_j, f_a>."""
        return self.thetas @ self.features.T

    def validate(self) -> "EnvModel":
        """
        Check every model invariant.

        Returns:
            The model itself, so construction can be chained

        Raises:
            ModelValidationError: With the offending field named in the message
        """
        pi = np.asarray(self.pi, dtype=float)
        if pi.ndim != 1 or pi.size == 0:
            raise ModelValidationError("pi: must be a non-empty vector")
        if np.any(pi < 0):
            raise ModelValidationError("pi: probabilities must be >= 0")
        if abs(pi.sum() - 1.0) > PI_TOLERANCE:
            raise ModelValidationError(f"pi: probabilities sum to {pi.sum():.15g}, expected 1")

        thetas = np.asarray(self.thetas, dtype=float)
        if thetas.ndim != 2 or thetas.shape[0] != pi.size:
            raise ModelValidationError(
                f"thetas: expected {pi.size} parameter vectors, got shape {thetas.shape}"
            )
        if not self.arms:
            raise ModelValidationError("arms: at least one arm is required")

        for index, arm in enumerate(self.arms):
            if arm.id != index:
                raise ModelValidationError(f"arms[{index}].id: expected {index}, got {arm.id}")
            if arm.features.shape != (thetas.shape[1],):
                raise ModelValidationError(
                    f"arms[{index}].features: dimension {arm.features.shape} does not match "
                    f"theta dimension {thetas.shape[1]}"
                )
            arm.validate()

        if not self.noise_sigma >= 0:
            raise ModelValidationError(f"noise_sigma: must be >= 0, got {self.noise_sigma}")
        if int(self.horizon) != self.horizon or self.horizon < 1:
            raise ModelValidationError(f"horizon: must be a positive integer, got {self.horizon}")
        if not self.budget > 0:
            raise ModelValidationError(f"budget: must be > 0, got {self.budget}")
        if not 0 < self.arm_availability <= 1:
            raise ModelValidationError(
                f"arm_availability: must lie in (0, 1], got {self.arm_availability}"
            )

        limit = self.budget / 4.0
        for arm in self.arms:
            if arm.delay.expected > limit:
                if self.enforce_delay_bound:
                    raise ModelValidationError(
                        f"arms[{arm.id}].delay: mean delay {arm.delay.expected} "
                        f"exceeds B/4 = {limit}"
                    )
                logger.warning(
                    "Arm %d mean delay %.1f exceeds B/4 = %.1f (bound not enforced)",
                    arm.id,
                    arm.delay.expected,
                    limit,
                )
        return self


@dataclass(frozen=True)
class PendingFeedback:
    """A pulled arm waiting in the delay queue until its arrival round."""

    decision_round: int
    arm: int
    context: int
    reward: float
    delay: int
    seq: int = 0

    @property
    def arrival_round(self) -> int:
        return self.decision_round + self.delay


# =============================================================================
# STATELESS OPERATIONS
# =============================================================================


def sample_context(model: EnvModel, rng: np.random.Generator) -> int:
    """Draw a context index j with probability pi_j."""
    return int(rng.choice(model.n_contexts, p=model.pi))


def sample_delay(arm: ArmSpec, rng: np.random.Generator) -> int:
    """Draw a positive integer delay for one pull of the arm."""
    return arm.delay.sample(rng)


def true_tau(arm: ArmSpec, m: float) -> float:
    """Exact probability P(D <= m) that the arm's feedback returns within m rounds."""
    return arm.delay.tau(m)


def mean_delay(arm: ArmSpec) -> float:
    return arm.delay.expected


def realized_reward(
    model: EnvModel, j: int, arm: ArmSpec, rng: Optional[np.random.Generator] = None
) -> float:
    """
    Reward <theta_j, f_a> plus Gaussian noise of std noise_sigma.

    Raises:
        ModelValidationError: If the arm's features do not match theta's dimension
    """
    theta = model.thetas[j]
    if arm.features.shape != theta.shape:
        raise ModelValidationError(
            f"arms[{arm.id}].features: dimension {arm.features.shape} does not match {theta.shape}"
        )
    mean = float(theta @ arm.features)
    if model.noise_sigma == 0 or rng is None:
        return mean
    return mean + float(rng.normal(0.0, model.noise_sigma))


def generate_world(
    n_contexts: int, n_arms: int, dim: int, rng: np.random.Generator, headroom: float = 0.99
) -> Tuple[np.ndarray, np.ndarray, float]:
    """
    Draw arm features and context parameters uniformly in (0, 1).

    Thetas are rescaled by one global factor so that every expected reward
    lies in (0, 1).

    Args:
        n_contexts: Number of context classes J
        n_arms: Number of arms A
        dim: Feature dimension d
        rng: Generator for the world draw
        headroom: Largest expected reward after scaling

    Returns:
        Tuple (features A x d, thetas J x d, scale factor applied to thetas)
    """
    features = rng.uniform(0.0, 1.0, size=(n_arms, dim))
    thetas = rng.uniform(0.0, 1.0, size=(n_contexts, dim))
    top = float((thetas @ features.T).max())
    scale = headroom / top if top > 0 else 1.0
    return features, thetas * scale, scale


# =============================================================================
# PER-RUN STATE
# =============================================================================


class Environment:
    """
    Mutable per-run view of an EnvModel.

    Holds the seeded random streams, the feedback queue and the budget ledger.
    The EnvModel itself is never mutated, so one model can back any number of
    replications.

    Example:
        env = Environment(model, seed=7)
        contexts = env.draw_contexts()
        spend = env.step(t=0, action=3, context=int(contexts[0]))
        due = env.pop_due(t=250)
    """

    def __init__(self, model: EnvModel, seed: Union[int, np.random.SeedSequence] = 0):
        self.model = model
        if isinstance(seed, np.random.SeedSequence):
            seed_seq = seed
        else:
            seed_seq = np.random.SeedSequence(seed)
        context_ss, delay_ss, reward_ss, availability_ss = seed_seq.spawn(4)
        self.context_rng = np.random.default_rng(context_ss)
        self.delay_rng = np.random.default_rng(delay_ss)
        self.reward_rng = np.random.default_rng(reward_ss)
        self.availability_rng = np.random.default_rng(availability_ss)

        self.spent = 0.0
        self.pulls = 0
        self.ledger: List[PendingFeedback] = []
        self._queue: List[Tuple[int, int, PendingFeedback]] = []
        self._seq = 0

    @property
    def budget(self) -> float:
        return self.model.budget

    @property
    def remaining(self) -> float:
        return self.model.budget - self.spent

    @property
    def pending(self) -> int:
        return len(self._queue)

    def can_afford(self, arm: int) -> bool:
        return self.model.arms[arm].cost <= self.remaining

    def sample_context(self) -> int:
        return sample_context(self.model, self.context_rng)

    def draw_contexts(self, horizon: Optional[int] = None) -> np.ndarray:
        """Pre-draw the context of every round of the run."""
        size = self.model.horizon if horizon is None else horizon
        return self.context_rng.choice(self.model.n_contexts, size=size, p=self.model.pi)

    def available_arms(self) -> np.ndarray:
        """Boolean mask of the arms available this round."""
        if self.model.arm_availability >= 1.0:
            return np.ones(self.model.n_arms, dtype=bool)
        return self.availability_rng.random(self.model.n_arms) < self.model.arm_availability

    def step(self, t: int, action: Optional[int], context: int) -> float:
        """
        Execute one decision.

        Args:
            t: Decision round
            action: Arm to pull, or None to skip
            context: Context observed this round

        Returns:
            Amount spent this round (0 for a skip)

        Raises:
            BudgetExhaustedError: If the arm costs more than the remaining budget
        """
        if action is None:
            return 0.0

        arm = self.model.arms[action]
        if arm.cost > self.remaining:
            raise BudgetExhaustedError(arm.cost, self.remaining)

        self.spent += arm.cost
        self.pulls += 1

        delay = sample_delay(arm, self.delay_rng)
        reward = realized_reward(self.model, context, arm, self.reward_rng)
        record = PendingFeedback(
            decision_round=t,
            arm=action,
            context=context,
            reward=reward,
            delay=delay,
            seq=self._seq,
        )
        self.ledger.append(record)
        heapq.heappush(self._queue, (record.arrival_round, self._seq, record))
        self._seq += 1
        return arm.cost

    def pop_due(self, t: int) -> List[PendingFeedback]:
        """Remove and return every record whose arrival round is <= t, in arrival order."""
        due = []
        while self._queue and self._queue[0][0] <= t:
            due.append(heapq.heappop(self._queue)[2])
        return due

    def drain(self) -> List[PendingFeedback]:
        """Discard feedback that would arrive after the run ends."""
        dropped = [entry[2] for entry in self._queue]
        if dropped:
            logger.debug("Dropping %d feedback records still in flight", len(dropped))
        self._queue.clear()
        return dropped


def taus_for(arms: Sequence[ArmSpec], m: float) -> np.ndarray:
    """Vector of true_tau(arm, m) over the given arms."""
    return np.array([true_tau(arm, m) for arm in arms], dtype=float)
