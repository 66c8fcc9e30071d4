"""
Delay-oriented allocation LP and its closed-form threshold solution.

LP_m maximises sum_j p_j pi_j eta_j subject to sum_j p_j pi_j <= rho with
p in [0, 1]^J. Its optimum serves contexts in decreasing eta order: the top
ones fully, the next one fractionally, the rest not at all.
"""

import logging
import math
from dataclasses import dataclass
from typing import Optional, Sequence, Tuple

import numpy as np

from .errors import ConfigurationError

logger = logging.getLogger(__name__)

RATIO_MODES = ("remaining", "as_printed", "static")
TOLERANCE = 1e-12


@dataclass(frozen=True, eq=False)
class LpInput:
    """
    Attributes:
        pi: Context probabilities
        eta: Best expected delayed reward per context (max_a tau_a(m) * r_{j,a})
        rho: Average budget ratio
    """

    pi: np.ndarray
    eta: np.ndarray
    rho: float

    def validate(self) -> "LpInput":
        if len(self.pi) != len(self.eta):
            raise ConfigurationError("eta: one value per context is required")
        if abs(float(np.sum(self.pi)) - 1.0) > 1e-9 or np.any(np.asarray(self.pi) < 0):
            raise ConfigurationError("pi: must be a probability vector")
        if np.any(np.asarray(self.eta) < 0):
            raise ConfigurationError("eta: best delayed rewards must be >= 0")
        if self.rho < 0:
            raise ConfigurationError(f"rho: must be >= 0, got {self.rho}")
        return self


@dataclass(frozen=True, eq=False)
class LpSolution:
    """
    Attributes:
        order: Context indices sorted by eta, largest first
        threshold: j(rho), number of contexts served with probability one
        p: Serving probability per context (indexed by context, not rank)
        value: Optimal value v(rho)
    """

    order: np.ndarray
    threshold: int
    p: np.ndarray
    value: float


def solve_lp(lp: LpInput) -> LpSolution:
    """
    Threshold solution of LP_m.

    Contexts are ranked by eta (ties by lowest index); j(rho) is the longest
    prefix whose probability mass fits in rho and the next context gets the
    leftover fraction.

    Raises:
        ConfigurationError: If the input is not a valid LP_m instance
    """
    lp.validate()
    pi = np.asarray(lp.pi, dtype=float)
    eta = np.asarray(lp.eta, dtype=float)
    order = np.argsort(-eta, kind="stable")

    p = np.zeros(len(pi))
    mass = 0.0
    threshold = 0
    for context in order:
        if mass + pi[context] <= lp.rho + TOLERANCE:
            p[context] = 1.0
            mass += pi[context]
            threshold += 1
            continue
        leftover = max(lp.rho - mass, 0.0)
        p[context] = min(leftover / pi[context], 1.0)
        break

    value = float(np.sum(p * pi * eta))
    logger.debug("LP threshold j(rho=%.4f) = %d, value %.6f", lp.rho, threshold, value)
    return LpSolution(order=order, threshold=threshold, p=p, value=value)


def best_delayed_arm(
    j: int,
    scores: Sequence[float],
    taus: Sequence[float],
    candidates: Optional[Sequence[int]] = None,
) -> Tuple[int, float]:
    """
    Arm maximising tau_a(m) * score over the candidate arms.

    Args:
        j: Context index (only used in error messages)
        scores: Reward estimate per arm (indexed by arm)
        taus: tau_a(m) per arm (indexed by arm)
        candidates: Arms allowed to compete (the accepted set); all arms when None

    Returns:
        Tuple (arm, eta_hat_j); ties go to the lowest arm index

    Raises:
        ConfigurationError: If there is no candidate arm
    """
    scores = np.asarray(scores, dtype=float)
    taus = np.asarray(taus, dtype=float)
    arms = np.arange(len(scores)) if candidates is None else np.asarray(sorted(candidates))
    if arms.size == 0:
        raise ConfigurationError(f"context {j}: no accepted arm to choose from")
    products = taus[arms] * scores[arms]
    best = int(np.argmax(products))
    return int(arms[best]), float(products[best])


def adaptive_ratio(
    remaining: float,
    t: int,
    horizon: int,
    mode: str = "remaining",
    budget: Optional[float] = None,
) -> float:
    """
    Budget ratio rho_t fed to the LP, clamped to [0, 1].

    Args:
        remaining: Remaining budget b_t
        t: Current round
        horizon: Horizon T
        mode: "remaining" (b_t / (T - t)), "as_printed" (b_t / t) or "static" (B / T)
        budget: Initial budget B (required by "static")
    """
    if mode not in RATIO_MODES:
        raise ConfigurationError(f"ratio_mode: expected one of {RATIO_MODES}")
    if mode == "remaining":
        rounds_left = horizon - t
        rho = remaining / rounds_left if rounds_left > 0 else 0.0
    elif mode == "as_printed":
        rho = remaining / t if t > 0 else math.inf
    else:
        if budget is None:
            raise ConfigurationError("ratio_mode static needs the initial budget")
        rho = budget / horizon
    if remaining <= 0:
        rho = 0.0
    return min(max(rho, 0.0), 1.0)
