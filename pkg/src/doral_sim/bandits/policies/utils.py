"""
Policy Utilities - Standalone run functions

Functions that play one policy against one world without building the
policy and the simulator by hand. They use the policy classes internally.
"""

from dataclasses import replace
from typing import Dict, Optional, Type

from ..env import EnvModel
from ..errors import ConfigurationError
from ..metrics import RunMetrics, oracle_and_regret  # noqa: F401
from ..simulator import Simulator
from .base import PolicyBase
from .config import PolicyConfig
from .dalp import DALPPolicy
from .dlinucb import DLinUCBPolicy
from .doral import DoralPolicy
from .random_linucb import RandomLinUCBPolicy

POLICY_CLASSES: Dict[str, Type[PolicyBase]] = {
    "DORAL": DoralPolicy,
    "DLinUCB": DLinUCBPolicy,
    "Random": RandomLinUCBPolicy,
    "DALP": DALPPolicy,
}


def make_policy(config: PolicyConfig) -> PolicyBase:
    """
    Build a fresh policy instance for one run.

    Raises:
        ConfigurationError: If the kind is unknown
    """
    try:
        policy_class = POLICY_CLASSES[config.kind]
    except KeyError:
        raise ConfigurationError(
            f"kind: expected one of {tuple(POLICY_CLASSES)}, got {config.kind!r}"
        ) from None
    return policy_class(config)


def _run(
    kind: str,
    model: EnvModel,
    config: Optional[PolicyConfig],
    seed: int,
    diagnostics_every: int,
) -> RunMetrics:
    config = replace(config, kind=kind) if config is not None else PolicyConfig(kind=kind)
    policy = make_policy(config)
    return Simulator(model, policy, seed=seed, diagnostics_every=diagnostics_every).run()


def doral_run(
    model: EnvModel,
    config: Optional[PolicyConfig] = None,
    seed: int = 0,
    diagnostics_every: int = 1000,
) -> RunMetrics:
    """
    Run DORAL: identification race, then LP allocation with delayed LinUCB.

    Args:
        model: Environment model
        config: Policy settings (kind is forced to DORAL)
        seed: Replication seed
        diagnostics_every: Period of allocation diagnostic rows

    Returns:
        RunMetrics of the run

    Raises:
        IdentificationFailedError: When the race stalls and the fallback is
            "fail"; the partial metrics are on ``error.metrics``

    Example:
        metrics = doral_run(model, PolicyConfig(target_arms=5), seed=11)
        print(metrics.accepted, metrics.cutoff)
    """
    return _run("DORAL", model, config, seed, diagnostics_every)


def dlinucb_run(
    model: EnvModel,
    config: Optional[PolicyConfig] = None,
    seed: int = 0,
    diagnostics_every: int = 1000,
) -> RunMetrics:
    """Run greedy delayed LinUCB over every arm until the budget is spent."""
    return _run("DLinUCB", model, config, seed, diagnostics_every)


def random_run(
    model: EnvModel,
    config: Optional[PolicyConfig] = None,
    seed: int = 0,
    diagnostics_every: int = 1000,
) -> RunMetrics:
    """Run delayed LinUCB that only pulls with probability b_t / B."""
    return _run("Random", model, config, seed, diagnostics_every)


def dalp_run(
    model: EnvModel,
    config: Optional[PolicyConfig] = None,
    seed: int = 0,
    diagnostics_every: int = 1000,
) -> RunMetrics:
    """Run the allocation LP over every arm with tau fixed to one."""
    return _run("DALP", model, config, seed, diagnostics_every)
