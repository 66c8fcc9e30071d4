"""
Experiment runner

Plays every policy of an experiment over its seeded replications, in
parallel when asked, and reduces the runs in replication-index order.
"""

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Tuple

import numpy as np
import pandas as pd

from ..bandits.env import EnvModel
from ..bandits.errors import IdentificationFailedError
from ..bandits.metrics import RunMetrics
from ..bandits.policies.config import PolicyConfig
from ..bandits.policies.utils import make_policy
from ..bandits.simulator import Simulator
from .config import ExperimentConfig, build_env_model

logger = logging.getLogger(__name__)

CURVE_COLUMNS = [
    "scenario",
    "policy",
    "round",
    "mean_cum_reward",
    "stderr_cum_reward",
    "mean_cum_regret",
]


@dataclass
class ReplicationResult:
    """
    Outcome of one policy run, slimmed for transport between processes.

    Attributes:
        policy: Policy label
        replication: Replication index
        seed: Replication seed
        summary: Final values (see RunMetrics.summary)
        cum_reward: Per-round cumulative reward (empty when the run failed early)
        cum_regret: Per-round cumulative regret
        diagnostics: Race trace and allocation diagnostic rows
    """

    policy: str
    replication: int
    seed: int
    summary: Dict[str, Any]
    cum_reward: np.ndarray = field(default_factory=lambda: np.zeros(0))
    cum_regret: np.ndarray = field(default_factory=lambda: np.zeros(0))
    diagnostics: List[Dict[str, Any]] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return self.summary.get("status") == "ok"


@dataclass
class ExperimentResult:
    """
    Attributes:
        config: The experiment that was run
        runs: Every replication of every policy, in (policy, replication) order
        curves: Aggregated per-round curves (CURVE_COLUMNS)
        theta_scale: Global factor applied to the drawn thetas
    """

    config: ExperimentConfig
    runs: List[ReplicationResult]
    curves: pd.DataFrame
    theta_scale: float = 1.0

    @property
    def scenario(self) -> str:
        return self.config.scenario

    @property
    def failures(self) -> List[ReplicationResult]:
        return [run for run in self.runs if not run.ok]


def _slim(metrics: RunMetrics, replication: int) -> ReplicationResult:
    tags = {"policy": metrics.policy, "replication": replication, "seed": metrics.seed}
    rows = [{**tags, "source": "identify", **row} for row in metrics.race_trace]
    rows.extend({**tags, **row} for row in metrics.diagnostics)
    summary = {"replication": replication, **metrics.summary()}
    return ReplicationResult(
        policy=metrics.policy,
        replication=replication,
        seed=metrics.seed,
        summary=summary,
        cum_reward=metrics.cum_reward,
        cum_regret=metrics.cum_regret,
        diagnostics=rows,
    )


def run_replication(
    model: EnvModel,
    policy_config: PolicyConfig,
    replication: int,
    seed: int,
    diagnostics_every: int = 1000,
) -> ReplicationResult:
    """
    Run one policy once. Failures are recorded, not raised.

    Args:
        model: Environment model (shared by all replications)
        policy_config: Policy to run
        replication: Replication index
        seed: Replication seed
        diagnostics_every: Period of per-round diagnostic rows

    Returns:
        ReplicationResult with status "ok" or "failed"
    """
    policy = make_policy(policy_config)
    try:
        metrics = Simulator(model, policy, seed=seed, diagnostics_every=diagnostics_every).run()
    except IdentificationFailedError as error:
        logger.warning("%s replication %d failed: %s", policy.label, replication, error)
        if error.metrics is not None:
            return _slim(error.metrics, replication)
        metrics = None
        message = str(error)
    except Exception as error:
        logger.error("%s replication %d failed: %s", policy.label, replication, error)
        metrics = None
        message = f"{type(error).__name__}: {error}"

    if metrics is not None:
        return _slim(metrics, replication)
    return ReplicationResult(
        policy=policy.label,
        replication=replication,
        seed=seed,
        summary={
            "replication": replication,
            "policy": policy.label,
            "seed": seed,
            "status": "failed",
            "error": message,
        },
    )


def _pad(series: np.ndarray, length: int) -> np.ndarray:
    if len(series) >= length:
        return series
    fill = series[-1] if len(series) else 0.0
    return np.concatenate([series, np.full(length - len(series), fill)])


def aggregate_curves(
    scenario: str,
    runs: List[ReplicationResult],
    policy_order: List[str],
    record_every: int = 1,
) -> pd.DataFrame:
    """
    Mean and standard error of cumulative reward, and mean cumulative regret,
    per round across the successful replications of each policy.

    Shorter runs are extended with their last value up to the longest run of
    the same policy. Policies with no successful run contribute no rows.

    Returns:
        DataFrame with CURVE_COLUMNS, ordered by policy order then round
    """
    frames = []
    for policy in policy_order:
        done = sorted(
            (run for run in runs if run.policy == policy and run.ok and len(run.cum_reward)),
            key=lambda run: run.replication,
        )
        if not done:
            continue
        length = max(len(run.cum_reward) for run in done)
        rewards = np.vstack([_pad(run.cum_reward, length) for run in done])
        regrets = np.vstack([_pad(run.cum_regret, length) for run in done])

        mean_reward = rewards.mean(axis=0)
        if len(done) > 1:
            stderr = rewards.std(axis=0, ddof=1) / math.sqrt(len(done))
        else:
            stderr = np.zeros(length)

        rounds = np.arange(length)
        keep = (rounds % record_every == 0) | (rounds == length - 1)
        frames.append(
            pd.DataFrame(
                {
                    "scenario": scenario,
                    "policy": policy,
                    "round": rounds[keep],
                    "mean_cum_reward": mean_reward[keep],
                    "stderr_cum_reward": stderr[keep],
                    "mean_cum_regret": regrets.mean(axis=0)[keep],
                }
            )
        )
    if not frames:
        return pd.DataFrame(columns=CURVE_COLUMNS)
    return pd.concat(frames, ignore_index=True)[CURVE_COLUMNS]


def run_experiment(config: ExperimentConfig, workers: Optional[int] = None) -> ExperimentResult:
    """
    Run every policy of the experiment over its replications.

    Args:
        config: Validated experiment config
        workers: Worker processes (config.workers by default)

    Returns:
        ExperimentResult; deterministic given base_seed and world_seed

    Example:
        result = run_experiment(load_config("similar-delays-geometric-small"))
        print(result.curves.tail())
    """
    model, scale = build_env_model(config.env, config.resolved_world_seed)
    workers = config.workers if workers is None else workers
    tasks: List[Tuple[EnvModel, PolicyConfig, int, int, int]] = [
        (model, policy, replication, config.seed_for(replication), config.diagnostics_every)
        for policy in config.policies
        for replication in range(config.replications)
    ]
    logger.info(
        "Running %s: %d policies x %d replications on %d worker(s)",
        config.scenario,
        len(config.policies),
        config.replications,
        workers,
    )

    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as executor:
            futures = [executor.submit(run_replication, *task) for task in tasks]
            runs = [future.result() for future in futures]
    else:
        runs = []
        for task in tasks:
            runs.append(run_replication(*task))
            logger.debug("Finished %s replication %d", runs[-1].policy, runs[-1].replication)

    failed = sum(1 for run in runs if not run.ok)
    if failed:
        logger.warning("%s: %d of %d runs failed", config.scenario, failed, len(runs))

    policy_order = [policy.name for policy in config.policies]
    curves = aggregate_curves(config.scenario, runs, policy_order, config.record_every)
    logger.info("Finished %s (%d runs)", config.scenario, len(runs))
    return ExperimentResult(config=config, runs=runs, curves=curves, theta_scale=scale)
