"""
Simulator - Round loop shared by every policy

Owns the per-run environment and random streams, drives the policy hooks
round by round and assembles the run metrics from the pull ledger.
"""

import logging
from typing import TYPE_CHECKING, Optional

import numpy as np

from .context import RunContext
from .env import EnvModel, Environment
from .errors import IdentificationFailedError
from .metrics import RunMetrics, build_metrics

if TYPE_CHECKING:
    from .policies.base import PolicyBase

logger = logging.getLogger(__name__)


class Simulator:
    """
    Plays one policy against one seeded world.

    The seed is split into an environment stream (contexts, delays, rewards,
    availability) and a policy stream (skip coins). Two policies run with the
    same seed therefore see the same context sequence.

    Example:
        from doral_sim.bandits import Simulator
        from doral_sim.bandits.policies import DoralPolicy, PolicyConfig

        sim = Simulator(model, DoralPolicy(PolicyConfig(target_arms=5)), seed=3)
        metrics = sim.run()
        print(metrics.final_reward)
    """

    def __init__(
        self,
        model: EnvModel,
        policy: "PolicyBase",
        seed: int = 0,
        diagnostics_every: int = 1000,
    ):
        """
        Args:
            model: Validated environment model
            policy: Policy instance (one per run)
            seed: Replication seed
            diagnostics_every: Period of per-round diagnostic rows (0 disables)
        """
        self.model = model
        self.policy = policy
        self.seed = seed
        self.diagnostics_every = diagnostics_every

    def _start(self) -> RunContext:
        env_seq, policy_seq = np.random.SeedSequence(self.seed).spawn(2)
        env = Environment(self.model, env_seq)
        return RunContext(
            env=env,
            contexts=env.draw_contexts(),
            rng=np.random.default_rng(policy_seq),
            seed=self.seed,
            diagnostics_every=self.diagnostics_every,
        )

    def _metrics(self, run: RunContext, **extra) -> RunMetrics:
        return build_metrics(
            self.policy.label,
            self.seed,
            self.model,
            run.contexts,
            run.env.ledger,
            run.cutoff,
            accepted=list(run.accepted),
            identification_spend=run.identification_spend,
            identification_rounds=run.identification_rounds,
            race_trace=list(run.race_trace),
            diagnostics=list(run.diagnostics),
            extra_data=dict(run.extra_data),
            **extra,
        )

    def run(self) -> RunMetrics:
        """
        Execute the run.

        Returns:
            RunMetrics of the whole horizon

        Raises:
            IdentificationFailedError: With the partial metrics attached as
                ``error.metrics``
        """
        run = self._start()
        env = run.env
        logger.debug("Starting %s with seed %s", self.policy.label, self.seed)

        try:
            run = self.policy.prepare(run)
        except IdentificationFailedError as error:
            env.drain()
            run.accepted = list(error.accepted)
            run.identification_spend = error.spend
            run.identification_rounds = error.rounds
            if error.state is not None:
                run.race_trace = list(error.state.trace)
            error.metrics = self._metrics(run, status="failed", error=str(error))
            raise

        floor_cost = run.cheapest()
        for t in range(run.t, run.horizon):
            for record in env.pop_due(t):
                self.policy.on_feedback(run, record)

            # Nothing affordable is left; late feedback only matters to the metrics
            if env.remaining < floor_cost:
                break

            context = run.context_at(t)
            available = env.available_arms()
            action: Optional[int] = self.policy.choose(run, t, context, available)
            if action is None:
                continue
            if not env.can_afford(action):
                logger.debug("Round %d: arm %d unaffordable, skipping", t, action)
                continue

            env.step(t, action, context)
            self.policy.on_pull(run, t, context, action)

        env.drain()
        metrics = self._metrics(run)
        logger.debug(
            "%s seed %s finished: %d pulls, spend %.0f",
            self.policy.label,
            self.seed,
            metrics.pulls,
            metrics.total_spend,
        )
        return self.policy.finalize(run, metrics)
