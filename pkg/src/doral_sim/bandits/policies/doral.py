"""
DoralPolicy - Two-stage delay-oriented allocation

Stage 1 races the arms on their robust delay estimates to find the A' most
responsive ones and a cut-off m. Stage 2 scores the accepted arms with delayed
LinUCB, solves the allocation LP with the adaptive budget ratio, and serves
the observed context with the LP's probability.
"""

import logging
import math
from typing import TYPE_CHECKING, Dict, List, Optional, Tuple

import numpy as np

from ..allocation import LpInput, adaptive_ratio, best_delayed_arm, solve_lp
from ..env import taus_for
from ..errors import InsufficientSamplesError
from ..estimators import estimate_tau
from ..identify import RaceResult, run_race
from .config import PolicyConfig
from .dlinucb import DLinUCBPolicy

if TYPE_CHECKING:
    from ..context import RunContext

logger = logging.getLogger(__name__)


class DoralPolicy(DLinUCBPolicy):
    """
    Identify responsive arms, then allocate with the LP threshold rule.

    Example:
        policy = DoralPolicy(PolicyConfig(kind="DORAL", target_arms=5))
        metrics = Simulator(model, policy, seed=1).run()
        print(metrics.accepted, metrics.cutoff, metrics.identification_spend)
    """

    name = "DORAL"

    def __init__(self, config: Optional[PolicyConfig] = None):
        super().__init__(config or PolicyConfig(kind="DORAL"))
        self.race: Optional[RaceResult] = None
        self.taus: np.ndarray = np.zeros(0)
        self.pi: np.ndarray = np.zeros(0)
        self._best: Dict[int, Tuple[Tuple[int, Tuple[int, ...]], int, float]] = {}

    # -------------------------------------------------------------------------
    # Stage 1
    # -------------------------------------------------------------------------

    def identify(self, run: "RunContext") -> "RunContext":
        """Run the responsive-arm race, or accept every arm when the cut-off is fixed."""
        config = self.config
        model = run.env.model

        if config.fixed_cutoff is not None:
            run.cutoff = float(config.fixed_cutoff)
            run.accepted = list(range(model.n_arms))
            return run

        start = run.t
        self.race = run_race(
            run.env,
            target=config.target_arms,
            delta=config.delta,
            alpha=config.alpha,
            budget_cap=config.identification_fraction * model.budget,
            contexts=run.contexts,
            start_round=start,
            radius_mode=config.radius_mode,
            acceptance_rule=config.acceptance_rule,
            cutoff_scope=config.cutoff_scope,
            fallback=config.identification_fallback,
        )
        run.t = self.race.rounds
        run.accepted = list(self.race.accepted)
        run.identification_spend = self.race.spend
        run.identification_rounds = self.race.rounds - start
        run.race_trace = list(self.race.state.trace)

        cutoff = self.race.cutoff
        if not math.isfinite(cutoff):
            logger.warning(
                "Race left the cut-off unbounded; using fallback m=%s", config.fallback_cutoff
            )
            cutoff = config.fallback_cutoff
        run.cutoff = float(cutoff)
        return run

    def responsiveness(self, run: "RunContext") -> np.ndarray:
        """tau_a(m) per arm, from the model, the race observations, or all ones."""
        model = run.env.model
        mode = self.config.tau_mode
        if mode == "ones":
            return np.ones(model.n_arms)
        if mode == "given":
            return taus_for(model.arms, run.cutoff)

        # Returns are ingested up to the round before the first allocation round
        now = run.t - 1
        taus = np.ones(model.n_arms)
        for arm in run.accepted:
            try:
                taus[arm] = estimate_tau(self.race.state.stats[arm], run.cutoff, now, strict=False)
            except InsufficientSamplesError:
                logger.warning("Arm %d: no resolved pull to estimate tau from, using 1.0", arm)
        return taus

    def prepare(self, run: "RunContext") -> "RunContext":
        model = run.env.model
        self.config.validate(n_arms=model.n_arms, costs=model.costs)
        run = self.identify(run)

        self.pi = np.asarray(model.pi, dtype=float)
        self.taus = self.responsiveness(run)
        self.setup_learning(run, run.cutoff)

        run.add_to_result("taus", [float(tau) for tau in self.taus])
        logger.debug(
            "%s allocating from round %d with m=%.2f over arms %s",
            self.label,
            run.t,
            run.cutoff,
            run.accepted,
        )
        return run

    # -------------------------------------------------------------------------
    # Stage 2
    # -------------------------------------------------------------------------

    def setup_learning(self, run: "RunContext", window: float) -> None:
        super().setup_learning(run, window)
        self._best = {}

    def best_arms(self, arms: List[int]) -> Tuple[np.ndarray, np.ndarray]:
        """
        Best candidate arm and its delayed value eta_hat_j in every context.

        Entries are recomputed only for contexts whose regressor changed.
        """
        key = tuple(arms)
        n_contexts = len(self.pi)
        best = np.zeros(n_contexts, dtype=int)
        eta = np.zeros(n_contexts)
        for j in range(n_contexts):
            stamp = (self.regressors[j].version, key)
            cached = self._best.get(j)
            if cached is None or cached[0] != stamp:
                arm, value = best_delayed_arm(j, self.scores(j), self.taus, candidates=arms)
                cached = (stamp, arm, value)
                self._best[j] = cached
            best[j], eta[j] = cached[1], cached[2]
        return best, eta

    def choose(
        self, run: "RunContext", t: int, context: int, available: np.ndarray
    ) -> Optional[int]:
        arms = self.candidates(run, available)
        if not arms:
            return None

        best, eta = self.best_arms(arms)
        # LP_m takes eta >= 0
        eta = np.maximum(eta, 0.0)

        env = run.env
        rho = adaptive_ratio(
            env.remaining, t, run.horizon, mode=self.config.ratio_mode, budget=env.budget
        )
        solution = solve_lp(LpInput(pi=self.pi, eta=eta, rho=rho))
        serve = solution.p[context]
        arm = int(best[context])

        if run.wants_diagnostics(t):
            run.add_diagnostic(
                "allocation",
                t,
                context=context,
                rho=rho,
                threshold=solution.threshold,
                p=serve,
                eta=float(eta[context]),
                arm=arm,
                lp_value=solution.value,
            )

        if run.rng.random() >= serve:
            return None
        return arm
