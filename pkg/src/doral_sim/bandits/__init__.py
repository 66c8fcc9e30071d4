"""
Simulation core: environment, estimators, identification race, censored
ridge regression, allocation LP, the shared round loop and the policies.
"""

from .allocation import LpInput, LpSolution, adaptive_ratio, best_delayed_arm, solve_lp
from .context import RunContext
from .env import (
    ArmSpec,
    EnvModel,
    Environment,
    GeometricDelay,
    ParetoDelay,
    PendingFeedback,
    generate_world,
    mean_delay,
    realized_reward,
    sample_context,
    sample_delay,
    true_tau,
)
from .errors import (
    BudgetExhaustedError,
    ConfigurationError,
    DoralError,
    IdentificationFailedError,
    InsufficientSamplesError,
    InvalidParameterError,
    ModelValidationError,
    NotResolvedError,
)
from .estimators import (
    ConfidenceBounds,
    DelayStats,
    delayed_empirical_mean,
    estimate_tau,
    median_of_means,
    robust_bounds,
)
from .identify import RaceResult, RaceState, race_round, run_race
from .linear import ContextRegressor, index, record_feedback, record_pull, theta_hat
from .metrics import RegretSeries, RunMetrics, build_metrics, oracle_and_regret
from .simulator import Simulator
from .policies import (
    DALPPolicy,
    DLinUCBPolicy,
    DoralPolicy,
    PolicyBase,
    PolicyConfig,
    RandomLinUCBPolicy,
    dalp_run,
    dlinucb_run,
    doral_run,
    make_policy,
    random_run,
)

__all__ = [
    # Environment
    "ArmSpec",
    "EnvModel",
    "Environment",
    "GeometricDelay",
    "ParetoDelay",
    "PendingFeedback",
    "generate_world",
    "mean_delay",
    "realized_reward",
    "sample_context",
    "sample_delay",
    "true_tau",
    # Estimators and identification
    "ConfidenceBounds",
    "DelayStats",
    "delayed_empirical_mean",
    "estimate_tau",
    "median_of_means",
    "robust_bounds",
    "RaceResult",
    "RaceState",
    "race_round",
    "run_race",
    # Regression and allocation
    "ContextRegressor",
    "index",
    "record_feedback",
    "record_pull",
    "theta_hat",
    "LpInput",
    "LpSolution",
    "adaptive_ratio",
    "best_delayed_arm",
    "solve_lp",
    # Runs
    "RunContext",
    "Simulator",
    "RegretSeries",
    "RunMetrics",
    "build_metrics",
    "oracle_and_regret",
    "PolicyBase",
    "PolicyConfig",
    "DoralPolicy",
    "DLinUCBPolicy",
    "RandomLinUCBPolicy",
    "DALPPolicy",
    "make_policy",
    "doral_run",
    "dlinucb_run",
    "random_run",
    "dalp_run",
    # Errors
    "DoralError",
    "ModelValidationError",
    "ConfigurationError",
    "InvalidParameterError",
    "InsufficientSamplesError",
    "NotResolvedError",
    "BudgetExhaustedError",
    "IdentificationFailedError",
]
