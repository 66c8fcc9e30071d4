"""
Experiment configuration

YAML documents (or built-in presets) parsed into frozen dataclasses, with
.env / process environment overrides for machine-specific settings.
"""

import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Tuple

import numpy as np
import yaml

from ..bandits.env import ArmSpec, EnvModel, GeometricDelay, ParetoDelay, generate_world
from ..bandits.errors import ConfigurationError, ModelValidationError
from ..bandits.policies.config import PolicyConfig
from .presets import PRESETS, get_preset

logger = logging.getLogger(__name__)

DELAY_KINDS = ("geometric", "pareto")
PLOT_FORMATS = ("png", "svg", "pdf")

ENV_OUTPUT_DIR = "DORAL_OUTPUT_DIR"
ENV_WORKERS = "DORAL_WORKERS"
ENV_LOG_LEVEL = "DORAL_LOG_LEVEL"
ENV_TIMEZONE = "DORAL_TIMEZONE"


@dataclass(frozen=True)
class EnvSettings:
    """
    World parameters of a scenario.

    Attributes:
        pi: Context probabilities (J = len(pi))
        n_arms: Number of arms A
        dim: Feature dimension d
        delay_kind: "geometric" (delay_params are means) or "pareto" (minima)
        delay_params: One delay parameter per arm
        pareto_shape: Tail index of Pareto delays
        costs: Per-arm costs (unit costs when omitted)
        noise_sigma: Std of the reward noise
        budget: Total budget B
        horizon: Number of rounds T
        arm_availability: Per-round availability probability of each arm
        enforce_delay_bound: Reject mean delays above B/4 instead of warning
        features: Explicit A x d features (drawn from the world seed when omitted)
        thetas: Explicit J x d parameters (drawn from the world seed when omitted)
    """

    pi: Tuple[float, ...]
    n_arms: int = 10
    dim: int = 5
    delay_kind: str = "geometric"
    delay_params: Tuple[float, ...] = ()
    pareto_shape: float = 2.0
    costs: Optional[Tuple[float, ...]] = None
    noise_sigma: float = 0.1
    budget: float = 85_000.0
    horizon: int = 100_000
    arm_availability: float = 1.0
    enforce_delay_bound: bool = True
    features: Optional[Tuple[Tuple[float, ...], ...]] = None
    thetas: Optional[Tuple[Tuple[float, ...], ...]] = None

    @property
    def n_contexts(self) -> int:
        return len(self.pi)

    @property
    def arm_costs(self) -> Tuple[float, ...]:
        return self.costs if self.costs is not None else (1.0,) * self.n_arms

    def delays(self):
        if self.delay_kind == "geometric":
            return [GeometricDelay(mean=float(value)) for value in self.delay_params]
        return [
            ParetoDelay(x_min=float(value), shape=self.pareto_shape) for value in self.delay_params
        ]

    def validate(self) -> "EnvSettings":
        if self.delay_kind not in DELAY_KINDS:
            raise ConfigurationError(
                f"env.delay_kind: expected one of {DELAY_KINDS}, got {self.delay_kind!r}"
            )
        if len(self.delay_params) != self.n_arms:
            raise ConfigurationError(
                f"env.delay_params: expected {self.n_arms} values, got {len(self.delay_params)}"
            )
        if len(self.arm_costs) != self.n_arms:
            raise ConfigurationError(
                f"env.costs: expected {self.n_arms} values, got {len(self.arm_costs)}"
            )
        if self.n_arms < 1 or self.dim < 1:
            raise ConfigurationError("env: n_arms and dim must be >= 1")
        if (self.features is None) != (self.thetas is None):
            raise ConfigurationError("env: give both features and thetas, or neither")
        return self


@dataclass(frozen=True)
class ExperimentConfig:
    """
    One scenario, its policies and how to replicate them.

    Attributes:
        scenario: Scenario name (names the chart file)
        env: World parameters
        policies: Policies to compare, in display order
        replications: Runs per policy (seed = base_seed + replication index)
        base_seed: First replication seed
        world_seed: Seed of the feature/theta draw (base_seed when omitted)
        output_dir: Directory the CSVs, charts and manifest go to
        workers: Worker processes for the replications
        record_every: Keep every n-th round in curves.csv
        diagnostics_every: Period of per-round diagnostic rows (0 disables)
        plot_format: Chart file format
        plots: Render charts
    """

    scenario: str
    env: EnvSettings
    policies: Tuple[PolicyConfig, ...]
    replications: int = 50
    base_seed: int = 0
    world_seed: Optional[int] = None
    output_dir: str = "results"
    workers: int = 1
    record_every: int = 1
    diagnostics_every: int = 1000
    plot_format: str = "png"
    plots: bool = True

    @property
    def resolved_world_seed(self) -> int:
        return self.base_seed if self.world_seed is None else self.world_seed

    def seed_for(self, replication: int) -> int:
        return self.base_seed + replication

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)

    def validate(self) -> "ExperimentConfig":
        """
        Check every setting, including the world and policy invariants.

        Raises:
            ConfigurationError: For harness or policy settings
            ModelValidationError: For world parameters
        """
        if not self.scenario:
            raise ConfigurationError("scenario: a name is required")
        if self.replications < 1:
            raise ConfigurationError(f"replications: must be >= 1, got {self.replications}")
        if self.workers < 1:
            raise ConfigurationError(f"workers: must be >= 1, got {self.workers}")
        if self.record_every < 1:
            raise ConfigurationError(f"record_every: must be >= 1, got {self.record_every}")
        if self.diagnostics_every < 0:
            raise ConfigurationError("diagnostics_every: must be >= 0")
        if self.plot_format not in PLOT_FORMATS:
            raise ConfigurationError(
                f"plot_format: expected one of {PLOT_FORMATS}, got {self.plot_format!r}"
            )
        if not self.policies:
            raise ConfigurationError("policies: at least one policy is required")

        self.env.validate()
        model, _ = build_env_model(self.env, self.resolved_world_seed)

        names = [policy.name for policy in self.policies]
        duplicates = sorted({name for name in names if names.count(name) > 1})
        if duplicates:
            raise ConfigurationError(f"policies: duplicate labels {duplicates}; set 'label'")
        for index, policy in enumerate(self.policies):
            try:
                policy.validate(n_arms=model.n_arms, costs=model.costs)
            except ConfigurationError as error:
                raise ConfigurationError(f"policies[{index}].{error}") from error
        return self


# =============================================================================
# WORLD CONSTRUCTION
# =============================================================================


def build_env_model(settings: EnvSettings, seed: int) -> Tuple[EnvModel, float]:
    """
    Materialize the world of a scenario.

    Args:
        settings: World parameters
        seed: World seed for the feature and theta draw

    Returns:
        Tuple (validated EnvModel, scale applied to the drawn thetas)

    Raises:
        ModelValidationError: If the resulting world violates a model invariant
    """
    if settings.features is not None and settings.thetas is not None:
        features = np.asarray(settings.features, dtype=float)
        thetas = np.asarray(settings.thetas, dtype=float)
        scale = 1.0
        if features.shape != (settings.n_arms, settings.dim):
            raise ModelValidationError(
                f"env.features: expected shape {(settings.n_arms, settings.dim)}, "
                f"got {features.shape}"
            )
    else:
        rng = np.random.default_rng(np.random.SeedSequence(seed))
        features, thetas, scale = generate_world(
            settings.n_contexts, settings.n_arms, settings.dim, rng
        )

    arms = tuple(
        ArmSpec(id=index, features=features[index], cost=float(cost), delay=delay)
        for index, (cost, delay) in enumerate(zip(settings.arm_costs, settings.delays()))
    )
    model = EnvModel(
        pi=np.asarray(settings.pi, dtype=float),
        thetas=thetas,
        arms=arms,
        noise_sigma=settings.noise_sigma,
        horizon=int(settings.horizon),
        budget=float(settings.budget),
        arm_availability=settings.arm_availability,
        enforce_delay_bound=settings.enforce_delay_bound,
    )
    return model.validate(), scale


# =============================================================================
# PARSING
# =============================================================================


def _check_keys(section: str, data: Mapping[str, Any], cls) -> None:
    if not isinstance(data, Mapping):
        raise ConfigurationError(f"{section}: expected a mapping, got {type(data).__name__}")
    known = {item.name for item in fields(cls)}
    unknown = sorted(set(data) - known)
    if unknown:
        raise ConfigurationError(f"{section}: unknown keys {unknown}")


def _tuple(value: Any) -> Any:
    if isinstance(value, (list, tuple)):
        return tuple(_tuple(item) for item in value)
    return value


def env_from_dict(data: Mapping[str, Any]) -> EnvSettings:
    data = dict(data)
    data.pop("n_contexts", None)
    _check_keys("env", data, EnvSettings)
    if "pi" not in data:
        raise ConfigurationError("env.pi: context probabilities are required")
    return EnvSettings(**{key: _tuple(value) for key, value in data.items()})


def policy_from_dict(index: int, data: Mapping[str, Any]) -> PolicyConfig:
    _check_keys(f"policies[{index}]", data, PolicyConfig)
    return PolicyConfig(**dict(data))


def _merge(base: Dict[str, Any], override: Mapping[str, Any]) -> Dict[str, Any]:
    merged = dict(base)
    for key, value in override.items():
        if isinstance(value, Mapping) and isinstance(merged.get(key), Mapping):
            merged[key] = _merge(dict(merged[key]), value)
        else:
            merged[key] = value
    return merged


def config_from_dict(data: Mapping[str, Any]) -> ExperimentConfig:
    """
    Build an ExperimentConfig from a raw document.

    A ``preset`` key starts from that built-in scenario; the remaining keys
    override it (mappings are merged, lists replace).
    """
    data = dict(data)
    preset = data.pop("preset", None)
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigurationError(f"preset: unknown preset {preset!r}")
        data = _merge(get_preset(preset), data)

    _check_keys("config", data, ExperimentConfig)
    if "env" not in data:
        raise ConfigurationError("env: world parameters are required")
    policies = data.get("policies") or []
    if not isinstance(policies, list):
        raise ConfigurationError("policies: expected a list")

    values = dict(data)
    values["env"] = env_from_dict(data["env"])
    values["policies"] = tuple(policy_from_dict(i, item) for i, item in enumerate(policies))
    values.setdefault("scenario", preset or "experiment")
    return ExperimentConfig(**values)


def environment_overrides(environ: Optional[Mapping[str, str]] = None) -> Dict[str, Any]:
    """Harness settings taken from the process environment (after load_dotenv)."""
    environ = os.environ if environ is None else environ
    overrides: Dict[str, Any] = {}
    if environ.get(ENV_OUTPUT_DIR):
        overrides["output_dir"] = environ[ENV_OUTPUT_DIR]
    if environ.get(ENV_WORKERS):
        try:
            overrides["workers"] = int(environ[ENV_WORKERS])
        except ValueError:
            raise ConfigurationError(
                f"{ENV_WORKERS}: expected an integer, got {environ[ENV_WORKERS]!r}"
            ) from None
    return overrides


def with_overrides(config: ExperimentConfig, **overrides: Any) -> ExperimentConfig:
    """Copy of the config with every non-None override applied, re-validated."""
    values = {key: value for key, value in overrides.items() if value is not None}
    if not values:
        return config
    return replace(config, **values).validate()


def load_config(
    source: str, environ: Optional[Mapping[str, str]] = None
) -> ExperimentConfig:
    """
    Load and validate an experiment config from a YAML file or a preset name.

    Args:
        source: Path to a YAML document, or the name of a built-in preset
        environ: Environment to read overrides from (os.environ by default)

    Returns:
        Validated ExperimentConfig

    Raises:
        ConfigurationError: Parse errors, unknown keys, invalid settings
        ModelValidationError: Invalid world parameters

    Example:
        config = load_config("diverse-delays-pareto-small")
        config = load_config("experiments/heavy_tails.yaml")
    """
    path = Path(source)
    if path.is_file():
        try:
            with open(path, "r", encoding="utf-8") as handle:
                data = yaml.safe_load(handle)
        except yaml.YAMLError as error:
            raise ConfigurationError(f"{path}: cannot parse YAML: {error}") from error
        if not isinstance(data, Mapping):
            raise ConfigurationError(f"{path}: expected a mapping at the top level")
        logger.debug("Loaded config from %s", path)
    elif source in PRESETS:
        data = {"preset": source}
    else:
        raise ConfigurationError(f"config: {source!r} is neither a file nor a preset")

    config = config_from_dict(data)
    overrides = environment_overrides(environ)
    if overrides:
        config = replace(config, **overrides)
    return config.validate()
