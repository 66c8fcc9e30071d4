from typing import Optional, Sequence

import numpy as np
import pytest
import yaml

from doral_sim.bandits.env import ArmSpec, EnvModel, GeometricDelay, ParetoDelay, generate_world


def build_model(
    n_contexts: int = 2,
    n_arms: int = 3,
    dim: int = 2,
    means: Optional[Sequence[float]] = None,
    minima: Optional[Sequence[float]] = None,
    pareto_shape: float = 2.0,
    costs: Optional[Sequence[float]] = None,
    budget: float = 200.0,
    horizon: int = 300,
    noise_sigma: float = 0.0,
    world_seed: int = 0,
    **kwargs,
) -> EnvModel:
    """Small validated world with drawn features and thetas."""
    rng = np.random.default_rng(world_seed)
    features, thetas, _ = generate_world(n_contexts, n_arms, dim, rng)
    if minima is not None:
        delays = [ParetoDelay(x_min=float(value), shape=pareto_shape) for value in minima]
    else:
        means = means if means is not None else [2.0 + 2.0 * arm for arm in range(n_arms)]
        delays = [GeometricDelay(mean=float(value)) for value in means]
    costs = costs if costs is not None else [1.0] * n_arms
    arms = tuple(
        ArmSpec(id=arm, features=features[arm], cost=float(costs[arm]), delay=delays[arm])
        for arm in range(n_arms)
    )
    return EnvModel(
        pi=np.full(n_contexts, 1.0 / n_contexts),
        thetas=thetas,
        arms=arms,
        noise_sigma=noise_sigma,
        horizon=horizon,
        budget=budget,
        **kwargs,
    ).validate()


@pytest.fixture
def model_factory():
    return build_model


@pytest.fixture
def small_model():
    return build_model()


@pytest.fixture
def rng():
    return np.random.default_rng(12345)


def tiny_document(**overrides):
    """Raw experiment document with a three-arm world small enough for unit tests."""
    document = {
        "scenario": "tiny",
        "env": {
            "n_arms": 3,
            "dim": 2,
            "pi": [0.5, 0.5],
            "delay_params": [2, 4, 6],
            "noise_sigma": 0.0,
            "budget": 200,
            "horizon": 300,
            "enforce_delay_bound": False,
        },
        "policies": [
            {"kind": "DORAL", "target_arms": 2, "identification_fallback": "rank"},
            {"kind": "DLinUCB"},
        ],
        "replications": 2,
        "diagnostics_every": 50,
    }
    document.update(overrides)
    return document


@pytest.fixture
def experiment_document():
    return tiny_document


@pytest.fixture
def config_file(tmp_path):
    def write(document):
        path = tmp_path / "experiment.yaml"
        path.write_text(yaml.safe_dump(document), encoding="utf-8")
        return str(path)

    return write
