"""
Built-in scenarios

Two delay regimes (similar and diverse) under geometric and Pareto delays,
each also available as a reduced-scale "-small" variant for smoke runs.
"""

import copy
from typing import Any, Dict, List

CONTEXT_PROBABILITIES = [0.09, 0.15, 0.11, 0.05, 0.1, 0.05, 0.08, 0.14, 0.13, 0.1]

SIMILAR_DELAYS = [100, 110, 120, 130, 140, 150, 160, 170, 180, 190]
DIVERSE_GEOMETRIC_MEANS = [100, 120, 140, 160, 200, 220, 240, 260, 280, 300]
DIVERSE_PARETO_MINIMA = [200, 220, 240, 260, 280, 320, 340, 360, 380, 400]
PARETO_SHAPE = 2.0

DEFAULT_POLICIES: List[Dict[str, Any]] = [
    {"kind": "DORAL", "target_arms": 5, "identification_fallback": "rank"},
    {"kind": "DALP"},
    {"kind": "DLinUCB"},
    {"kind": "Random"},
]

SMALL_SCALE = {"budget": 2_000.0, "horizon": 2_400, "enforce_delay_bound": False}
SMALL_REPLICATIONS = 5


def _scenario(name: str, delay_kind: str, delay_params: List[float]) -> Dict[str, Any]:
    env: Dict[str, Any] = {
        "n_arms": 10,
        "dim": 5,
        "pi": list(CONTEXT_PROBABILITIES),
        "costs": [1.0] * 10,
        "noise_sigma": 0.1,
        "budget": 85_000.0,
        "horizon": 100_000,
        "delay_kind": delay_kind,
        "delay_params": list(delay_params),
    }
    if delay_kind == "pareto":
        env["pareto_shape"] = PARETO_SHAPE
    return {
        "scenario": name,
        "env": env,
        "policies": copy.deepcopy(DEFAULT_POLICIES),
        "replications": 50,
        "base_seed": 0,
    }


def _small(preset: Dict[str, Any]) -> Dict[str, Any]:
    small = copy.deepcopy(preset)
    small["scenario"] = f"{preset['scenario']}-small"
    small["env"].update(SMALL_SCALE)
    small["replications"] = SMALL_REPLICATIONS
    return small


_FULL = [
    _scenario("similar-delays-geometric", "geometric", SIMILAR_DELAYS),
    _scenario("similar-delays-pareto", "pareto", SIMILAR_DELAYS),
    _scenario("diverse-delays-geometric", "geometric", DIVERSE_GEOMETRIC_MEANS),
    _scenario("diverse-delays-pareto", "pareto", DIVERSE_PARETO_MINIMA),
]

PRESETS: Dict[str, Dict[str, Any]] = {}
for _preset in _FULL:
    PRESETS[_preset["scenario"]] = _preset
    PRESETS[f"{_preset['scenario']}-small"] = _small(_preset)


def preset_names() -> List[str]:
    return list(PRESETS)


def get_preset(name: str) -> Dict[str, Any]:
    """Deep copy of a preset's raw config document; KeyError if unknown."""
    return copy.deepcopy(PRESETS[name])
