"""
Experiment harness: configs and presets, seeded replications, CSV and chart
output, and the command line interface.
"""

from .config import EnvSettings, ExperimentConfig, build_env_model, config_from_dict, load_config
from .output import emit_csv, render_plots, write_manifest
from .presets import PRESETS, get_preset, preset_names
from .runner import ExperimentResult, ReplicationResult, aggregate_curves, run_experiment

__all__ = [
    "EnvSettings",
    "ExperimentConfig",
    "build_env_model",
    "config_from_dict",
    "load_config",
    "PRESETS",
    "get_preset",
    "preset_names",
    "ExperimentResult",
    "ReplicationResult",
    "aggregate_curves",
    "run_experiment",
    "emit_csv",
    "render_plots",
    "write_manifest",
]
