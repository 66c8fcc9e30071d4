import pytest

from doral_sim.bandits.errors import ConfigurationError, ModelValidationError
from doral_sim.harness.config import (
    EnvSettings,
    build_env_model,
    config_from_dict,
    environment_overrides,
    load_config,
    with_overrides,
)
from doral_sim.harness.presets import (
    DIVERSE_GEOMETRIC_MEANS,
    DIVERSE_PARETO_MINIMA,
    SIMILAR_DELAYS,
    get_preset,
    preset_names,
)


# ---------------------------------------------------------------------------
# Presets
# ---------------------------------------------------------------------------
class TestPresets:
    def test_names(self):
        assert preset_names() == [
            "similar-delays-geometric",
            "similar-delays-geometric-small",
            "similar-delays-pareto",
            "similar-delays-pareto-small",
            "diverse-delays-geometric",
            "diverse-delays-geometric-small",
            "diverse-delays-pareto",
            "diverse-delays-pareto-small",
        ]

    def test_delay_parameters(self):
        assert get_preset("similar-delays-geometric")["env"]["delay_params"] == SIMILAR_DELAYS
        assert get_preset("similar-delays-pareto")["env"]["delay_params"] == SIMILAR_DELAYS
        assert SIMILAR_DELAYS == [100, 110, 120, 130, 140, 150, 160, 170, 180, 190]
        assert DIVERSE_GEOMETRIC_MEANS == [100, 120, 140, 160, 200, 220, 240, 260, 280, 300]
        assert DIVERSE_PARETO_MINIMA == [200, 220, 240, 260, 280, 320, 340, 360, 380, 400]

    def test_full_scale_world(self):
        config = load_config("diverse-delays-pareto", environ={})
        assert config.env.budget == 85_000
        assert config.env.horizon == 100_000
        assert config.env.n_contexts == 10
        assert config.env.pareto_shape == 2.0
        assert config.replications == 50
        labels = [policy.name for policy in config.policies]
        assert labels == ["DORAL", "D-ALP", "D-LinUCB", "Random"]

    def test_small_variant(self):
        config = load_config("similar-delays-geometric-small", environ={})
        assert config.scenario == "similar-delays-geometric-small"
        assert config.env.budget == 2_000
        assert config.env.horizon == 2_400
        assert config.replications == 5

    def test_get_preset_returns_a_copy(self):
        preset = get_preset("similar-delays-geometric")
        preset["env"]["delay_params"].append(1)
        assert len(get_preset("similar-delays-geometric")["env"]["delay_params"]) == 10


# ---------------------------------------------------------------------------
# Parsing and validation
# ---------------------------------------------------------------------------
class TestConfigFromDict:
    def test_tiny_document(self, experiment_document):
        config = config_from_dict(experiment_document()).validate()
        assert config.env.delay_params == (2, 4, 6)
        assert config.policies[0].target_arms == 2
        assert config.resolved_world_seed == 0
        assert [config.seed_for(i) for i in range(2)] == [0, 1]

    def test_pi_must_sum_to_one(self, experiment_document):
        document = experiment_document()
        document["env"]["pi"] = [0.5, 0.4]
        with pytest.raises(ModelValidationError, match="pi"):
            config_from_dict(document).validate()

    def test_unknown_top_level_key(self, experiment_document):
        with pytest.raises(ConfigurationError, match="unknown keys"):
            config_from_dict(experiment_document(repetitions=3))

    def test_unknown_policy_key(self, experiment_document):
        document = experiment_document(policies=[{"kind": "DORAL", "targets": 2}])
        with pytest.raises(ConfigurationError, match=r"policies\[0\]"):
            config_from_dict(document)

    def test_duplicate_labels(self, experiment_document):
        document = experiment_document(policies=[{"kind": "DLinUCB"}, {"kind": "DLinUCB"}])
        with pytest.raises(ConfigurationError, match="duplicate"):
            config_from_dict(document).validate()

    def test_labels_tell_variants_apart(self, experiment_document):
        document = experiment_document(
            policies=[
                {"kind": "DLinUCB"},
                {"kind": "DLinUCB", "label": "D-LinUCB-m50", "cutoff": 50},
            ]
        )
        config = config_from_dict(document).validate()
        assert [policy.name for policy in config.policies] == ["D-LinUCB", "D-LinUCB-m50"]

    def test_policy_errors_name_their_index(self, experiment_document):
        policies = [{"kind": "DLinUCB"}, {"kind": "DORAL", "target_arms": 9}]
        document = experiment_document(policies=policies)
        with pytest.raises(ConfigurationError, match=r"policies\[1\]\.target_arms"):
            config_from_dict(document).validate()

    def test_delay_params_match_arm_count(self, experiment_document):
        document = experiment_document()
        document["env"]["delay_params"] = [2, 4]
        with pytest.raises(ConfigurationError, match="delay_params"):
            config_from_dict(document).validate()

    def test_harness_settings(self, experiment_document):
        with pytest.raises(ConfigurationError, match="replications"):
            config_from_dict(experiment_document(replications=0)).validate()
        with pytest.raises(ConfigurationError, match="plot_format"):
            config_from_dict(experiment_document(plot_format="gif")).validate()

    def test_preset_with_overrides(self):
        config = config_from_dict(
            {"preset": "diverse-delays-geometric-small", "replications": 2, "env": {"budget": 500}}
        ).validate()
        assert config.scenario == "diverse-delays-geometric-small"
        assert config.replications == 2
        assert config.env.budget == 500
        assert list(config.env.delay_params) == DIVERSE_GEOMETRIC_MEANS

    def test_unknown_preset(self):
        with pytest.raises(ConfigurationError, match="preset"):
            config_from_dict({"preset": "fast-delays"})


# ---------------------------------------------------------------------------
# World construction
# ---------------------------------------------------------------------------
class TestBuildEnvModel:
    def test_world_seed_fixes_the_draw(self, experiment_document):
        settings = config_from_dict(experiment_document()).env
        first, _ = build_env_model(settings, seed=3)
        second, _ = build_env_model(settings, seed=3)
        assert (first.features == second.features).all()
        assert (first.thetas == second.thetas).all()

    def test_explicit_world(self):
        settings = EnvSettings(
            pi=(1.0,),
            n_arms=2,
            dim=2,
            delay_params=(1, 1),
            features=((1.0, 0.0), (0.0, 1.0)),
            thetas=((0.3, 0.6),),
            budget=10,
            horizon=20,
        ).validate()
        model, scale = build_env_model(settings, seed=0)
        assert scale == 1.0
        assert model.expected_rewards().tolist() == [[0.3, 0.6]]

    def test_features_without_thetas(self):
        with pytest.raises(ConfigurationError, match="features and thetas"):
            EnvSettings(
                pi=(1.0,), n_arms=1, dim=1, delay_params=(1,), features=((1.0,),)
            ).validate()


# ---------------------------------------------------------------------------
# Loading and overrides
# ---------------------------------------------------------------------------
class TestLoadConfig:
    def test_yaml_file(self, config_file, experiment_document):
        config = load_config(config_file(experiment_document()), environ={})
        assert config.scenario == "tiny"
        assert config.output_dir == "results"

    def test_yaml_file_with_preset(self, config_file):
        path = config_file({"preset": "similar-delays-pareto-small", "base_seed": 7})
        config = load_config(path, environ={})
        assert config.base_seed == 7
        assert config.env.delay_kind == "pareto"

    def test_environment_overrides(self, config_file, tmp_path, experiment_document):
        environ = {"DORAL_OUTPUT_DIR": str(tmp_path / "out"), "DORAL_WORKERS": "3"}
        config = load_config(config_file(experiment_document()), environ=environ)
        assert config.output_dir == str(tmp_path / "out")
        assert config.workers == 3

    def test_bad_worker_count(self):
        with pytest.raises(ConfigurationError, match="DORAL_WORKERS"):
            environment_overrides({"DORAL_WORKERS": "many"})

    def test_invalid_yaml(self, tmp_path):
        path = tmp_path / "broken.yaml"
        path.write_text("env: [unclosed", encoding="utf-8")
        with pytest.raises(ConfigurationError, match="YAML"):
            load_config(str(path), environ={})

    def test_missing_source(self):
        with pytest.raises(ConfigurationError, match="neither a file nor a preset"):
            load_config("no-such-experiment", environ={})

    def test_with_overrides_skips_none(self, config_file, experiment_document):
        config = load_config(config_file(experiment_document()), environ={})
        assert with_overrides(config, base_seed=None) is config
        assert with_overrides(config, base_seed=11, plots=False).base_seed == 11
