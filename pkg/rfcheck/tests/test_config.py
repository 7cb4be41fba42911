import argparse
import json
import pathlib

import pytest

from rfcheck.config import load_run_config
from rfcheck.errors import ConfigurationError


def write_config(directory: pathlib.Path, settings: dict, name="run.json") -> pathlib.Path:
    path = directory.joinpath(name)
    path.write_text(json.dumps(settings))
    return path


def make_args(config, **overrides):
    values = {"seed": None, "threads": None, "out": None}
    values.update(overrides)
    return argparse.Namespace(config=config, **values)


@pytest.fixture
def model_path(tmp_path):
    path = tmp_path.joinpath("model.yaml")
    path.write_text("p: 2\nnoise_sigma: 0\ncomponents:\n  - {name: linear}\n")
    return path


def test_gen_config(tmp_path, model_path):
    config_path = write_config(tmp_path, {"model": "model.yaml", "n": 100, "seed": 3})
    config = load_run_config("gen", make_args(config_path))
    assert config.command == "gen"
    assert config.seed == 3
    assert config.threads == 1
    assert config.model == model_path
    assert config.out == tmp_path.joinpath("output")
    assert config.out.is_dir()


def test_flag_overrides(tmp_path, model_path):
    config_path = write_config(
        tmp_path, {"model": "model.yaml", "n": 100, "seed": 3, "threads": 2}
    )
    out = tmp_path.joinpath("elsewhere")
    config = load_run_config("gen", make_args(config_path, seed=11, threads=4, out=out))
    assert (config.seed, config.threads, config.out) == (11, 4, out)
    assert config.snapshot() == {"model": str(model_path), "n": 100, "seed": 11}


def test_yaml_config_with_relative_out(tmp_path, model_path):
    config_path = tmp_path.joinpath("run.yaml")
    config_path.write_text("model: model.yaml\nn: 10\nseed: 0\nout: results\n")
    config = load_run_config("gen", make_args(config_path))
    assert config.out == tmp_path.joinpath("results")


@pytest.mark.parametrize(
    ["settings", "match"],
    [
        pytest.param({"model": "model.yaml", "seed": 1}, "'n' is a required", id="missing_n"),
        pytest.param(
            {"model": "model.yaml", "n": 0, "seed": 1}, "invalid config field 'n'", id="zero_n"
        ),
        pytest.param(
            {"model": "model.yaml", "n": 5, "seed": -1}, "field 'seed'", id="negative_seed"
        ),
        pytest.param(
            {"model": "model.yaml", "n": 5, "seed": 1, "trees": 3},
            "Additional properties",
            id="unknown_field",
        ),
        pytest.param(
            {"model": "missing.yaml", "n": 5, "seed": 1},
            "model file not found",
            id="missing_model",
        ),
        pytest.param(
            {"model": "model.yaml", "n": 5, "seed": 1, "name": "../escape"},
            "field 'name'",
            id="bad_name",
        ),
    ],
)
def test_gen_config_errors(tmp_path, model_path, settings, match):
    config_path = write_config(tmp_path, settings)
    with pytest.raises(ConfigurationError, match=match):
        load_run_config("gen", make_args(config_path))


def test_missing_config_file(tmp_path):
    with pytest.raises(ConfigurationError, match="config file not found"):
        load_run_config("gen", make_args(tmp_path.joinpath("run.json")))


def test_unparsable_config_file(tmp_path):
    config_path = tmp_path.joinpath("run.json")
    config_path.write_text("{seed: 1")
    with pytest.raises(ConfigurationError, match="cannot parse"):
        load_run_config("gen", make_args(config_path))


def test_config_must_be_a_mapping(tmp_path):
    config_path = tmp_path.joinpath("run.json")
    config_path.write_text("[1, 2]")
    with pytest.raises(ConfigurationError, match="dictionary"):
        load_run_config("gen", make_args(config_path))


def test_experiment_config(tmp_path, model_path):
    settings = {
        "model": "model.yaml",
        "seed": 5,
        "trees": 10,
        "replicates": 2,
        "schedule": {"rule": "regime2", "n_grid": [500, 2000]},
        "n_test": 1000,
    }
    config = load_run_config(
        "experiment", make_args(write_config(tmp_path, settings)), experiment="consistency"
    )
    assert config.command == "consistency"
    assert config.settings["schedule"]["n_grid"] == [500, 2000]


def test_experiment_config_lacks_fields(tmp_path, model_path):
    settings = {"model": "model.yaml", "seed": 5, "trees": 10, "replicates": 2}
    with pytest.raises(ConfigurationError, match="lacks required field.*n_grid, k, n_query"):
        load_run_config(
            "experiment", make_args(write_config(tmp_path, settings)), experiment="sparsity"
        )


def test_schedule_rule_validated(tmp_path, model_path):
    settings = {
        "model": "model.yaml",
        "seed": 5,
        "trees": 10,
        "replicates": 2,
        "schedule": {"rule": "regime9", "n_grid": [500]},
        "n_test": 1000,
    }
    with pytest.raises(ConfigurationError, match="schedule.rule"):
        load_run_config(
            "experiment",
            make_args(write_config(tmp_path, settings)),
            experiment="consistency",
        )
