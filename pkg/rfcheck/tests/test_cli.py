"""
End-to-end runs of the rfcheck command line script.
"""

import json
import pathlib
import subprocess

import pytest

model_yaml = """\
p: 3
informative: 2
noise_sigma: 0.1
components:
  - {name: linear, slope: 2}
  - {name: sine}
"""


def run(*args):
    process = subprocess.run(
        ["rfcheck", *map(str, args)], capture_output=True, encoding="utf-8"
    )
    print(" ".join(process.args))
    print(process.stderr)
    return process


def write_json(path: pathlib.Path, data: dict) -> pathlib.Path:
    path.write_text(json.dumps(data))
    return path


@pytest.fixture
def workdir(tmp_path):
    tmp_path.joinpath("model.yaml").write_text(model_yaml)
    return tmp_path


def generate(workdir, n=200, seed=1, name="train"):
    config = write_json(
        workdir / f"gen-{name}.json",
        {"model": "model.yaml", "n": n, "seed": seed, "name": name},
    )
    process = run("gen", "--config", config)
    assert process.returncode == 0
    path, digest = process.stdout.rstrip("\n").split("\t")
    return pathlib.Path(path), digest


def test_gen(workdir):
    path, digest = generate(workdir)
    assert path == workdir / "output" / "train.csv"
    lines = path.read_text().splitlines()
    assert lines[0] == "n,p,sigma,seed"
    assert lines[1] == "200,3,0.10000000000000001,1"
    assert len(lines) == 202
    again, digest_again = generate(workdir)
    assert digest_again == digest


def test_gen_seed_flag_changes_digest(workdir):
    _, digest = generate(workdir)
    config = workdir / "gen-train.json"
    process = run("gen", "--config", config, "--seed", "2")
    assert process.returncode == 0
    assert process.stdout.rstrip("\n").split("\t")[1] != digest


@pytest.mark.parametrize(
    ["settings", "message"],
    [
        pytest.param(
            {"model": "absent.yaml", "n": 10, "seed": 1},
            "model file not found",
            id="missing_model",
        ),
        pytest.param(
            {"model": "model.yaml", "n": 0, "seed": 1},
            "invalid config field 'n'",
            id="zero_rows",
        ),
    ],
)
def test_gen_invalid_config(workdir, settings, message):
    config = write_json(workdir / "gen.json", settings)
    process = run("gen", "--config", config)
    assert process.returncode == 2
    assert message in process.stderr
    assert process.stdout == ""


def test_fit_and_predict_interpolate(workdir):
    dataset_path, _ = generate(workdir, n=60)
    fit_config = write_json(
        workdir / "fit.json",
        {"dataset": str(dataset_path), "forest": {"trees": 5, "mtry": 1}, "seed": 4},
    )
    process = run("fit", "--config", fit_config, "--threads", "2")
    assert process.returncode == 0
    forest_path = pathlib.Path(process.stdout.split("\t")[0])
    assert forest_path == workdir / "output" / "forest.json"

    predict_config = write_json(
        workdir / "predict.json",
        {"forest": str(forest_path), "queries": str(dataset_path)},
    )
    process = run("predict", "--config", predict_config)
    assert process.returncode == 0
    predictions_path = pathlib.Path(process.stdout.strip())
    predictions = [float(x) for x in predictions_path.read_text().splitlines()]
    responses = [
        float(line.split(",")[-1]) for line in dataset_path.read_text().splitlines()[2:]
    ]
    # a_n = t_n = n: every tree interpolates its training points
    assert predictions == pytest.approx(responses, abs=1e-12)
    errors_path = predictions_path.with_name("prediction_stderr.csv")
    errors = [float(x) for x in errors_path.read_text().splitlines()]
    assert errors == pytest.approx([0.0] * len(responses), abs=1e-12)


def test_fit_is_independent_of_threads(workdir):
    dataset_path, _ = generate(workdir, n=100)
    digests = []
    for threads in 1, 3:
        config = write_json(
            workdir / "fit.json",
            {
                "dataset": str(dataset_path),
                "forest": {"trees": 8, "subsample_size": 50, "leaves": 10},
                "seed": 5,
                "out": f"fit-{threads}",
            },
        )
        process = run("fit", "--config", config, "--threads", threads)
        assert process.returncode == 0
        digests.append(process.stdout.rstrip("\n").split("\t")[1])
    assert digests[0] == digests[1]


def test_fit_leaves_above_subsample(workdir):
    dataset_path, _ = generate(workdir, n=50)
    config = write_json(
        workdir / "fit.json",
        {
            "dataset": str(dataset_path),
            "forest": {"trees": 2, "subsample_size": 10, "leaves": 20},
            "seed": 1,
        },
    )
    process = run("fit", "--config", config)
    assert process.returncode == 2
    assert "ConfigurationError" in process.stderr


def test_predict_wrong_dimension(workdir):
    dataset_path, _ = generate(workdir, n=30)
    fit_config = write_json(
        workdir / "fit.json", {"dataset": str(dataset_path), "forest": {"trees": 2}, "seed": 1}
    )
    forest_path = pathlib.Path(run("fit", "--config", fit_config).stdout.split("\t")[0])
    queries = workdir / "queries.csv"
    queries.write_text("0.1,0.2\n0.3,0.4\n")
    config = write_json(
        workdir / "predict.json", {"forest": str(forest_path), "queries": str(queries)}
    )
    process = run("predict", "--config", config)
    assert process.returncode == 2
    assert "p=3 is required" in process.stderr


def consistency_config(workdir, out, **changes):
    settings = {
        "model": "model.yaml",
        "seed": 9,
        "trees": 3,
        "replicates": 2,
        "n_test": 1000,
        "schedule": {"rule": "regime2", "n_grid": [50, 100]},
        "out": out,
    }
    settings.update(changes)
    return write_json(workdir / f"{out}.json", settings)


@pytest.mark.integration
def test_experiment_output_is_reproducible(workdir):
    outputs = []
    for out, threads in ("first", 1), ("second", 3):
        config = consistency_config(workdir, out)
        process = run("exp", "consistency", "--config", config, "--threads", threads)
        assert process.returncode == 0
        metrics_path = pathlib.Path(process.stdout.strip())
        assert metrics_path == workdir / out / "metrics.tsv"
        outputs.append(
            {
                name: metrics_path.parent.joinpath(name).read_bytes()
                for name in ("metrics.tsv", "summary.yaml", "mse.plot.tsv")
            }
        )
    assert outputs[0] == outputs[1]
    assert workdir.joinpath("first", "timings.tsv").exists()


def test_experiment_rejects_schedule(workdir):
    config = consistency_config(
        workdir,
        "rejected",
        schedule={"rule": "regime1", "n_grid": [1000, 10000, 100000]},
    )
    process = run("exp", "consistency", "--config", config)
    assert process.returncode == 2
    assert "schedule condition" in process.stderr
    assert not workdir.joinpath("rejected", "metrics.tsv").exists()


def test_experiment_requires_fields(workdir):
    config = consistency_config(workdir, "sparse")
    process = run("exp", "sparsity", "--config", config)
    assert process.returncode == 2
    assert "lacks required field" in process.stderr
