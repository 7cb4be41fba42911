import logging
import pathlib

from rfcheck.config import load_run_config


def cli_fit(args):
    """
    Fit a forest on the config's dataset and write it to `{out}/forest.json`.
    Prints the file path and its content digest.
    """
    from rfcheck.datagen.dataset import load
    from rfcheck.forest.forest import ForestParams, default_mtry, fit
    from rfcheck.forest.serialize import save
    from rfcheck.util import file_digest

    config = load_run_config("fit", args)
    dataset = load(config.input_path("dataset"))
    settings = config.settings["forest"]
    subsample_size = settings.get("subsample_size", dataset.n)
    params = ForestParams(
        trees=settings["trees"],
        mtry=settings.get("mtry", default_mtry(dataset.p)),
        subsample_size=subsample_size,
        leaves=settings.get("leaves", subsample_size),
        seed=config.seed,
    )
    params.check_dataset(dataset.n, dataset.p)
    forest = fit(dataset, params, threads=config.threads)
    path = config.out / "forest.json"
    save(forest, path)
    print(f"{path}\t{file_digest(path)}")


def cli_predict(args):
    """
    Predict at every row of the config's query file with a saved forest.
    Writes one prediction per line to `{out}/predictions.csv` and the Monte
    Carlo standard error of each prediction to `{out}/prediction_stderr.csv`.
    """
    from rfcheck.datagen.dataset import format_number, parse_feature_rows
    from rfcheck.forest.serialize import load
    from rfcheck.util import atomic_writer

    config = load_run_config("predict", args)
    forest = load(config.input_path("forest"))
    queries_path = config.input_path("queries")
    text = pathlib.Path(queries_path).read_text(encoding="utf-8-sig")
    points = parse_feature_rows(text, forest.p, source=str(queries_path))
    if len(points):
        predictions = forest.predict_many(points)
        errors = forest.prediction_standard_error(points)
    else:
        predictions = errors = []
    path = config.out / "predictions.csv"
    for name, values in (("predictions.csv", predictions), ("prediction_stderr.csv", errors)):
        with atomic_writer(config.out / name) as write_file:
            for value in values:
                write_file.write(format_number(value) + "\n")
    logging.info(f"wrote {len(predictions)} predictions to {path}")
    print(path)
