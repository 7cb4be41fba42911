import logging
import time

from rfcheck.config import RunConfig, load_run_config


def _summary_params(config: RunConfig, file_digest: str) -> dict:
    params = config.snapshot()
    params.pop("model", None)
    params["model_digest"] = file_digest
    return params


def _run(args, experiment: str, driver) -> None:
    from rfcheck.experiments.metrics import MetricsSink
    from rfcheck.oracle.model import load_model

    config = load_run_config("experiment", args, experiment=experiment)
    loaded = load_model(config.model)
    start = time.perf_counter()
    records = driver(config, loaded.model)
    logging.info(
        f"{experiment} finished with {len(records)} records "
        f"in {time.perf_counter() - start:.1f}s"
    )
    sink = MetricsSink(experiment, params=_summary_params(config, loaded.file_digest))
    sink.extend(records)
    path = sink.write(config.out)
    print(path)


def _schedule(config: RunConfig):
    from rfcheck.experiments.schedule import RegimeSchedule

    return RegimeSchedule.from_dict(config.settings["schedule"])


def cli_consistency(args):
    from rfcheck.experiments.consistency import run_consistency

    def driver(config, model):
        settings = config.settings
        return run_consistency(
            model,
            _schedule(config),
            trees=settings["trees"],
            replicates=settings["replicates"],
            n_test=settings["n_test"],
            seed=config.seed,
            mtry=settings.get("mtry"),
            threads=config.threads,
        )

    _run(args, "consistency", driver)


def cli_sparsity(args):
    from rfcheck.experiments.sparsity import run_sparsity

    def driver(config, model):
        settings = config.settings
        return run_sparsity(
            model,
            settings["n_grid"],
            k=settings["k"],
            trees=settings["trees"],
            replicates=settings["replicates"],
            n_query=settings["n_query"],
            seed=config.seed,
            leaves=settings.get("leaves"),
            threads=config.threads,
        )

    _run(args, "sparsity", driver)


def cli_cutdist(args):
    from rfcheck.experiments.cut_distance import run_cut_distance

    def driver(config, model):
        settings = config.settings
        return run_cut_distance(
            model,
            settings["n_grid"],
            k=settings["k"],
            trees=settings["trees"],
            replicates=settings["replicates"],
            n_query=settings["n_query"],
            seed=config.seed,
            leaves=settings.get("leaves"),
            threads=config.threads,
        )

    _run(args, "cutdist", driver)


def cli_cellvar(args):
    from rfcheck.experiments.cell_variation import run_cell_variation

    def driver(config, model):
        settings = config.settings
        return run_cell_variation(
            model,
            _schedule(config),
            trees=settings["trees"],
            replicates=settings["replicates"],
            n_query=settings["n_query"],
            xi_grid=settings["xi_grid"],
            seed=config.seed,
            mtry=settings.get("mtry"),
            threads=config.threads,
        )

    _run(args, "cellvar", driver)


def cli_connection(args):
    from rfcheck.experiments.connection import run_connection

    def driver(config, model):
        settings = config.settings
        return run_connection(
            model,
            _schedule(config),
            trees=settings["trees"],
            replicates=settings["replicates"],
            n_query=settings["n_query"],
            seed=config.seed,
            mtry=settings.get("mtry"),
            threads=config.threads,
        )

    _run(args, "connection", driver)
