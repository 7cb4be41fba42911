import logging

from rfcheck.config import load_run_config


def cli_gen(args):
    """
    Sample a dataset from the config's model and write it to
    `{out}/{name}.csv`. Prints the file path and its content digest.
    """
    from rfcheck.datagen.dataset import save
    from rfcheck.datagen.sample import sample
    from rfcheck.oracle.model import load_model

    config = load_run_config("gen", args)
    loaded = load_model(config.model)
    dataset = sample(
        loaded.model,
        n=config.settings["n"],
        seed=config.seed,
        model_digest=loaded.file_digest,
    )
    path = config.out / f"{config.settings.get('name', 'dataset')}.csv"
    save(dataset, path)
    digest = dataset.digest()
    logging.info(f"dataset digest {digest} (model file digest {loaded.file_digest})")
    print(f"{path}\t{digest}")
