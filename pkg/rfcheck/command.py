"""
rfcheck's command line interface
"""

import argparse
import logging
import pathlib
import sys
import warnings

import rfcheck
from rfcheck.util import import_function

"""Exit status for invalid configuration or input"""
EXIT_VALIDATION = 2
"""Exit status for runtime invariant violations logged during a run"""
EXIT_ASSERTION = 3

experiments = {
    "consistency": "L2 error of the forest against the true regression function",
    "sparsity": "share of early cuts along informative directions",
    "cutdist": "distance between empirical and theoretical cut sequences",
    "cellvar": "variation of the regression function within leaf cells",
    "connection": "largest connection weight of fully grown forests",
}


def parse_arguments(argv=None):
    """
    Read and process command line arguments.
    """
    parser = argparse.ArgumentParser(
        description="rfcheck: random forest consistency checks on synthetic additive models"
    )
    parser.add_argument(
        "--version", action="version", version=f"v{rfcheck.__version__}"
    )
    subparsers = parser.add_subparsers(
        title="subcommands", description="All operations are done through subcommands:"
    )
    # Require specifying a sub-command
    subparsers.required = True  # https://bugs.python.org/issue26510
    subparsers.dest = "subcommand"  # https://bugs.python.org/msg186387
    leaves = [
        add_subparser_gen(subparsers),
        add_subparser_fit(subparsers),
        add_subparser_predict(subparsers),
        *add_subparser_exp(subparsers),
    ]
    for subparser in leaves:
        add_global_arguments(subparser)
    args = parser.parse_args(argv)
    return args


def add_global_arguments(parser):
    parser.add_argument(
        "--config",
        type=pathlib.Path,
        required=True,
        help="Path of the run config file. "
        "Serialization format is inferred from the file extension, with support for JSON, YAML, and TOML. "
        "If the format cannot be detected, the parser assumes JSON.",
    )
    parser.add_argument(
        "--seed",
        type=int,
        help="Master seed, an unsigned 64-bit integer. Overrides the config's seed.",
    )
    parser.add_argument(
        "--threads",
        type=int,
        help="Number of threads. Results do not depend on it. Overrides the config's threads.",
    )
    parser.add_argument(
        "--out",
        type=pathlib.Path,
        help="Output directory. Overrides the config's out.",
    )
    parser.add_argument(
        "--log-level",
        default="WARNING",
        choices=["DEBUG", "INFO", "WARNING", "ERROR", "CRITICAL"],
        help="Set the logging level for stderr logging",
    )


def add_subparser_gen(subparsers):
    parser = subparsers.add_parser(
        name="gen",
        help="sample a synthetic dataset",
        description="Sample a dataset of n rows from the additive model named in the config. "
        "Prints the dataset path and a content digest.",
    )
    parser.set_defaults(function="rfcheck.datagen.gen_command.cli_gen")
    return parser


def add_subparser_fit(subparsers):
    parser = subparsers.add_parser(
        name="fit",
        help="fit a random forest",
        description="Fit a random forest on the dataset named in the config and serialize it. "
        "Prints the forest path and a content digest.",
    )
    parser.set_defaults(function="rfcheck.forest.forest_command.cli_fit")
    return parser


def add_subparser_predict(subparsers):
    parser = subparsers.add_parser(
        name="predict",
        help="predict with a fitted forest",
        description="Load a serialized forest and a query file, "
        "and write one prediction per query row.",
    )
    parser.set_defaults(function="rfcheck.forest.forest_command.cli_predict")
    return parser


def add_subparser_exp(subparsers):
    parser = subparsers.add_parser(
        name="exp",
        help="run a consistency experiment",
        description="Run an experiment over a grid of sample sizes "
        "and write metrics.tsv, summary.yaml and plot data to the output directory.",
    )
    experiment_parsers = parser.add_subparsers(
        title="experiments", description="Available experiments:"
    )
    experiment_parsers.required = True
    experiment_parsers.dest = "experiment"
    leaves = []
    for name, help_text in experiments.items():
        leaf = experiment_parsers.add_parser(name=name, help=help_text, description=help_text)
        leaf.set_defaults(function=f"rfcheck.experiments.experiment_command.cli_{name}")
        leaves.append(leaf)
    return leaves


def setup_logging_and_errors() -> dict:
    """
    Configure warnings and logging.
    Set up an ErrorHandler to detect whether messages have been logged
    at or above the ERROR level.
    """
    import errorhandler

    # Track if message gets logged with severity of error or greater
    # See https://stackoverflow.com/a/45446664/4651668
    error_handler = errorhandler.ErrorHandler()

    # Log DeprecationWarnings
    warnings.simplefilter("always", DeprecationWarning)
    logging.captureWarnings(True)

    # Log to stderr
    logger = logging.getLogger()
    stream_handler = logging.StreamHandler(stream=sys.stderr)
    stream_handler.setFormatter(
        logging.Formatter("## {levelname}\n{message}", style="{")
    )
    logger.addHandler(stream_handler)
    return {
        "logger": logger,
        "error_handler": error_handler,
    }


def exit_if_error_handler_fired(error_handler):
    """
    If a message has been logged with severity of ERROR or greater,
    exit Python with status 3.
    """
    if error_handler.fired:
        logging.critical(
            f"Failure: exiting with code {EXIT_ASSERTION} due to logged errors"
        )
        raise SystemExit(EXIT_ASSERTION)


def main(argv=None):
    """
    Called as a console_scripts entry point in setup.cfg. This function defines
    the rfcheck command line script.
    """
    diagnostics = setup_logging_and_errors()
    args = parse_arguments(argv)
    diagnostics["logger"].setLevel(getattr(logging, args.log_level))
    function = import_function(args.function)
    try:
        function(args)
    except ValueError as error:
        # rfcheck.errors types, plus ValueErrors raised on malformed inputs
        logging.critical(f"{error.__class__.__name__}: {error}")
        raise SystemExit(EXIT_VALIDATION)
    exit_if_error_handler_fired(diagnostics["error_handler"])
