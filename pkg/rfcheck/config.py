"""
Run configuration: one structured-text file (JSON, YAML or TOML) per run.

The file is a mapping of the fields of one command. Global flags override
its scalar fields: `--seed`, `--threads` and `--out`. Relative paths in the
file are resolved against the file's directory; relative paths given as
flags against the working directory. Everything is validated before any
work starts and every failure raises ConfigurationError naming the field.
"""

import copy
import dataclasses
import logging
import os
import pathlib
from typing import Any, Dict, Optional

from rfcheck.errors import ConfigurationError
from rfcheck.streams import SEED_MAX
from rfcheck.util import read_serialized_dict

_positive = {"type": "integer", "minimum": 1}

_common_properties = {
    "seed": {"type": "integer", "minimum": 0, "maximum": SEED_MAX},
    "threads": _positive,
    "out": {"type": "string"},
}

_schedule_schema = {
    "type": "object",
    "properties": {
        "rule": {"enum": ["regime1", "regime2", "explicit"]},
        "n_grid": {
            "type": "array",
            "items": {"type": "integer", "minimum": 2},
            "minItems": 1,
        },
        "overrides": {
            "type": "object",
            "additionalProperties": {
                "type": "object",
                "properties": {"subsample_size": _positive, "leaves": _positive},
                "additionalProperties": False,
            },
        },
        "log_power": {"type": "number", "exclusiveMinimum": 0},
    },
    "required": ["n_grid"],
    "additionalProperties": False,
}

schemas: Dict[str, dict] = {
    "gen": {
        "type": "object",
        "properties": {
            **_common_properties,
            "model": {"type": "string"},
            "n": _positive,
            "name": {"type": "string", "pattern": "^[A-Za-z0-9_.-]+$"},
        },
        "required": ["model", "n", "seed"],
        "additionalProperties": False,
    },
    "fit": {
        "type": "object",
        "properties": {
            **_common_properties,
            "dataset": {"type": "string"},
            "forest": {
                "type": "object",
                "properties": {
                    "trees": _positive,
                    "mtry": _positive,
                    "subsample_size": _positive,
                    "leaves": _positive,
                },
                "required": ["trees"],
                "additionalProperties": False,
            },
        },
        "required": ["dataset", "forest", "seed"],
        "additionalProperties": False,
    },
    "predict": {
        "type": "object",
        "properties": {
            **_common_properties,
            "forest": {"type": "string"},
            "queries": {"type": "string"},
        },
        "required": ["forest", "queries"],
        "additionalProperties": False,
    },
    "experiment": {
        "type": "object",
        "properties": {
            **_common_properties,
            "model": {"type": "string"},
            "schedule": _schedule_schema,
            "n_grid": {"type": "array", "items": _positive, "minItems": 1},
            "trees": _positive,
            "replicates": _positive,
            "n_test": _positive,
            "n_query": _positive,
            "k": _positive,
            "xi_grid": {
                "type": "array",
                "items": {"type": "number", "exclusiveMinimum": 0},
                "minItems": 1,
            },
            "mtry": _positive,
            "leaves": _positive,
        },
        "required": ["model", "trees", "replicates", "seed"],
        "additionalProperties": False,
    },
}

"""Fields holding paths to files that must exist"""
input_path_fields = {
    "gen": ["model"],
    "fit": ["dataset"],
    "predict": ["forest", "queries"],
    "experiment": ["model"],
}

"""Fields each experiment requires beyond the common ones"""
experiment_fields = {
    "consistency": ["schedule", "n_test"],
    "sparsity": ["n_grid", "k", "n_query"],
    "cutdist": ["n_grid", "k", "n_query"],
    "cellvar": ["schedule", "n_query", "xi_grid"],
    "connection": ["schedule", "n_query"],
}


@dataclasses.dataclass
class RunConfig:
    command: str
    """gen, fit, predict or the experiment name"""
    seed: Optional[int]
    threads: int
    out: pathlib.Path
    settings: Dict[str, Any]
    """Validated fields of the config file, with flag overrides applied"""
    path: Optional[pathlib.Path] = None
    model: Optional[pathlib.Path] = None

    def input_path(self, field: str) -> pathlib.Path:
        return pathlib.Path(self.settings[field])

    def snapshot(self) -> Dict[str, Any]:
        """Settings that determine the results: everything but threads and out."""
        return {
            key: value
            for key, value in self.settings.items()
            if key not in {"threads", "out"}
        }


def _validate(settings: dict, schema: dict) -> None:
    import jsonschema

    try:
        jsonschema.validate(settings, schema)
    except jsonschema.ValidationError as error:
        field = ".".join(str(x) for x in error.absolute_path) or "config"
        raise ConfigurationError(f"invalid config field {field!r}: {error.message}") from None


def _read_config_file(path: pathlib.Path) -> dict:
    import yaml

    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    try:
        return read_serialized_dict(path)
    except TypeError as error:
        raise ConfigurationError(str(error)) from None
    except (ValueError, yaml.YAMLError) as error:
        raise ConfigurationError(f"cannot parse config file {path}: {error}") from None


def _resolve(path: str, base: pathlib.Path) -> str:
    path = pathlib.Path(path)
    if not path.is_absolute():
        path = base / path
    return os.fspath(path)


def _prepare_output(out: pathlib.Path) -> None:
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as error:
        raise ConfigurationError(f"cannot create output directory {out}: {error}") from None
    if not os.access(out, os.W_OK):
        raise ConfigurationError(f"output directory is not writable: {out}")


def load_run_config(command: str, args, experiment: str = None) -> RunConfig:
    """
    Read args.config, apply the --seed, --threads and --out overrides from
    `args` and validate the result for `command` ("gen", "fit", "predict" or
    "experiment"; for experiments, `experiment` names the driver).
    """
    config_path = pathlib.Path(args.config)
    settings = copy.deepcopy(_read_config_file(config_path))
    base = config_path.parent
    for field in input_path_fields[command]:
        if isinstance(settings.get(field), str):
            settings[field] = _resolve(settings[field], base)
    if isinstance(settings.get("out"), str):
        settings["out"] = _resolve(settings["out"], base)
    if getattr(args, "seed", None) is not None:
        settings["seed"] = args.seed
    if getattr(args, "threads", None) is not None:
        settings["threads"] = args.threads
    if getattr(args, "out", None) is not None:
        settings["out"] = os.fspath(pathlib.Path(args.out).absolute())
    _validate(settings, schemas[command])
    if experiment is not None:
        missing = [f for f in experiment_fields[experiment] if f not in settings]
        if missing:
            raise ConfigurationError(
                f"{experiment} config lacks required field(s): {', '.join(missing)}"
            )
    for field in input_path_fields[command]:
        if not pathlib.Path(settings[field]).is_file():
            raise ConfigurationError(f"{field} file not found: {settings[field]}")
    out = pathlib.Path(settings.get("out", os.fspath(base / "output")))
    _prepare_output(out)
    config = RunConfig(
        command=experiment or command,
        seed=settings.get("seed"),
        threads=settings.get("threads", 1),
        out=out,
        settings=settings,
        path=config_path,
        model=pathlib.Path(settings["model"]) if "model" in settings else None,
    )
    logging.info(f"read {config.command} config from {config_path}")
    return config
