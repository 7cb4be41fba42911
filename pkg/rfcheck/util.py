import contextlib
import hashlib
import importlib
import json
import logging
import os
import pathlib
import shutil
import subprocess
import sys
import tempfile
from types import ModuleType
from typing import Iterator, Union

PathLike = Union[str, os.PathLike]


def import_function(name: str):
    """
    Import a function in a module specified by name. For example, if name were
    'rfcheck.forest.forest_command.cli_fit', the cli_fit function would be
    returned as an object. See https://stackoverflow.com/a/8790232/4651668.
    """
    module_name, function_name = name.rsplit(".", 1)
    module = importlib.import_module(module_name)
    return getattr(module, function_name)


def import_tomllib() -> ModuleType:
    try:
        import tomllib
    except ModuleNotFoundError:
        import tomli as tomllib
    return tomllib


def read_serialized_data(path: PathLike):
    """
    Read serialized data from a local file path.
    If file format extension is not detected in path, assumes JSON.
    """
    path_obj = pathlib.Path(path)
    supported_suffixes = {".json", ".yaml", ".yml", ".toml"}
    suffixes = set(path_obj.suffixes)
    text = path_obj.read_text(encoding="utf-8-sig")
    if {".yaml", ".yml"} & suffixes:
        import yaml

        try:
            return yaml.safe_load(text)
        except yaml.parser.ParserError as error:
            _lint_yaml(path)
            raise error
    if ".toml" in suffixes:
        return import_tomllib().loads(text)
    if ".json" not in suffixes:
        logging.info(
            f"read_serialized_data cannot infer serialization format from the extension of {os.fspath(path)!r}. "
            f"Supported extensions are {', '.join(sorted(supported_suffixes))}. "
            "Assuming JSON."
        )
    return json.loads(text)


"""
yamllint configuration as per https://yamllint.readthedocs.io/en/stable/configuration.html
"""
_yamllint_config = {
    "extends": "relaxed",
    "rules": {"line-length": "disable", "trailing-spaces": {"level": "warning"}},
}


def _lint_yaml(path):
    if not shutil.which("yamllint"):
        logging.info(f"yamllint executable not found, skipping linting for {path}")
        return
    args = [
        "yamllint",
        "--config-data",
        json.dumps(_yamllint_config, indent=None),
        os.fspath(path),
    ]
    sys.stderr.write(f"yamllint {path}:\n")
    subprocess.run(args, stdout=sys.stderr)


def read_serialized_dict(path: PathLike) -> dict:
    """
    Read serialized data, confirming that the top-level object is a dictionary.
    Delegates to `read_serialized_data`.
    """
    data = read_serialized_data(path)
    if isinstance(data, dict):
        return data
    raise TypeError(
        f"Expected data encoded by {os.fspath(path)!r} to be a dictionary at the top-level. "
        f"Received {data.__class__.__name__!r} instead."
    )


def short_digest(data: bytes) -> str:
    """
    Return a short content digest: a 12 byte blake2b hash encoded as base62,
    so its characters are within the ranges 0-9, a-z and A-Z.
    """
    import base62

    digest = hashlib.blake2b(data, digest_size=12).digest()
    return base62.encodebytes(digest)


def file_digest(path: PathLike) -> str:
    return short_digest(pathlib.Path(path).read_bytes())


@contextlib.contextmanager
def atomic_writer(path: PathLike, mode: str = "w") -> Iterator:
    """
    Open a temporary file next to `path` for writing, and rename it onto
    `path` when the block exits without error. Readers never observe a
    partially written file.
    """
    path = pathlib.Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fd, tmp_name = tempfile.mkstemp(prefix=f".{path.name}.", dir=path.parent)
    kwargs = {} if "b" in mode else {"encoding": "utf-8", "newline": ""}
    try:
        with os.fdopen(fd, mode, **kwargs) as write_file:
            yield write_file
        # mkstemp creates the file readable by its owner only
        umask = os.umask(0)
        os.umask(umask)
        os.chmod(tmp_name, 0o666 & ~umask)
        os.replace(tmp_name, path)
    except BaseException:
        with contextlib.suppress(FileNotFoundError):
            os.unlink(tmp_name)
        raise


def get_configured_yaml() -> ModuleType:
    """
    Return imported YAML library with rfcheck configuration:
    numpy scalars are represented as plain YAML numbers.
    """
    import numpy
    import yaml

    yaml.add_multi_representer(
        numpy.floating,
        lambda dumper, data: dumper.represent_float(float(data)),
    )
    yaml.add_multi_representer(
        numpy.integer,
        lambda dumper, data: dumper.represent_int(int(data)),
    )
    return yaml
