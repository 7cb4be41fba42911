"""
Datasets of n rows with p features in [0, 1] and one real response.

File format (comma delimited, UTF-8):

    n,p,sigma,seed
    1000,2,0.1,42
    x1,...,xp,y
    ...

The first line names the header fields and the second holds their values;
`sigma` and `seed` may be empty for data that was not sampled by rfcheck.
Every following line is one row. Numbers are written with 17 significant
digits, so loading a saved dataset reproduces it exactly.
"""

import csv
import dataclasses
import io
import logging
import math
import pathlib
from typing import Optional

import numpy as np

from rfcheck.errors import ParseError, ValidationError
from rfcheck.util import PathLike, atomic_writer, short_digest

header_fields = ["n", "p", "sigma", "seed"]


def format_number(value) -> str:
    return format(float(value), ".17g")


@dataclasses.dataclass(frozen=True)
class Provenance:
    sigma: Optional[float] = None
    seed: Optional[int] = None
    model_digest: Optional[str] = dataclasses.field(default=None, compare=False)
    """Not stored in dataset files"""


@dataclasses.dataclass(frozen=True, eq=False)
class Dataset:
    features: np.ndarray
    responses: np.ndarray
    provenance: Provenance = dataclasses.field(default_factory=Provenance)

    def __post_init__(self):
        features = np.array(self.features, dtype=float)
        responses = np.array(self.responses, dtype=float)
        if features.ndim != 2 or features.shape[0] < 1 or features.shape[1] < 1:
            raise ValidationError(
                f"features must be an n x p array with n, p >= 1, got shape {features.shape}"
            )
        if responses.shape != (features.shape[0],):
            raise ValidationError(
                f"expected {features.shape[0]} responses, got shape {responses.shape}"
            )
        outside = np.argwhere(~((features >= 0.0) & (features <= 1.0)))
        if outside.size:
            row, column = outside[0]
            raise ValidationError(
                f"feature in row {row + 1}, column {column + 1} is outside [0, 1]: "
                f"{features[row, column]!r}"
            )
        bad = np.flatnonzero(~np.isfinite(responses))
        if bad.size:
            raise ValidationError(f"response in row {bad[0] + 1} is not finite")
        features.flags.writeable = False
        responses.flags.writeable = False
        object.__setattr__(self, "features", features)
        object.__setattr__(self, "responses", responses)

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def p(self) -> int:
        return self.features.shape[1]

    def __eq__(self, other) -> bool:
        if not isinstance(other, Dataset):
            return NotImplemented
        return (
            np.array_equal(self.features, other.features)
            and np.array_equal(self.responses, other.responses)
            and self.provenance == other.provenance
        )

    def to_text(self) -> str:
        output = io.StringIO()
        writer = csv.writer(output, lineterminator="\n")
        writer.writerow(header_fields)
        sigma = self.provenance.sigma
        seed = self.provenance.seed
        writer.writerow(
            [
                self.n,
                self.p,
                "" if sigma is None else format_number(sigma),
                "" if seed is None else seed,
            ]
        )
        for x, y in zip(self.features, self.responses):
            writer.writerow([format_number(v) for v in x] + [format_number(y)])
        return output.getvalue()

    def digest(self) -> str:
        return short_digest(self.to_text().encode())


def save(dataset: Dataset, path: PathLike) -> None:
    with atomic_writer(path) as write_file:
        write_file.write(dataset.to_text())
    logging.info(f"wrote dataset with n={dataset.n}, p={dataset.p} to {path}")


def _parse_number(text: str, line: int, kind=float):
    try:
        value = kind(text)
    except ValueError:
        raise ParseError(f"cannot parse {text!r} as a number", line=line) from None
    if kind is float and not math.isfinite(value):
        raise ParseError(f"non-finite value {text!r}", line=line)
    return value


def parse(text: str, source: str = "<string>") -> Dataset:
    rows = list(csv.reader(io.StringIO(text)))
    if len(rows) < 2 or [x.strip() for x in rows[0]] != header_fields:
        raise ParseError(
            f"{source}: expected a header line {','.join(header_fields)!r}", line=1
        )
    values = rows[1]
    if len(values) != len(header_fields):
        raise ParseError(f"{source}: header values must have 4 fields", line=2)
    n = _parse_number(values[0], 2, int)
    p = _parse_number(values[1], 2, int)
    sigma = _parse_number(values[2], 2) if values[2].strip() else None
    seed = _parse_number(values[3], 2, int) if values[3].strip() else None
    if n < 1 or p < 1:
        raise ParseError(f"{source}: header requires n >= 1 and p >= 1", line=2)
    body = rows[2:]
    if len(body) != n:
        raise ParseError(
            f"{source}: header declares n={n} rows but the file has {len(body)}",
            line=2,
        )
    table = np.empty((n, p + 1))
    for i, row in enumerate(body):
        line = i + 3
        if len(row) != p + 1:
            raise ParseError(
                f"{source}: expected p + 1 = {p + 1} fields, found {len(row)}",
                line=line,
            )
        table[i] = [_parse_number(field, line) for field in row]
    provenance = Provenance(sigma=sigma, seed=seed)
    return Dataset(table[:, :p], table[:, p], provenance)


def load(path: PathLike) -> Dataset:
    path = pathlib.Path(path)
    dataset = parse(path.read_text(encoding="utf-8-sig"), source=str(path))
    logging.info(f"read dataset with n={dataset.n}, p={dataset.p} from {path}")
    return dataset


def parse_feature_rows(text: str, p: int, source: str = "<string>") -> np.ndarray:
    """
    Parse a header-less delimited file of query rows with p features each,
    or a full dataset file (whose responses are ignored).
    """
    first_line = text.lstrip().split("\n", 1)[0]
    if [x.strip() for x in first_line.split(",")] == header_fields:
        dataset = parse(text, source=source)
        if dataset.p != p:
            raise ValidationError(
                f"{source}: queries have p={dataset.p} but p={p} is required"
            )
        return dataset.features
    rows = [row for row in csv.reader(io.StringIO(text)) if row]
    points = np.empty((len(rows), p))
    for i, row in enumerate(rows):
        if len(row) != p:
            raise ValidationError(
                f"{source}: line {i + 1} has {len(row)} features but p={p} is required"
            )
        points[i] = [_parse_number(field, i + 1) for field in row]
    outside = np.argwhere(~((points >= 0.0) & (points <= 1.0)))
    if outside.size:
        row, column = outside[0]
        raise ValidationError(
            f"{source}: query in row {row + 1}, column {column + 1} is outside [0, 1]"
        )
    return points
