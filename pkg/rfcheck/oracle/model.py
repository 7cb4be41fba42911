"""
Sparse additive regression models with uniform covariates.

    Y = m_1(X^(1)) + ... + m_S(X^(S)) + noise,   X uniform on [0, 1]^p

The leading S coordinates are informative; the remaining p - S components
are identically zero. A model file (JSON, YAML or TOML) drives both data
generation and the theoretical oracles, for example:

```yaml
p: 6
informative: 2
noise_sigma: 0.1
noise: gaussian
components:
  - {name: linear, slope: 10}
  - {name: polynomial, coefficients: [0, 0, 10]}
```
"""

import dataclasses
import functools
import json
import logging
import os
from typing import Tuple

import numpy as np

from rfcheck.errors import ConfigurationError, DomainError
from rfcheck.oracle.components import (
    Component,
    ConstantComponent,
    catalog,
    component_from_dict,
)
from rfcheck.util import PathLike, file_digest, read_serialized_dict

noise_kinds = ("gaussian", "uniform")

model_schema = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "required": ["p", "noise_sigma", "components"],
    "properties": {
        "p": {"type": "integer", "minimum": 1},
        "informative": {"type": "integer", "minimum": 0},
        "noise_sigma": {"type": "number", "minimum": 0},
        "noise": {"enum": list(noise_kinds)},
        "components": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name"],
                "properties": {"name": {"enum": sorted(catalog)}},
            },
        },
    },
    "additionalProperties": False,
}


@dataclasses.dataclass(frozen=True)
class AdditiveModel:
    p: int
    components: Tuple[Component, ...]
    """Components of the S informative coordinates"""
    noise_sigma: float = 0.0
    noise: str = "gaussian"
    """Noise distribution: "gaussian", or "uniform" for bounded noise"""

    def __post_init__(self):
        object.__setattr__(self, "components", tuple(self.components))
        if self.p < 1:
            raise ConfigurationError(f"model dimension p must be at least 1: {self.p}")
        if len(self.components) > self.p:
            raise ConfigurationError(
                f"model lists {len(self.components)} components for p={self.p}"
            )
        if not self.noise_sigma >= 0:
            raise ConfigurationError(f"noise_sigma must be nonnegative: {self.noise_sigma}")
        if self.noise not in noise_kinds:
            raise ConfigurationError(
                f"noise must be one of {', '.join(noise_kinds)}: {self.noise!r}"
            )

    @property
    def informative(self) -> int:
        """S, the number of leading informative coordinates"""
        return len(self.components)

    def component(self, direction: int) -> Component:
        """The component of a 1-based direction; zero beyond S."""
        if not 1 <= direction <= self.p:
            raise DomainError(f"direction {direction} is outside 1..{self.p}")
        if direction > self.informative:
            return ConstantComponent(0.0)
        return self.components[direction - 1]

    @property
    def is_constant(self) -> bool:
        return all(component.is_constant for component in self.components)

    def regression(self, points) -> np.ndarray:
        """m(x) for each row of an m x p array."""
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(1, -1)
        if points.shape[1] != self.p:
            raise DomainError(f"points must have {self.p} coordinates")
        total = np.zeros(points.shape[0])
        for axis, component in enumerate(self.components):
            total += component(points[:, axis])
        return total

    def total_range(self) -> float:
        """Variation of m over the whole cube, the sum of component ranges."""
        return sum(component.range(0.0, 1.0) for component in self.components)

    def to_dict(self) -> dict:
        return {
            "p": self.p,
            "informative": self.informative,
            "noise_sigma": self.noise_sigma,
            "noise": self.noise,
            "components": [component.to_dict() for component in self.components],
        }

    @classmethod
    def from_dict(cls, settings: dict) -> "AdditiveModel":
        import jsonschema

        try:
            jsonschema.validate(settings, model_schema)
        except jsonschema.ValidationError as error:
            field = ".".join(str(x) for x in error.absolute_path) or "model"
            raise ConfigurationError(f"invalid model field {field!r}: {error.message}") from None
        components = [component_from_dict(x) for x in settings["components"]]
        informative = settings.get("informative", len(components))
        if informative != len(components):
            raise ConfigurationError(
                f"model declares informative={informative} but lists "
                f"{len(components)} components"
            )
        return cls(
            p=settings["p"],
            components=components,
            noise_sigma=float(settings["noise_sigma"]),
            noise=settings.get("noise", "gaussian"),
        )

    def digest(self) -> str:
        from rfcheck.util import short_digest

        return short_digest(json.dumps(self.to_dict(), sort_keys=True).encode())


@dataclasses.dataclass(frozen=True)
class LoadedModel:
    model: AdditiveModel
    path: str
    file_digest: str


@functools.lru_cache(maxsize=32)
def _load_model(path: str, mtime_ns: int) -> LoadedModel:
    model = AdditiveModel.from_dict(read_serialized_dict(path))
    logging.info(
        f"read model from {path}: p={model.p}, S={model.informative}, "
        f"noise_sigma={model.noise_sigma}"
    )
    return LoadedModel(model, path, file_digest(path))


def load_model(path: PathLike) -> LoadedModel:
    path = os.fspath(path)
    if not os.path.isfile(path):
        raise ConfigurationError(f"model file not found: {path}")
    return _load_model(path, os.stat(path).st_mtime_ns)
