"""
Schedules mapping each sample size n of an experiment grid to the forest's
subsample size a_n and number of leaves t_n.

Rules:

- `regime1`: a_n = n and t_n = ceil(a_n / (log a_n)^log_power), with
  log_power = 10 by default. Valid when t_n (log a_n)^9 / a_n decreases
  along the grid.
- `regime2`: fully grown trees, t_n = a_n = ceil(n / (log n)^2). Valid when
  a_n log n / n decreases along the grid.
- `explicit`: every grid point lists its own `subsample_size` and `leaves`.

Per-n overrides may replace a_n or t_n under any rule, and the validators
run on the resulting values.
"""

import dataclasses
import enum
import math
from typing import Dict, List, Mapping, Tuple

from rfcheck.errors import ConfigurationError


class Rule(str, enum.Enum):
    REGIME1 = "regime1"
    REGIME2 = "regime2"
    EXPLICIT = "explicit"


@dataclasses.dataclass(frozen=True)
class GridPoint:
    n: int
    subsample_size: int
    """a_n"""
    leaves: int
    """t_n"""


override_fields = ("subsample_size", "leaves")


@dataclasses.dataclass(frozen=True)
class RegimeSchedule:
    n_grid: Tuple[int, ...]
    rule: Rule = Rule.REGIME2
    overrides: Mapping[int, Mapping[str, int]] = dataclasses.field(default_factory=dict)
    log_power: float = 10.0

    def __post_init__(self):
        object.__setattr__(self, "n_grid", tuple(self.n_grid))
        try:
            object.__setattr__(self, "rule", Rule(self.rule))
        except ValueError:
            choices = ", ".join(rule.value for rule in Rule)
            raise ConfigurationError(
                f"schedule rule must be one of {choices}: {self.rule!r}"
            ) from None
        overrides = {int(n): dict(fields) for n, fields in dict(self.overrides).items()}
        object.__setattr__(self, "overrides", overrides)

    def point(self, n: int) -> GridPoint:
        fields = self.overrides.get(n, {})
        if self.rule is Rule.EXPLICIT:
            missing = [name for name in override_fields if name not in fields]
            if missing:
                raise ConfigurationError(
                    f"explicit schedule lacks {', '.join(missing)} for n={n}"
                )
            return GridPoint(
                n=n,
                subsample_size=int(fields["subsample_size"]),
                leaves=int(fields["leaves"]),
            )
        if self.rule is Rule.REGIME1:
            subsample_size = fields.get("subsample_size", n)
            if subsample_size < 2:
                raise ConfigurationError(
                    f"regime1 requires a_n >= 2, but n={n} has a_n={subsample_size}"
                )
            leaves = math.ceil(subsample_size / math.log(subsample_size) ** self.log_power)
        else:
            default = min(n, math.ceil(n / math.log(n) ** 2))
            subsample_size = fields.get("subsample_size", default)
            leaves = subsample_size
        leaves = fields.get("leaves", leaves)
        return GridPoint(n=n, subsample_size=int(subsample_size), leaves=int(leaves))

    def points(self) -> List[GridPoint]:
        return [self.point(n) for n in self.n_grid]

    def validate(self) -> List[GridPoint]:
        """
        Check the grid and the rule's condition along it, raising
        ConfigurationError naming the violated condition. Return the grid
        points on success.
        """
        grid = self.n_grid
        if not grid:
            raise ConfigurationError("schedule n_grid must not be empty")
        if any(isinstance(n, bool) or int(n) != n for n in grid):
            raise ConfigurationError(f"schedule n_grid must hold integers: {list(grid)}")
        if grid[0] < 2:
            raise ConfigurationError(f"schedule n_grid values must be at least 2: {grid[0]}")
        for previous, current in zip(grid, grid[1:]):
            if current <= previous:
                raise ConfigurationError(
                    f"schedule n_grid must be strictly increasing: {previous} then {current}"
                )
        unknown = set(self.overrides) - set(grid)
        if unknown:
            raise ConfigurationError(
                f"schedule overrides name sizes outside n_grid: {sorted(unknown)}"
            )
        for n, fields in self.overrides.items():
            extra = set(fields) - set(override_fields)
            if extra:
                raise ConfigurationError(
                    f"schedule override for n={n} has unknown fields: {sorted(extra)}"
                )
        points = self.points()
        for point in points:
            if not 1 <= point.leaves <= point.subsample_size <= point.n:
                raise ConfigurationError(
                    f"schedule requires 1 <= t_n <= a_n <= n, but n={point.n} has "
                    f"a_n={point.subsample_size} and t_n={point.leaves}"
                )
        if self.rule is Rule.REGIME1:
            _check_decreasing(
                points,
                regime1_condition,
                "t_n (log a_n)^9 / a_n",
            )
        elif self.rule is Rule.REGIME2:
            _check_decreasing(points, regime2_condition, "a_n log n / n")
        return points

    def to_dict(self) -> dict:
        record = {"rule": self.rule.value, "n_grid": list(self.n_grid)}
        if self.overrides:
            record["overrides"] = {str(n): dict(fields) for n, fields in self.overrides.items()}
        if self.rule is Rule.REGIME1:
            record["log_power"] = self.log_power
        return record

    @classmethod
    def from_dict(cls, settings: Mapping) -> "RegimeSchedule":
        overrides: Dict[int, Mapping[str, int]] = {}
        for key, fields in dict(settings.get("overrides", {})).items():
            try:
                overrides[int(key)] = fields
            except ValueError:
                raise ConfigurationError(
                    f"schedule override keys must be sample sizes: {key!r}"
                ) from None
        return cls(
            n_grid=settings["n_grid"],
            rule=settings.get("rule", Rule.REGIME2.value),
            overrides=overrides,
            log_power=settings.get("log_power", 10.0),
        )


def regime1_condition(point: GridPoint) -> float:
    a_n = point.subsample_size
    return point.leaves * math.log(a_n) ** 9 / a_n


def regime2_condition(point: GridPoint) -> float:
    return point.subsample_size * math.log(point.n) / point.n


def _check_decreasing(points: List[GridPoint], condition, label: str) -> None:
    for previous, current in zip(points, points[1:]):
        before, after = condition(previous), condition(current)
        if not after < before:
            raise ConfigurationError(
                f"schedule condition {label} -> 0 is violated on the grid: "
                f"it is {before:.6g} at n={previous.n} and {after:.6g} at n={current.n}"
            )


def fixed_grid(n_grid, leaves: int = None, subsample_size: int = None) -> List[GridPoint]:
    """
    Grid points with a_n = subsample_size (default n) and t_n = leaves
    (default a_n) at every n, as used by the drivers that take a plain grid.
    """
    points = []
    for n in n_grid:
        a_n = n if subsample_size is None else min(subsample_size, n)
        t_n = a_n if leaves is None else min(leaves, a_n)
        point = GridPoint(n=int(n), subsample_size=int(a_n), leaves=int(t_n))
        if not 1 <= point.leaves <= point.subsample_size <= point.n:
            raise ConfigurationError(
                f"grid point n={n} requires 1 <= t_n <= a_n <= n, "
                f"got a_n={point.subsample_size} and t_n={point.leaves}"
            )
        points.append(point)
    return points
