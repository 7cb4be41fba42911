"""
Sup-norm distance between sequences of cuts.

Two cuts (j, z) and (j', z') are compared through
max(|j - j'|, |z - z'|), direction indices and positions entering the same
norm; two sequences of k cuts through the largest of their k cut
distances.
"""

import dataclasses
import math
from typing import Iterable, Sequence, Tuple

import numpy as np

from rfcheck.errors import DomainError
from rfcheck.forest.splitter import Cut


@dataclasses.dataclass(frozen=True)
class CutSequence:
    cuts: Tuple[Cut, ...]

    def __post_init__(self):
        object.__setattr__(self, "cuts", tuple(self.cuts))

    def __len__(self) -> int:
        return len(self.cuts)

    def __iter__(self):
        return iter(self.cuts)

    def check_admissible(self, x, p: int) -> None:
        """
        Check that each cut lies strictly inside the cell of x produced by the
        cuts preceding it, starting from [0, 1]^p.
        """
        x = np.asarray(x, dtype=float)
        lower, upper = np.zeros(p), np.ones(p)
        for q, cut in enumerate(self.cuts, start=1):
            if not 1 <= cut.direction <= p:
                raise DomainError(f"cut {q} has direction outside 1..{p}")
            axis = cut.axis
            if not lower[axis] < cut.position < upper[axis]:
                raise DomainError(f"cut {q} at {cut.position} is outside its cell")
            if x[axis] < cut.position:
                upper[axis] = cut.position
            else:
                lower[axis] = cut.position


def cut_gap(first: Cut, second: Cut) -> float:
    return max(abs(first.direction - second.direction), abs(first.position - second.position))


def sequence_gap(first: Sequence[Cut], second: Sequence[Cut]) -> float:
    if len(first) != len(second):
        raise DomainError(
            f"cut sequences must have equal length, got {len(first)} and {len(second)}"
        )
    return max((cut_gap(a, b) for a, b in zip(first, second)), default=0.0)


def cut_distance(
    empirical: Sequence[Cut], theoretical_set: Iterable[Sequence[Cut]]
) -> float:
    """
    Distance between an empirical cut sequence and a set of theoretical cut
    sequences: the smallest sup-norm gap to any member of the set.
    """
    theoretical_set = list(theoretical_set)
    if not theoretical_set:
        raise DomainError("the theoretical set must contain at least one sequence")
    distance = math.inf
    for theoretical in theoretical_set:
        distance = min(distance, sequence_gap(empirical, theoretical))
    return distance


def cut_distances(directions, positions, theoretical_set: Iterable[Sequence[Cut]]) -> np.ndarray:
    """
    cut_distance for many empirical sequences at once. `directions` and
    `positions` are m x k arrays, one empirical sequence per row; rows with a
    missing cut (infinite direction) get an infinite distance.
    """
    directions = np.asarray(directions, dtype=float)
    positions = np.asarray(positions, dtype=float)
    theoretical_set = list(theoretical_set)
    if not theoretical_set:
        raise DomainError("the theoretical set must contain at least one sequence")
    k = directions.shape[1]
    distances = np.full(directions.shape[0], np.inf)
    for theoretical in theoretical_set:
        if len(theoretical) != k:
            raise DomainError(
                f"cut sequences must have equal length, got {k} and {len(theoretical)}"
            )
        target_directions = np.array([cut.direction for cut in theoretical], dtype=float)
        target_positions = np.array([cut.position for cut in theoretical])
        with np.errstate(invalid="ignore"):
            gaps = np.maximum(
                np.abs(directions - target_directions),
                np.abs(positions - target_positions),
            )
        gaps = np.where(np.isfinite(directions), gaps, np.inf)
        distances = np.minimum(distances, gaps.max(axis=1))
    return distances
