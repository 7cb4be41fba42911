"""
The empirical CART-split criterion and the best-cut search.

For a cell holding N points with responses Y, a cut (j, z) sends points with
x[j] < z to the left child and points with x[j] >= z to the right child. Its
criterion value is the drop in within-cell sum of squares, divided by N:

    L(j, z) = (1/N) sum (Y - mean_A)^2 - (1/N) sum (Y - mean_child)^2

with the convention 0/0 = 0 for the mean of an empty child. Both terms are
evaluated in the equivalent between-children form

    L(j, z) = (S_L^2 / N_L + S_R^2 / N_R) / N

where S_L and S_R are the sums of responses centered on the cell mean. That
form is nonnegative by construction and free of the cancellation in the
naive expansion.

Directions are 1-based throughout the public interface, so a cut on the first
coordinate has direction 1.
"""

import dataclasses
import math
from typing import FrozenSet, Iterable, Optional

import numpy as np

from rfcheck.errors import ConfigurationError, DomainError

"""Relative width of the band of criterion values treated as ties"""
relative_tie_tolerance = 1e-12


@dataclasses.dataclass(frozen=True)
class Cut:
    direction: int
    """Coordinate index in 1..p"""
    position: float
    """Threshold: the left child holds points strictly below it"""

    def __post_init__(self):
        if isinstance(self.direction, bool) or int(self.direction) != self.direction:
            raise DomainError(f"cut direction must be an integer: {self.direction!r}")
        if self.direction < 1:
            raise DomainError(f"cut direction must be at least 1: {self.direction}")
        if not math.isfinite(self.position):
            raise DomainError(f"cut position must be finite: {self.position!r}")

    @property
    def axis(self) -> int:
        """0-based column index of the cut direction"""
        return self.direction - 1


@dataclasses.dataclass(frozen=True)
class SplitEvaluation:
    cut: Cut
    criterion_value: float
    left_count: int
    right_count: int


def _check_cell(features, responses):
    features = np.asarray(features, dtype=float)
    responses = np.asarray(responses, dtype=float)
    if responses.ndim != 1 or responses.size == 0:
        raise DomainError("a cell must contain at least one point")
    if features.ndim == 1:
        features = features.reshape(-1, 1)
    if features.shape[0] != responses.size:
        raise DomainError(
            f"cell has {features.shape[0]} feature rows but {responses.size} responses"
        )
    if not np.isfinite(responses).all():
        raise DomainError("cell responses must be finite")
    return features, responses


def _check_direction(direction: int, p: int) -> None:
    if not 1 <= direction <= p:
        raise DomainError(f"direction {direction} is outside 1..{p}")


def evaluate_cut(features, responses, cut: Cut) -> SplitEvaluation:
    """
    Evaluate the CART-split criterion of `cut` on the points of a cell.
    `features` is an N x p array and `responses` a length N array.
    """
    features, responses = _check_cell(features, responses)
    _check_direction(cut.direction, features.shape[1])
    n = responses.size
    left = features[:, cut.axis] < cut.position
    left_count = int(left.sum())
    right_count = n - left_count
    if left_count == 0 or right_count == 0:
        # one child is the cell itself
        return SplitEvaluation(cut, 0.0, left_count, right_count)
    centered = responses - responses.mean()
    left_sum = centered[left].sum()
    right_sum = centered[~left].sum()
    value = (left_sum**2 / left_count + right_sum**2 / right_count) / n
    return SplitEvaluation(cut, float(value), left_count, right_count)


def tie_tolerance(best_value: float, responses: np.ndarray) -> float:
    """
    Criterion values within this distance of the best value count as ties.
    It covers a relative rounding error on the best value plus the squared
    rounding floor of the centered response sums, so that cells with constant
    responses tie everywhere.
    """
    n = responses.size
    scale = float(np.abs(responses).max()) if n else 0.0
    floor = (n * np.finfo(float).eps * scale) ** 2
    return relative_tie_tolerance * abs(best_value) + floor


def best_cut(
    features, responses, candidate_directions: Iterable[int]
) -> Optional[SplitEvaluation]:
    """
    Return the cut maximizing the CART-split criterion over the candidate
    directions, or None when no candidate direction holds two distinct
    coordinate values.

    Candidate positions are the midpoints between consecutive distinct sorted
    coordinates; the criterion is constant between data coordinates, so the
    maximum over these midpoints is the maximum over all cuts. Values within
    `tie_tolerance` of the maximum are ties, and ties resolve to the smallest
    direction, then the smallest position.
    """
    features, responses = _check_cell(features, responses)
    directions = sorted(set(candidate_directions))
    if not directions:
        raise DomainError("candidate_directions must not be empty")
    for direction in directions:
        _check_direction(direction, features.shape[1])
    n = responses.size
    if n < 2:
        return None
    centered = responses - responses.mean()
    total = centered.sum()
    scans = []
    for direction in directions:
        column = features[:, direction - 1]
        order = np.argsort(column, kind="stable")
        ordered = column[order]
        # gap k lies between ordered[k] and ordered[k + 1]
        gaps = np.flatnonzero(ordered[1:] > ordered[:-1])
        if gaps.size == 0:
            continue
        left_sums = np.cumsum(centered[order])[gaps]
        left_counts = gaps + 1
        right_sums = total - left_sums
        values = (left_sums**2 / left_counts + right_sums**2 / (n - left_counts)) / n
        scans.append((direction, ordered, gaps, values))
    if not scans:
        return None
    best_value = max(float(values.max()) for *_, values in scans)
    threshold = best_value - tie_tolerance(best_value, responses)
    for direction, ordered, gaps, values in scans:
        tied = np.flatnonzero(values >= threshold)
        if tied.size == 0:
            continue
        k = int(tied[0])
        gap = gaps[k]
        position = (ordered[gap] + ordered[gap + 1]) / 2
        return SplitEvaluation(
            cut=Cut(direction, float(position)),
            criterion_value=float(values[k]),
            left_count=int(gap + 1),
            right_count=int(n - gap - 1),
        )


def draw_mtry(p: int, mtry: int, rng: np.random.Generator) -> FrozenSet[int]:
    """
    Draw `mtry` directions uniformly without replacement from 1..p.
    """
    if not 1 <= p:
        raise ConfigurationError(f"dimension p must be at least 1: {p}")
    if not 1 <= mtry <= p:
        raise ConfigurationError(f"mtry must lie in 1..{p}: {mtry}")
    if mtry == p:
        return frozenset(range(1, p + 1))
    chosen = rng.choice(p, size=mtry, replace=False)
    return frozenset(int(axis) + 1 for axis in chosen)
