"""
The theoretical CART-split criterion for additive models with uniform
covariates, and the best theoretical cut.

For a cell A and a cut (j, z), with X uniform on A,

    L*(j, z) = V[Y | X in A]
               - P[X^(j) < z | A] V[Y | X^(j) < z, A]
               - P[X^(j) >= z | A] V[Y | X^(j) >= z, A]

Additivity and independence of the coordinates leave only the j-th
component in the difference, and the variance decomposition of a two-part
mixture gives the closed form

    L*(j, z) = p_L p_R (mu_L - mu_R)^2

where p_L, p_R are the relative lengths of the two sides and mu_L, mu_R the
means of m_j over them. The noise variance and every other coordinate
cancel.
"""

import dataclasses
import logging
from typing import Iterable, List, Optional, Tuple

import numpy as np

from rfcheck.errors import DomainError
from rfcheck.forest.splitter import Cut
from rfcheck.forest.tree import Cell
from rfcheck.oracle.model import AdditiveModel

"""Number of grid intervals for bracketing the best position along a direction"""
bracket_grid_size: int = 1000
"""Absolute position tolerance of the refinement"""
position_tolerance: float = 1e-8
"""Optima within this much of the best criterion value are all reported"""
optimum_tolerance: float = 1e-8
"""Criterion values at or below this are treated as zero"""
degenerate_tolerance: float = 1e-14


def _check_cell(cell: Cell, model: AdditiveModel) -> None:
    if cell.p != model.p:
        raise DomainError(f"cell has p={cell.p} but the model has p={model.p}")
    if not cell.volume > 0:
        raise DomainError("cell has zero volume")


def _criterion_along(model: AdditiveModel, cell: Cell, direction: int, positions):
    """L*(direction, z) for an array of positions z strictly inside the cell."""
    component = model.component(direction)
    low = cell.lower[direction - 1]
    high = cell.upper[direction - 1]
    positions = np.asarray(positions, dtype=float)
    width = high - low
    left_share = (positions - low) / width
    right_share = (high - positions) / width
    left_mean = component.integral(low, positions) / (positions - low)
    right_mean = component.integral(positions, high) / (high - positions)
    return left_share * right_share * (left_mean - right_mean) ** 2


def theoretical_criterion(model: AdditiveModel, cell: Cell, cut: Cut) -> float:
    _check_cell(cell, model)
    if not cell.admits(cut):
        raise DomainError(f"{cut} is not strictly inside the cell")
    return float(_criterion_along(model, cell, cut.direction, cut.position))


def conditional_variance(model: AdditiveModel, cell: Cell) -> float:
    """V[Y | X in A], from the integrals of each m_j and m_j^2 over the cell."""
    _check_cell(cell, model)
    variance = model.noise_sigma**2
    for axis, component in enumerate(model.components):
        low, high = cell.lower[axis], cell.upper[axis]
        width = high - low
        mean = float(component.integral(low, high)) / width
        mean_square = component.square_integral(low, high) / width
        variance += max(mean_square - mean**2, 0.0)
    return variance


@dataclasses.dataclass(frozen=True)
class TheoreticalSplit:
    cut: Cut
    """The optimal cut, ties broken by smallest direction then position"""
    value: float
    optima: Tuple[Cut, ...]
    """Every cut whose criterion is within `optimum_tolerance` of the best"""
    degenerate: bool = False
    """True when the criterion vanishes for every candidate cut"""


def _maxima_along(
    model: AdditiveModel, cell: Cell, direction: int
) -> List[Tuple[float, float]]:
    """
    Return (position, value) of the local maxima of L* along `direction`,
    bracketed on a uniform grid and refined by bounded scalar optimization.
    """
    from scipy.optimize import minimize_scalar

    low = cell.lower[direction - 1]
    high = cell.upper[direction - 1]
    grid = np.linspace(low, high, bracket_grid_size + 1)[1:-1]
    values = _criterion_along(model, cell, direction, grid)
    if values.max() <= degenerate_tolerance:
        return []
    padded = np.concatenate([[-np.inf], values, [-np.inf]])
    is_peak = (padded[1:-1] >= padded[:-2]) & (padded[1:-1] >= padded[2:])
    threshold = values.max() - max(optimum_tolerance, 1e-6 * abs(values.max()))
    maxima = []
    for index in np.flatnonzero(is_peak & (values >= threshold)):
        left = grid[index - 1] if index > 0 else low
        right = grid[index + 1] if index + 1 < grid.size else high
        result = minimize_scalar(
            lambda z: -float(_criterion_along(model, cell, direction, z)),
            bounds=(left, right),
            method="bounded",
            options={"xatol": position_tolerance / 10},
        )
        position, value = float(result.x), -float(result.fun)
        if value < values[index]:
            position, value = float(grid[index]), float(values[index])
        maxima.append((position, value))
    return maxima


def best_theoretical_cut(
    model: AdditiveModel, cell: Cell, candidate_directions: Iterable[int]
) -> TheoreticalSplit:
    """
    Maximize L* over the candidate directions and all positions inside the
    cell. When L* vanishes everywhere, return the cut at the cell midpoint of
    the smallest candidate direction, flagged as degenerate.
    """
    _check_cell(cell, model)
    directions = sorted(set(candidate_directions))
    if not directions:
        raise DomainError("candidate_directions must not be empty")
    candidates = []
    for direction in directions:
        model.component(direction)  # validates the direction
        for position, value in _maxima_along(model, cell, direction):
            candidates.append((direction, position, value))
    best_value = max((value for _, _, value in candidates), default=0.0)
    if best_value <= degenerate_tolerance:
        direction = directions[0]
        midpoint = (cell.lower[direction - 1] + cell.upper[direction - 1]) / 2
        cut = Cut(direction, float(midpoint))
        logging.debug(f"theoretical criterion vanishes on cell {cell.lower}..{cell.upper}")
        return TheoreticalSplit(cut, 0.0, (cut,), degenerate=True)
    optima: List[Cut] = []
    for direction, position, value in sorted(candidates):
        if value < best_value - optimum_tolerance:
            continue
        previous: Optional[Cut] = optima[-1] if optima else None
        if (
            previous is not None
            and previous.direction == direction
            and abs(previous.position - position) < 10 * position_tolerance
        ):
            continue
        optima.append(Cut(direction, position))
    return TheoreticalSplit(optima[0], best_value, tuple(optima))
