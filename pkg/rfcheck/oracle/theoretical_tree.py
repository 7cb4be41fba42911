"""
Theoretical trees: recursive best theoretical cuts with every direction as
a candidate, stopped at a fixed level k.

When a cell has several optimal cuts the tree branches on each of them, so
a query point x is associated with the set of all optimal cut sequences
leading to it, rather than a single sequence.
"""

import dataclasses
import functools
from typing import List, Optional, Tuple

import numpy as np

from rfcheck.errors import DomainError
from rfcheck.forest.splitter import Cut
from rfcheck.forest.tree import Cell
from rfcheck.oracle.criterion import TheoreticalSplit, best_theoretical_cut
from rfcheck.oracle.distance import CutSequence
from rfcheck.oracle.model import AdditiveModel


@dataclasses.dataclass(eq=False)
class TheoreticalNode:
    cell: Cell
    level: int
    split: Optional[TheoreticalSplit] = None
    """Absent below the last level"""
    branches: List[Tuple[Cut, "TheoreticalNode", "TheoreticalNode"]] = dataclasses.field(
        default_factory=list
    )
    """(cut, left child, right child) for each optimal cut"""


class TheoreticalTree:
    def __init__(self, model: AdditiveModel, root: TheoreticalNode, k: int):
        self.model = model
        self.root = root
        self.k = k

    def nodes(self):
        stack = [self.root]
        while stack:
            node = stack.pop()
            yield node
            for _, left, right in reversed(node.branches):
                stack.extend([right, left])

    @property
    def degenerate(self) -> bool:
        """Whether any cut of the tree was chosen on a vanishing criterion"""
        return any(node.split is not None and node.split.degenerate for node in self.nodes())

    def degenerate_levels(self) -> List[bool]:
        """Per level 0..k-1, whether every split at that level is degenerate."""
        flags = []
        for level in range(self.k):
            splits = [
                node.split
                for node in self.nodes()
                if node.level == level and node.split is not None
            ]
            flags.append(bool(splits) and all(split.degenerate for split in splits))
        return flags

    def sequences(self, x) -> List[CutSequence]:
        """
        All optimal cut sequences d*_k(x): one per path of optimal cuts from
        the root to level k through cells containing x.
        """
        x = np.asarray(x, dtype=float)
        if x.shape != (self.model.p,) or not ((x >= 0) & (x <= 1)).all():
            raise DomainError(f"x must be a point of [0, 1]^{self.model.p}")
        found = []

        def walk(node: TheoreticalNode, prefix: Tuple[Cut, ...]):
            if not node.branches:
                found.append(CutSequence(prefix))
                return
            for cut, left, right in node.branches:
                child = left if x[cut.axis] < cut.position else right
                walk(child, prefix + (cut,))

        walk(self.root, ())
        return found

    def cells(self, x, level: int) -> List[Cell]:
        """The cells A*_level(x) reached by the optimal sequences."""
        if not 0 <= level <= self.k:
            raise DomainError(f"level must lie in 0..{self.k}: {level}")
        x = np.asarray(x, dtype=float)
        cells = []
        frontier = [self.root]
        for _ in range(level):
            next_frontier = []
            for node in frontier:
                for cut, left, right in node.branches:
                    next_frontier.append(left if x[cut.axis] < cut.position else right)
            frontier = next_frontier
        cells.extend(node.cell for node in frontier)
        return cells

    def cell(self, x, level: int) -> Cell:
        """The cell A*_level(x) along the canonical (first) optimal sequence."""
        return self.cells(x, level)[0]


def _bounds_key(cell: Cell):
    return tuple(cell.lower.tolist()), tuple(cell.upper.tolist())


def theoretical_tree(model: AdditiveModel, k: int) -> TheoreticalTree:
    """
    Build the theoretical tree of `model` to level k, using all p directions
    as candidates at every cell.
    """
    if k < 1:
        raise DomainError(f"k must be at least 1: {k}")
    directions = range(1, model.p + 1)
    empty = np.empty(0, dtype=np.intp)

    @functools.lru_cache(maxsize=None)
    def split_of(bounds) -> TheoreticalSplit:
        lower, upper = bounds
        return best_theoretical_cut(model, Cell(lower, upper, empty), directions)

    def build(cell: Cell, level: int) -> TheoreticalNode:
        node = TheoreticalNode(cell=cell, level=level)
        if level == k:
            return node
        node.split = split_of(_bounds_key(cell))
        for cut in node.split.optima:
            (left_lower, left_upper), (right_lower, right_upper) = cell.split_bounds(cut)
            node.branches.append(
                (
                    cut,
                    build(Cell(left_lower, left_upper, empty), level + 1),
                    build(Cell(right_lower, right_upper, empty), level + 1),
                )
            )
        return node

    return TheoreticalTree(model, build(Cell.unit(model.p, empty), 0), k)
