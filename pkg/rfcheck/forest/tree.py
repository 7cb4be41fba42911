"""
Randomized CART trees grown breadth-first to a fixed number of leaves.

Growth follows Breiman's procedure with a leaf budget t_n: cells are kept in
per-level FIFO queues; the first cell of the current level is either passed
to the next level unchanged (when it holds a single point, or admits no cut
along the drawn directions) or cut along the best CART split among mtry
freshly drawn directions, its two children being appended left then right to
the next level. Each cut adds one leaf. Growth stops at t_n leaves, or
earlier when no waiting cell admits a cut along any direction.

Cells are left-closed, right-open boxes, except that the global upper face
of [0, 1]^p belongs to the cells touching it, so the leaves partition the
unit cube.
"""

import collections
import dataclasses
import logging
import math
from typing import List, Optional, Sequence, Tuple

import numpy as np

from rfcheck.errors import ConfigurationError, DomainError
from rfcheck.forest.splitter import Cut, best_cut, draw_mtry

"""Direction reported for cuts that were never performed"""
NO_CUT = math.inf


@dataclasses.dataclass(eq=False)
class Cell:
    lower: np.ndarray
    upper: np.ndarray
    point_indices: np.ndarray
    """Dataset row indices of the subsample points inside the cell"""

    def __post_init__(self):
        self.lower = np.asarray(self.lower, dtype=float)
        self.upper = np.asarray(self.upper, dtype=float)
        self.point_indices = np.asarray(self.point_indices, dtype=np.intp)
        if self.lower.shape != self.upper.shape or self.lower.ndim != 1:
            raise DomainError("cell bounds must be vectors of equal length")
        if not (self.lower < self.upper).all():
            raise DomainError(f"cell has an empty side: {self.lower} to {self.upper}")

    @classmethod
    def unit(cls, p: int, point_indices) -> "Cell":
        return cls(np.zeros(p), np.ones(p), point_indices)

    @property
    def p(self) -> int:
        return self.lower.size

    @property
    def n_points(self) -> int:
        return self.point_indices.size

    @property
    def volume(self) -> float:
        return float(np.prod(self.upper - self.lower))

    def contains(self, points) -> np.ndarray:
        """
        Return a boolean membership mask for an m x p array of points
        (or a bool for a single point).
        """
        points = np.asarray(points, dtype=float)
        inside = (points >= self.lower) & (
            (points < self.upper) | ((self.upper == 1.0) & (points == 1.0))
        )
        return inside.all(axis=-1)

    def admits(self, cut: Cut) -> bool:
        """Whether `cut` lies strictly inside the cell along its direction"""
        if not 1 <= cut.direction <= self.p:
            return False
        return bool(self.lower[cut.axis] < cut.position < self.upper[cut.axis])

    def split_bounds(self, cut: Cut) -> Tuple[Tuple, Tuple]:
        """Return ((lower, upper), (lower, upper)) of the left and right children."""
        if not self.admits(cut):
            raise DomainError(f"{cut} is not strictly inside the cell")
        left_upper = self.upper.copy()
        left_upper[cut.axis] = cut.position
        right_lower = self.lower.copy()
        right_lower[cut.axis] = cut.position
        return (self.lower, left_upper), (right_lower, self.upper)


@dataclasses.dataclass(eq=False)
class TreeNode:
    cell: Cell
    depth: int
    """Number of cuts between the root and this node"""
    mean: float
    """Mean response of the node's points (0 for an empty node)"""
    cut: Optional[Cut] = None
    children: Optional[Tuple[int, int]] = None

    @property
    def is_leaf(self) -> bool:
        return self.cut is None

    @property
    def leaf_mean(self) -> float:
        if not self.is_leaf:
            raise AttributeError("leaf_mean is only defined at leaves")
        return self.mean


class GrownTree:
    """
    An immutable grown tree. Nodes are numbered in creation order, the root
    being node 0 and the two children of every cut created left then right.
    """

    def __init__(
        self,
        nodes: Sequence[TreeNode],
        subsample_indices,
        requested_leaves: int,
    ):
        self.nodes: Tuple[TreeNode, ...] = tuple(nodes)
        self.subsample_indices = np.asarray(subsample_indices, dtype=np.intp)
        self.requested_leaves = int(requested_leaves)
        self.p = self.nodes[0].cell.p
        count = len(self.nodes)
        self._axis = np.full(count, -1, dtype=np.intp)
        self._position = np.zeros(count)
        self._left = np.full(count, -1, dtype=np.intp)
        self._right = np.full(count, -1, dtype=np.intp)
        self._mean = np.array([node.mean for node in self.nodes], dtype=float)
        for node_id, node in enumerate(self.nodes):
            if node.is_leaf:
                continue
            self._axis[node_id] = node.cut.axis
            self._position[node_id] = node.cut.position
            self._left[node_id], self._right[node_id] = node.children
        for array in (self._axis, self._position, self._left, self._right, self._mean):
            array.flags.writeable = False

    @property
    def root(self) -> TreeNode:
        return self.nodes[0]

    @property
    def leaf_ids(self) -> List[int]:
        return [i for i, node in enumerate(self.nodes) if node.is_leaf]

    @property
    def leaf_count(self) -> int:
        return len(self.leaf_ids)

    def leaf_cells(self) -> List[Cell]:
        return [self.nodes[i].cell for i in self.leaf_ids]

    def internal_nodes(self) -> List[TreeNode]:
        return [node for node in self.nodes if not node.is_leaf]

    def _check_queries(self, points) -> np.ndarray:
        points = np.asarray(points, dtype=float)
        if points.ndim == 1:
            points = points.reshape(1, -1)
        if points.ndim != 2 or points.shape[1] != self.p:
            raise DomainError(
                f"query points must have {self.p} coordinates, got shape {points.shape}"
            )
        if not ((points >= 0.0) & (points <= 1.0)).all():
            raise DomainError("query points must lie in [0, 1]^p")
        return points

    def apply(self, points) -> np.ndarray:
        """Return the leaf node id of each row of an m x p array of points."""
        points = self._check_queries(points)
        node = np.zeros(points.shape[0], dtype=np.intp)
        active = np.flatnonzero(self._axis[node] >= 0)
        while active.size:
            ids = node[active]
            go_left = points[active, self._axis[ids]] < self._position[ids]
            node[active] = np.where(go_left, self._left[ids], self._right[ids])
            active = active[self._axis[node[active]] >= 0]
        return node

    def predict_many(self, points) -> np.ndarray:
        return self._mean[self.apply(points)]

    def predict(self, x) -> float:
        """Return the mean response of the leaf containing x."""
        return float(self.predict_many(x)[0])

    def leaf(self, x) -> TreeNode:
        return self.nodes[int(self.apply(x)[0])]

    def leaf_cell(self, x) -> Cell:
        return self.leaf(x).cell

    def path(self, x) -> List[int]:
        """Node ids from the root to the leaf containing x"""
        (x,) = self._check_queries(x)
        node_id = 0
        path = [node_id]
        while self._axis[node_id] >= 0:
            if x[self._axis[node_id]] < self._position[node_id]:
                node_id = int(self._left[node_id])
            else:
                node_id = int(self._right[node_id])
            path.append(node_id)
        return path

    def cut_sequence(self, x, k: int) -> List[Cut]:
        """
        Return the first k cuts on the path from the root to the leaf of x.
        Fewer than k cuts are returned when the path is shorter.
        """
        if k < 1:
            raise DomainError(f"k must be at least 1: {k}")
        path = self.path(x)
        return [self.nodes[i].cut for i in path[:-1]][:k]

    def cut_directions(self, x, k: int) -> list:
        """
        Return the directions of the first k cuts leading to the cell of x,
        padded with NO_CUT when the cell was cut fewer than k times.
        """
        directions = [cut.direction for cut in self.cut_sequence(x, k)]
        return directions + [NO_CUT] * (k - len(directions))

    def cut_sequences_many(self, points, k: int) -> Tuple[np.ndarray, np.ndarray]:
        """
        Vectorized cut_sequence for an m x p array of points. Return two m x k
        arrays holding the direction and position of the first k cuts on each
        path; missing cuts have direction NO_CUT and position NaN.
        """
        if k < 1:
            raise DomainError(f"k must be at least 1: {k}")
        points = self._check_queries(points)
        m = points.shape[0]
        directions = np.full((m, k), NO_CUT)
        positions = np.full((m, k), np.nan)
        node = np.zeros(m, dtype=np.intp)
        for q in range(k):
            active = np.flatnonzero(self._axis[node] >= 0)
            if not active.size:
                break
            ids = node[active]
            axes = self._axis[ids]
            directions[active, q] = axes + 1
            positions[active, q] = self._position[ids]
            go_left = points[active, axes] < self._position[ids]
            node[active] = np.where(go_left, self._left[ids], self._right[ids])
        return directions, positions

    def empirical_cell_at_level(self, x, k: int) -> Cell:
        """The cell containing x after the first k cuts on its path."""
        if k < 0:
            raise DomainError(f"k must be nonnegative: {k}")
        path = self.path(x)
        return self.nodes[path[min(k, len(path) - 1)]].cell

    def verify(self, features) -> None:
        """
        Check the grown structure against the data it was grown on: every
        cut lies strictly inside its cell at the midpoint of two consecutive
        distinct coordinates of the cell's points, and every leaf is
        nonempty. Raises AssertionError on the first violation.
        """
        features = np.asarray(features, dtype=float)
        for node_id, node in enumerate(self.nodes):
            cell = node.cell
            assert cell.n_points > 0, f"node {node_id} holds no points"
            assert cell.contains(features[cell.point_indices]).all(), (
                f"node {node_id} holds points outside its cell"
            )
            if node.is_leaf:
                continue
            cut = node.cut
            assert cell.admits(cut), f"node {node_id} cut {cut} is outside its cell"
            values = np.unique(features[cell.point_indices, cut.axis])
            below = values[values < cut.position]
            above = values[values >= cut.position]
            assert below.size and above.size, f"node {node_id} cut leaves a child empty"
            assert cut.position == (below[-1] + above[0]) / 2, (
                f"node {node_id} cut {cut} is not a data midpoint"
            )


def _check_grow_parameters(n_rows: int, p: int, subsample, leaves: int, mtry: int):
    if subsample.size == 0:
        raise ConfigurationError("the subsample must not be empty")
    if np.unique(subsample).size != subsample.size:
        raise ConfigurationError("subsample indices must be distinct")
    if subsample.min() < 0 or subsample.max() >= n_rows:
        raise ConfigurationError(f"subsample indices must lie in 0..{n_rows - 1}")
    if not 1 <= leaves <= subsample.size:
        raise ConfigurationError(
            f"number of leaves t_n={leaves} must lie in 1..a_n={subsample.size}"
        )
    if not 1 <= mtry <= p:
        raise ConfigurationError(f"mtry must lie in 1..{p}: {mtry}")


def grow(
    dataset,
    subsample_indices,
    leaves: int,
    mtry: int,
    rng: np.random.Generator,
) -> GrownTree:
    """
    Grow one tree on the rows `subsample_indices` of `dataset` until it has
    `leaves` leaves (t_n), drawing `mtry` candidate directions at every
    split attempt from `rng`.
    """
    features = dataset.features
    responses = dataset.responses
    n_rows, p = features.shape
    # sorted, so the tree depends on the subsample as a set
    samples = np.sort(np.asarray(subsample_indices, dtype=np.intp))
    _check_grow_parameters(n_rows, p, samples, leaves, mtry)

    # each node's points are the contiguous slice samples[start:stop]
    spans = [(0, samples.size)]
    nodes = [
        TreeNode(
            cell=Cell.unit(p, samples[0 : samples.size]),
            depth=0,
            mean=float(responses[samples].mean()),
        )
    ]

    def fully_splittable(node_id: int) -> bool:
        indices = nodes[node_id].cell.point_indices
        if indices.size < 2:
            return False
        block = features[indices]
        return bool((block.max(axis=0) > block.min(axis=0)).any())

    levels = [collections.deque([0]), collections.deque()]
    level = 0
    n_nodes = 1
    while n_nodes < leaves:
        if not levels[level]:
            level += 1
            levels.append(collections.deque())
            if not any(fully_splittable(node_id) for node_id in levels[level]):
                logging.warning(
                    f"tree growth stopped at {n_nodes} of {leaves} leaves: "
                    "no remaining cell admits a cut"
                )
                break
            continue
        node_id = levels[level].popleft()
        node = nodes[node_id]
        if node.cell.n_points == 1:
            levels[level + 1].append(node_id)
            continue
        directions = draw_mtry(p, mtry, rng)
        indices = node.cell.point_indices
        split = best_cut(features[indices], responses[indices], directions)
        if split is None:
            levels[level + 1].append(node_id)
            continue
        cut = split.cut
        start, stop = spans[node_id]
        goes_left = features[indices, cut.axis] < cut.position
        left_rows = indices[goes_left]
        right_rows = indices[~goes_left]
        samples[start:stop] = np.concatenate([left_rows, right_rows])
        middle = start + left_rows.size
        child_ids = []
        for (lower, upper), (child_start, child_stop) in zip(
            node.cell.split_bounds(cut), [(start, middle), (middle, stop)]
        ):
            rows = samples[child_start:child_stop]
            child_ids.append(len(nodes))
            spans.append((child_start, child_stop))
            nodes.append(
                TreeNode(
                    cell=Cell(lower, upper, rows),
                    depth=node.depth + 1,
                    mean=float(responses[rows].mean()),
                )
            )
        node.cut = cut
        node.children = tuple(child_ids)
        levels[level + 1].extend(child_ids)
        n_nodes += 1
        logging.debug(
            f"level {level}: cut node {node_id} at direction {cut.direction}, "
            f"position {cut.position:.6g} ({split.left_count} | {split.right_count})"
        )
    return GrownTree(nodes, np.sort(samples), requested_leaves=leaves)
