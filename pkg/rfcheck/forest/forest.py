"""
Finite random forests: M trees, each grown on a_n rows drawn without
replacement, predicting by the plain average of the tree predictions.
"""

import dataclasses
import logging
import time
from typing import List, Sequence

import numpy as np

from rfcheck.errors import ConfigurationError
from rfcheck.forest.tree import GrownTree, grow
from rfcheck.streams import Stream, check_seed, make_stream


def default_mtry(p: int) -> int:
    """Breiman's default number of candidate directions for regression, p / 3."""
    return max(1, p // 3)


@dataclasses.dataclass(frozen=True)
class ForestParams:
    """
    Configuration of the forest algorithm. In the usual notation, `trees` is
    M, `subsample_size` is a_n and `leaves` is t_n.
    """

    trees: int
    mtry: int
    subsample_size: int
    leaves: int
    seed: int = 0

    def __post_init__(self):
        for field in "trees", "mtry", "subsample_size", "leaves":
            value = getattr(self, field)
            if isinstance(value, bool) or int(value) != value or value < 1:
                raise ConfigurationError(f"{field} must be a positive integer: {value!r}")
        if self.leaves > self.subsample_size:
            raise ConfigurationError(
                f"leaves (t_n={self.leaves}) must not exceed "
                f"subsample_size (a_n={self.subsample_size})"
            )
        object.__setattr__(self, "seed", check_seed(self.seed))

    def check_dataset(self, n: int, p: int) -> None:
        if self.subsample_size > n:
            raise ConfigurationError(
                f"subsample_size (a_n={self.subsample_size}) exceeds the number of rows n={n}"
            )
        if self.mtry > p:
            raise ConfigurationError(f"mtry={self.mtry} exceeds the dimension p={p}")

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


@dataclasses.dataclass(frozen=True)
class ConnectionWeights:
    """
    Monte Carlo estimates over the forest's trees of the connection weights
    W_i(x) = E[1{X_i in leaf of x} / size of leaf of x], one per dataset row.
    With singleton leaves this is the probability that row i shares the
    leaf of x.
    """

    weights: np.ndarray
    standard_errors: np.ndarray
    """Monte Carlo standard error of each weight across trees"""
    per_tree_leaf_sizes: np.ndarray
    """Number of subsample points in the leaf of x, per tree"""

    @property
    def total(self) -> float:
        return float(self.weights.sum())

    @property
    def max_weight(self) -> float:
        return float(self.weights.max())

    def max_weight_standard_error(self) -> float:
        return float(self.standard_errors[int(np.argmax(self.weights))])


class Forest:
    def __init__(self, params: ForestParams, trees: Sequence[GrownTree], n: int, p: int):
        if len(trees) != params.trees:
            raise ConfigurationError(
                f"expected {params.trees} trees, received {len(trees)}"
            )
        self.params = params
        self.trees = tuple(trees)
        self.n = int(n)
        self.p = int(p)

    def predict_trees(self, points) -> np.ndarray:
        """Return an M x m array of the individual tree predictions."""
        return np.stack([tree.predict_many(points) for tree in self.trees])

    def predict_many(self, points) -> np.ndarray:
        return self.predict_trees(points).mean(axis=0)

    def predict(self, x) -> float:
        """Return the average of the M tree predictions at x."""
        return float(self.predict_many(x)[0])

    def prediction_standard_error(self, points) -> np.ndarray:
        """
        Monte Carlo standard error of the finite forest prediction as an
        estimate of the infinite forest, per query point.
        """
        per_tree = self.predict_trees(points)
        if len(self.trees) < 2:
            return np.zeros(per_tree.shape[1])
        return per_tree.std(axis=0, ddof=1) / np.sqrt(len(self.trees))

    def apply(self, points) -> np.ndarray:
        """Return an M x m array of leaf node ids."""
        return np.stack([tree.apply(points) for tree in self.trees])

    def connection_weights(self, x) -> ConnectionWeights:
        weights = np.zeros(self.n)
        squares = np.zeros(self.n)
        sizes = []
        for tree in self.trees:
            rows = tree.leaf(x).cell.point_indices
            share = 1.0 / rows.size
            weights[rows] += share
            squares[rows] += share**2
            sizes.append(rows.size)
        count = len(self.trees)
        weights /= count
        if count > 1:
            variance = (squares / count - weights**2) * count / (count - 1)
            errors = np.sqrt(np.clip(variance, 0.0, None) / count)
        else:
            errors = np.zeros(self.n)
        return ConnectionWeights(
            weights=weights,
            standard_errors=errors,
            per_tree_leaf_sizes=np.asarray(sizes, dtype=np.intp),
        )


def draw_subsample(n: int, size: int, rng: np.random.Generator) -> np.ndarray:
    """Draw `size` distinct row indices uniformly without replacement, sorted."""
    return np.sort(rng.choice(n, size=size, replace=False))


def fit_tree(dataset, params: ForestParams, index: int) -> GrownTree:
    """Grow tree `index` of a forest. Its randomness depends only on (seed, index)."""
    rng = make_stream(params.seed, Stream.TREE, index)
    subsample = draw_subsample(dataset.n, params.subsample_size, rng)
    return grow(dataset, subsample, params.leaves, params.mtry, rng)


def fit(dataset, params: ForestParams, threads: int = 1) -> Forest:
    """
    Grow `params.trees` trees on `dataset`. Trees are grown concurrently on
    `threads` threads; the result does not depend on the thread count.
    """
    from joblib import Parallel, delayed

    params.check_dataset(dataset.n, dataset.p)
    if threads < 1:
        raise ConfigurationError(f"threads must be at least 1: {threads}")
    start = time.perf_counter()
    trees: List[GrownTree] = Parallel(n_jobs=threads, prefer="threads")(
        delayed(fit_tree)(dataset, params, index) for index in range(params.trees)
    )
    logging.info(
        f"grew {params.trees} trees (a_n={params.subsample_size}, "
        f"t_n={params.leaves}, mtry={params.mtry}) on n={dataset.n} rows "
        f"in {time.perf_counter() - start:.2f}s"
    )
    return Forest(params, trees, n=dataset.n, p=dataset.p)
