"""
Cell-variation check: the variation of the regression function over the
leaf containing a query point, Delta(m, A_n(X)), should shrink in
probability as n grows.
"""

from typing import Dict, List, Sequence

import numpy as np

from rfcheck.errors import ConfigurationError
from rfcheck.experiments import harness
from rfcheck.experiments.harness import Measurement
from rfcheck.experiments.metrics import MetricsRecord, format_value
from rfcheck.experiments.schedule import RegimeSchedule
from rfcheck.oracle.model import AdditiveModel
from rfcheck.oracle.variation import cell_variation

experiment_id = "cellvar"

"""Slack allowed when checking that a cell's variation stays below the total range"""
range_tolerance = 1e-9


def xi_metric(xi: float) -> str:
    return f"p_variation_le_{format_value(xi)}"


def leaf_variations(model: AdditiveModel, tree, queries: np.ndarray) -> np.ndarray:
    """Delta(m, A) of the leaf of each query point in one tree."""
    leaf_ids = tree.apply(queries)
    cache: Dict[int, float] = {}
    for leaf_id in np.unique(leaf_ids).tolist():
        cache[leaf_id] = cell_variation(model, tree.nodes[leaf_id].cell)
    return np.array([cache[leaf_id] for leaf_id in leaf_ids.tolist()])


def run_cell_variation(
    model: AdditiveModel,
    schedule: RegimeSchedule,
    trees: int,
    replicates: int,
    n_query: int,
    xi_grid: Sequence[float],
    seed: int,
    mtry: int = None,
    threads: int = 1,
) -> List[MetricsRecord]:
    """
    Emit `median_variation` and the empirical probability P[Delta <= xi]
    for each xi of `xi_grid` (metric `p_variation_le_{xi}`), per n, over
    n_query points and all trees.
    """
    harness.check_counts(trees=trees, replicates=replicates, n_query=n_query)
    xi_grid = [float(xi) for xi in xi_grid]
    if not xi_grid or any(not xi > 0 for xi in xi_grid):
        raise ConfigurationError(f"xi_grid must hold positive values: {xi_grid}")
    points = schedule.validate()
    mtry = harness.check_mtry(mtry, model.p)
    total_range = model.total_range()

    def evaluate(point, replicate):
        _, forest = harness.fit_replicate(model, point, replicate, trees, mtry)
        queries = harness.query_points(model, n_query, replicate)
        variations = np.concatenate(
            [leaf_variations(model, tree, queries) for tree in forest.trees]
        )
        harness.check_invariant(
            bool((variations <= total_range + range_tolerance).all()),
            f"cell variation exceeds the total range {total_range} at n={point.n}",
        )
        measurements = {"median_variation": Measurement(float(np.median(variations)))}
        for xi in xi_grid:
            probability = float((variations <= xi).mean())
            stderr = float(np.sqrt(probability * (1 - probability) / variations.size))
            measurements[xi_metric(xi)] = Measurement(probability, stderr)
        return measurements

    results = harness.run_grid(
        evaluate, points, harness.replicate_seeds(seed, replicates), threads
    )

    def params_for(point):
        params = harness.forest_params_for(point, trees, mtry)
        params.update(n_query=n_query, xi_grid=xi_grid)
        return params

    return harness.build_records(experiment_id, results, params_for)
