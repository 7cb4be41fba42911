"""
Connection-weight check for fully grown forests: the forest estimate is a
weighted average of the training responses, and with t_n = a_n no single
training point may carry a weight above a_n / n.
"""

from typing import List

import numpy as np

from rfcheck.experiments import harness
from rfcheck.experiments.harness import Measurement
from rfcheck.experiments.metrics import MetricsRecord
from rfcheck.experiments.schedule import RegimeSchedule
from rfcheck.forest.forest import ConnectionWeights
from rfcheck.oracle.model import AdditiveModel

experiment_id = "connection"

"""Tolerance on the sum of the connection weights of a query point"""
weight_sum_tolerance = 1e-9

"""Standard errors a connection weight estimate may exceed the bound a_n / n by"""
bound_standard_errors = 3.0


def bound_margin(weights: ConnectionWeights, bound: float, trees: int) -> float:
    """
    Allowed excess of the largest estimated weight over `bound`:
    `bound_standard_errors` Monte Carlo standard errors, taking the larger of
    the estimate's own standard error and that of a weight equal to the bound.
    """
    null_error = np.sqrt(bound * (1 - bound) / trees)
    return bound_standard_errors * max(weights.max_weight_standard_error(), null_error)


def run_connection(
    model: AdditiveModel,
    schedule: RegimeSchedule,
    trees: int,
    replicates: int,
    n_query: int,
    seed: int,
    mtry: int = None,
    threads: int = 1,
) -> List[MetricsRecord]:
    """
    Emit per n the mean over query points of the largest connection weight
    (`max_weight`), its largest value over query points (`max_weight_sup`)
    and the bound a_n / n (`bound`).
    """
    harness.check_counts(trees=trees, replicates=replicates, n_query=n_query)
    points = schedule.validate()
    mtry = harness.check_mtry(mtry, model.p)

    def evaluate(point, replicate):
        _, forest = harness.fit_replicate(model, point, replicate, trees, mtry)
        queries = harness.query_points(model, n_query, replicate)
        bound = point.subsample_size / point.n
        check_bound = point.leaves == point.subsample_size and trees > 1
        largest = np.empty(n_query)
        for i, x in enumerate(queries):
            weights = forest.connection_weights(x)
            harness.check_invariant(
                abs(weights.total - 1.0) <= weight_sum_tolerance,
                f"connection weights at n={point.n} sum to {weights.total!r}",
            )
            largest[i] = weights.max_weight
            if check_bound:
                margin = bound_margin(weights, bound, trees)
                harness.check_invariant(
                    weights.max_weight <= bound + margin,
                    f"connection weight {weights.max_weight:.4g} at n={point.n} "
                    f"exceeds a_n / n = {bound:.4g} by more than {margin:.3g}",
                )
        stderr = float(largest.std(ddof=1) / np.sqrt(n_query)) if n_query > 1 else 0.0
        return {
            "max_weight": Measurement(float(largest.mean()), stderr),
            "max_weight_sup": Measurement(float(largest.max())),
            "bound": Measurement(bound),
        }

    results = harness.run_grid(
        evaluate, points, harness.replicate_seeds(seed, replicates), threads
    )

    def params_for(point):
        params = harness.forest_params_for(point, trees, mtry)
        params.update(n_query=n_query)
        return params

    return harness.build_records(experiment_id, results, params_for)
