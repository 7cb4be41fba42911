"""
Sparsity check: in a sparse additive model whose first S of p coordinates
are informative, the first cuts of trees grown with mtry = p should fall
on informative directions with probability tending to one.

For each query point and tree, the first k cut directions on the point's
path are compared with {1, ..., S}. Cuts that were never performed (paths
shorter than q) are left out of the denominator.
"""

import logging
from typing import List

import numpy as np

from rfcheck.errors import ConfigurationError
from rfcheck.experiments import harness
from rfcheck.experiments.harness import Measurement
from rfcheck.experiments.metrics import MetricsRecord
from rfcheck.experiments.schedule import fixed_grid
from rfcheck.oracle.model import AdditiveModel

experiment_id = "sparsity"


def informative_counts(directions: np.ndarray, informative: int):
    """
    Given an array of cut directions whose last axis is the cut rank q,
    return per q the number of performed cuts and how many of them fall on
    directions 1..informative.
    """
    performed = np.isfinite(directions)
    on_informative = performed & (directions <= informative)
    axes = tuple(range(directions.ndim - 1))
    return performed.sum(axis=axes), on_informative.sum(axis=axes)


def run_sparsity(
    model: AdditiveModel,
    n_grid,
    k: int,
    trees: int,
    replicates: int,
    n_query: int,
    seed: int,
    leaves: int = None,
    threads: int = 1,
) -> List[MetricsRecord]:
    """
    Emit `informative_fraction_q{q}` for q = 1..k and the pooled
    `informative_fraction` per n. Trees use mtry = p, a_n = n and, unless
    `leaves` is given, t_n = 2^k, enough leaves for k complete levels.
    """
    harness.check_counts(k=k, trees=trees, replicates=replicates, n_query=n_query)
    informative = model.informative
    if informative >= model.p:
        raise ConfigurationError(
            f"sparsity requires S < p to have uninformative directions, "
            f"got S={informative} and p={model.p}"
        )
    constant = [j + 1 for j, c in enumerate(model.components) if c.is_constant]
    if constant:
        raise ConfigurationError(
            f"sparsity requires non-constant informative components, "
            f"but direction(s) {constant} are constant"
        )
    mtry = model.p
    points = fixed_grid(n_grid, leaves=2**k if leaves is None else leaves)

    def evaluate(point, replicate):
        _, forest = harness.fit_replicate(model, point, replicate, trees, mtry)
        queries = harness.query_points(model, n_query, replicate)
        directions = np.stack(
            [tree.cut_sequences_many(queries, k)[0] for tree in forest.trees]
        )
        performed, hits = informative_counts(directions, informative)
        measurements = {}
        for q in range(k):
            if performed[q] == 0:
                logging.warning(
                    f"n={point.n}: no tree performed a cut of rank {q + 1}"
                )
                fraction = float("nan")
            else:
                fraction = hits[q] / performed[q]
            measurements[f"informative_fraction_q{q + 1}"] = Measurement(fraction)
        total = performed.sum()
        pooled = hits.sum() / total if total else float("nan")
        harness.check_invariant(
            np.isnan(pooled) or 0.0 <= pooled <= 1.0,
            f"informative fraction at n={point.n} is {pooled}",
        )
        measurements["informative_fraction"] = Measurement(float(pooled))
        measurements["uncut_share"] = Measurement(
            float(1.0 - total / directions.size)
        )
        return measurements

    results = harness.run_grid(
        evaluate, points, harness.replicate_seeds(seed, replicates), threads
    )

    def params_for(point):
        params = harness.forest_params_for(point, trees, mtry)
        params.update(k=k, informative=informative, n_query=n_query)
        return params

    return harness.build_records(experiment_id, results, params_for)
