"""
Cut-distance check: the first k empirical cuts leading to a query point
approach the optimal theoretical cuts as n grows.
"""

import logging
from typing import List

import numpy as np

from rfcheck.errors import ConfigurationError, DegenerateModelError, DomainError
from rfcheck.experiments import harness
from rfcheck.experiments.harness import Measurement
from rfcheck.experiments.metrics import MetricsRecord
from rfcheck.experiments.schedule import fixed_grid
from rfcheck.oracle.distance import cut_distances
from rfcheck.oracle.model import AdditiveModel
from rfcheck.oracle.theoretical_tree import TheoreticalTree, theoretical_tree

experiment_id = "cutdist"
max_depth = 3


def query_distances(
    forest_trees, reference: TheoreticalTree, queries: np.ndarray, k: int
) -> np.ndarray:
    """
    Return a trees x queries array of d_inf distances between each tree's
    first k cuts towards a query point and the point's optimal theoretical
    sequences. Entries for paths shorter than k are infinite.
    """
    sequences = [tree.cut_sequences_many(queries, k) for tree in forest_trees]
    directions = np.stack([d for d, _ in sequences])
    positions = np.stack([z for _, z in sequences])
    distances = np.empty((len(forest_trees), queries.shape[0]))
    for i, x in enumerate(queries):
        distances[:, i] = cut_distances(
            directions[:, i, :], positions[:, i, :], reference.sequences(x)
        )
    return distances


def inadmissible_sequences(reference: TheoreticalTree, queries: np.ndarray) -> int:
    """Count the optimal sequences of the queries that leave their own cells."""
    count = 0
    for x in queries:
        for sequence in reference.sequences(x):
            try:
                sequence.check_admissible(x, queries.shape[1])
            except DomainError:
                count += 1
    return count


def run_cut_distance(
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
    Emit `distance_median`, `distance_p90` and `excluded_paths` per n.
    Trees use mtry = p, a_n = n and t_n = 2^k unless `leaves` is given.
    Refuses models whose theoretical tree has a degenerate split.
    """
    harness.check_counts(k=k, trees=trees, replicates=replicates, n_query=n_query)
    if k > max_depth:
        raise ConfigurationError(f"cut distance supports k <= {max_depth}: {k}")
    reference = theoretical_tree(model, k)
    if reference.degenerate:
        raise DegenerateModelError(
            "the theoretical criterion vanishes on a cell of the theoretical tree, "
            "so theoretical cuts are not identified"
        )
    mtry = model.p
    points = fixed_grid(n_grid, leaves=2**k if leaves is None else leaves)

    def evaluate(point, replicate):
        _, forest = harness.fit_replicate(model, point, replicate, trees, mtry)
        queries = harness.query_points(model, n_query, replicate)
        inadmissible = inadmissible_sequences(reference, queries)
        harness.check_invariant(
            inadmissible == 0,
            f"{inadmissible} theoretical cut sequences leave their cells at n={point.n}",
        )
        distances = query_distances(forest.trees, reference, queries, k).ravel()
        complete = distances[np.isfinite(distances)]
        excluded = distances.size - complete.size
        if excluded:
            logging.warning(
                f"n={point.n}: {excluded} of {distances.size} query paths "
                f"have fewer than k={k} cuts and were excluded"
            )
        if complete.size:
            median = float(np.median(complete))
            p90 = float(np.quantile(complete, 0.9))
        else:
            median = p90 = float("nan")
        harness.check_invariant(
            bool((complete >= 0).all()), f"negative cut distance at n={point.n}"
        )
        return {
            "distance_median": Measurement(median),
            "distance_p90": Measurement(p90),
            "excluded_paths": Measurement(float(excluded)),
        }

    results = harness.run_grid(
        evaluate, points, harness.replicate_seeds(seed, replicates), threads
    )

    def params_for(point):
        params = harness.forest_params_for(point, trees, mtry)
        params.update(k=k, n_query=n_query)
        return params

    return harness.build_records(experiment_id, results, params_for)
