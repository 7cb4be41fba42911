"""
L2 consistency check: the mean squared distance between the forest
estimate and the true regression function, along a regime schedule.
"""

import logging
from typing import List

import numpy as np

from rfcheck.errors import ConfigurationError
from rfcheck.experiments import harness
from rfcheck.experiments.harness import Measurement
from rfcheck.experiments.metrics import MetricsRecord
from rfcheck.experiments.schedule import RegimeSchedule
from rfcheck.oracle.model import AdditiveModel

experiment_id = "consistency"
minimum_test_points = 1000


def run_consistency(
    model: AdditiveModel,
    schedule: RegimeSchedule,
    trees: int,
    replicates: int,
    n_test: int,
    seed: int,
    mtry: int = None,
    threads: int = 1,
) -> List[MetricsRecord]:
    """
    For every n of the schedule and every replicate, fit a forest on a fresh
    sample and estimate E[(m_n(X) - m(X))^2] on n_test uniform points
    against the known regression function m. Emits metric `mse`.
    """
    harness.check_counts(trees=trees, replicates=replicates, n_test=n_test)
    if n_test < minimum_test_points:
        raise ConfigurationError(
            f"n_test must be at least {minimum_test_points}: {n_test}"
        )
    points = schedule.validate()
    mtry = harness.check_mtry(mtry, model.p)

    def evaluate(point, replicate):
        _, forest = harness.fit_replicate(model, point, replicate, trees, mtry)
        queries = harness.query_points(model, n_test, replicate)
        errors = (forest.predict_many(queries) - model.regression(queries)) ** 2
        mse = float(errors.mean())
        harness.check_invariant(
            np.isfinite(mse) and mse >= 0,
            f"mse at n={point.n} is {mse}",
        )
        stderr = float(errors.std(ddof=1) / np.sqrt(errors.size))
        return {"mse": Measurement(mse, stderr)}

    results = harness.run_grid(
        evaluate, points, harness.replicate_seeds(seed, replicates), threads
    )
    records = harness.build_records(
        experiment_id,
        results,
        lambda point: harness.forest_params_for(point, trees, mtry),
    )
    for record in records:
        if record.is_aggregate:
            logging.info(
                f"consistency n={record.n}: mse {record.value:.6g} "
                f"+/- {record.stderr:.2g}"
            )
    return records
