"""
Machinery shared by the experiment drivers.

Every replicate r of a run owns seeds derived from the run seed: one for its
training sample, one for its forest and one for its query points. The
seeds do not depend on n, so the samples at consecutive grid points share
their leading rows and the grid points are paired. Grid points and
replicates run concurrently on threads; each returns its measurements,
which are turned into records in grid order.
"""

import dataclasses
import logging
import time
from typing import Any, Callable, Dict, List, Mapping, NamedTuple, Sequence, Tuple

import numpy as np

from rfcheck.datagen.dataset import Dataset
from rfcheck.datagen.sample import sample, sample_features
from rfcheck.errors import ConfigurationError
from rfcheck.experiments.metrics import MetricsRecord
from rfcheck.experiments.schedule import GridPoint
from rfcheck.forest.forest import Forest, ForestParams, fit
from rfcheck.oracle.model import AdditiveModel
from rfcheck.streams import Stream, derive_seed


@dataclasses.dataclass(frozen=True)
class Replicate:
    index: int
    data_seed: int
    forest_seed: int
    query_seed: int


def replicate_seeds(seed: int, replicates: int) -> List[Replicate]:
    if replicates < 1:
        raise ConfigurationError(f"replicates must be at least 1: {replicates}")
    return [
        Replicate(
            index=r,
            data_seed=derive_seed(seed, Stream.REPLICATE, r),
            forest_seed=derive_seed(seed, Stream.TREE, r),
            query_seed=derive_seed(seed, Stream.QUERY, r),
        )
        for r in range(replicates)
    ]


class Measurement(NamedTuple):
    value: float
    stderr: float = 0.0


@dataclasses.dataclass(frozen=True)
class GridResult:
    point: GridPoint
    replicate: Replicate
    measurements: Dict[str, Measurement]
    wall_time: float


Evaluate = Callable[[GridPoint, Replicate], Dict[str, Measurement]]


def _timed(evaluate: Evaluate, point: GridPoint, replicate: Replicate) -> GridResult:
    start = time.perf_counter()
    measurements = evaluate(point, replicate)
    wall_time = time.perf_counter() - start
    logging.debug(
        f"n={point.n} replicate {replicate.index} finished in {wall_time:.2f}s"
    )
    return GridResult(point, replicate, measurements, wall_time)


def run_grid(
    evaluate: Evaluate,
    points: Sequence[GridPoint],
    replicates: Sequence[Replicate],
    threads: int = 1,
) -> List[GridResult]:
    """
    Call evaluate(point, replicate) for every grid point and replicate,
    on `threads` threads. Results come back in (point, replicate) order
    whatever the thread count.
    """
    from joblib import Parallel, delayed

    if threads < 1:
        raise ConfigurationError(f"threads must be at least 1: {threads}")
    jobs = [(point, replicate) for point in points for replicate in replicates]
    return Parallel(n_jobs=threads, prefer="threads")(
        delayed(_timed)(evaluate, point, replicate) for point, replicate in jobs
    )


def mean_and_stderr(values: Sequence[float]) -> Tuple[float, float]:
    """
    Mean of the finite values and its standard error, zero for a single
    value. NaN values are skipped; with none left the mean is NaN.
    """
    values = np.asarray(values, dtype=float)
    values = values[~np.isnan(values)]
    if values.size == 0:
        return float("nan"), 0.0
    if values.size == 1:
        return float(values[0]), 0.0
    return float(values.mean()), float(values.std(ddof=1) / np.sqrt(values.size))


def build_records(
    experiment: str,
    results: Sequence[GridResult],
    params_for: Callable[[GridPoint], Mapping[str, Any]],
) -> List[MetricsRecord]:
    """
    One record per (n, replicate, metric) and one aggregate record per
    (n, metric), whose value is the mean over replicates and whose standard
    error is the Monte Carlo standard error of that mean. With a single
    replicate the aggregate keeps the replicate's own standard error.
    """
    records = []
    by_point: Dict[int, List[GridResult]] = {}
    for result in results:
        by_point.setdefault(result.point.n, []).append(result)
    for n, group in by_point.items():
        params = dict(params_for(group[0].point))
        count = len(group)
        for result in group:
            for metric, measurement in result.measurements.items():
                records.append(
                    MetricsRecord(
                        experiment=experiment,
                        n=n,
                        metric=metric,
                        value=measurement.value,
                        stderr=measurement.stderr,
                        replicates=1,
                        replicate=result.replicate.index,
                        params=params,
                        wall_time=result.wall_time,
                    )
                )
        for metric in group[0].measurements:
            values = [result.measurements[metric].value for result in group]
            value, stderr = mean_and_stderr(values)
            if count == 1:
                stderr = group[0].measurements[metric].stderr
            records.append(
                MetricsRecord(
                    experiment=experiment,
                    n=n,
                    metric=metric,
                    value=value,
                    stderr=stderr,
                    replicates=count,
                    params=params,
                    wall_time=sum(result.wall_time for result in group),
                )
            )
    return records


def forest_params_for(point: GridPoint, trees: int, mtry: int) -> Dict[str, int]:
    return {
        "trees": trees,
        "mtry": mtry,
        "subsample_size": point.subsample_size,
        "leaves": point.leaves,
    }


def fit_replicate(
    model: AdditiveModel,
    point: GridPoint,
    replicate: Replicate,
    trees: int,
    mtry: int,
) -> Tuple[Dataset, Forest]:
    """Sample the replicate's training set at size n and fit its forest."""
    dataset = sample(model, point.n, replicate.data_seed)
    params = ForestParams(
        trees=trees,
        mtry=mtry,
        subsample_size=point.subsample_size,
        leaves=point.leaves,
        seed=replicate.forest_seed,
    )
    return dataset, fit(dataset, params, threads=1)


def query_points(model: AdditiveModel, count: int, replicate: Replicate) -> np.ndarray:
    """Fresh uniform query points of a replicate, shared by every n."""
    return sample_features(model.p, count, replicate.query_seed, stream=Stream.QUERY)


def check_invariant(condition: bool, message: str) -> bool:
    """
    Log a violated runtime invariant at ERROR level, so the command exits
    with status 3 once the run completes.
    """
    if not condition:
        logging.error(f"invariant violated: {message}")
    return bool(condition)


def check_mtry(mtry, p: int) -> int:
    """Experiments default to mtry = p."""
    mtry = p if mtry is None else int(mtry)
    if not 1 <= mtry <= p:
        raise ConfigurationError(f"mtry must lie in 1..{p}: {mtry}")
    return mtry


def check_counts(**counts: int) -> None:
    for name, value in counts.items():
        if isinstance(value, bool) or int(value) != value or value < 1:
            raise ConfigurationError(f"{name} must be a positive integer: {value!r}")
