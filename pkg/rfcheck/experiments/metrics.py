"""
Metrics records and the sink that collects them during an experiment run.

A run directory holds:

- `metrics.tsv`: one row per record. Rows with a replicate index hold one
  replicate's value; rows with replicate `all` aggregate the replicates of a
  grid point (mean and Monte Carlo standard error).
- `summary.yaml`: the run's parameters and the aggregate values per n.
- `<metric>.plot.tsv`: columns n, value, stderr of each aggregate metric.
- `timings.tsv`: wall time per record. Wall times are kept out of the other
  files, so rerunning an experiment reproduces them byte for byte.
"""

import csv
import dataclasses
import io
import json
import logging
import math
import pathlib
import threading
from typing import Any, Dict, Iterable, List, Mapping, Optional

from rfcheck.errors import ValidationError
from rfcheck.util import PathLike, atomic_writer

metrics_fields = [
    "experiment",
    "n",
    "replicate",
    "metric",
    "value",
    "stderr",
    "replicates",
    "params",
]


def format_value(value: float) -> str:
    return format(float(value), ".17g")


@dataclasses.dataclass(frozen=True)
class MetricsRecord:
    experiment: str
    n: int
    metric: str
    value: float
    stderr: float = 0.0
    """Monte Carlo standard error of value"""
    replicates: int = 1
    replicate: Optional[int] = None
    """Replicate index, or None for a value aggregated over replicates"""
    params: Mapping[str, Any] = dataclasses.field(default_factory=dict)
    wall_time: float = 0.0
    """Seconds spent computing the record. Not part of metrics.tsv."""

    def __post_init__(self):
        if not self.stderr >= 0:
            raise ValidationError(
                f"{self.experiment} {self.metric} at n={self.n}: "
                f"standard error must be nonnegative, got {self.stderr}"
            )
        if self.replicates < 1:
            raise ValidationError(
                f"{self.experiment} {self.metric} at n={self.n}: "
                f"replicate count must be at least 1, got {self.replicates}"
            )

    @property
    def is_aggregate(self) -> bool:
        return self.replicate is None

    def to_row(self) -> Dict[str, str]:
        return {
            "experiment": self.experiment,
            "n": str(self.n),
            "replicate": "all" if self.replicate is None else str(self.replicate),
            "metric": self.metric,
            "value": format_value(self.value),
            "stderr": format_value(self.stderr),
            "replicates": str(self.replicates),
            "params": json.dumps(dict(self.params), sort_keys=True, separators=(",", ":")),
        }


def _sort_key(record: MetricsRecord):
    replicate = math.inf if record.replicate is None else record.replicate
    return record.n, replicate


class MetricsSink:
    """
    Collects records from concurrently running grid points. Appends are
    serialized by a lock; files are written in (n, replicate) order, with
    metrics in the order they were first appended.
    """

    def __init__(self, experiment: str, params: Mapping[str, Any] = None):
        self.experiment = experiment
        self.params = dict(params or {})
        self._records: List[MetricsRecord] = []
        self._lock = threading.Lock()

    def append(self, record: MetricsRecord) -> None:
        with self._lock:
            self._records.append(record)

    def extend(self, records: Iterable[MetricsRecord]) -> None:
        records = list(records)
        with self._lock:
            self._records.extend(records)

    @property
    def records(self) -> List[MetricsRecord]:
        with self._lock:
            records = list(self._records)
        metric_order = {}
        for record in records:
            metric_order.setdefault(record.metric, len(metric_order))
        return sorted(records, key=lambda r: (*_sort_key(r), metric_order[r.metric]))

    def aggregates(self) -> List[MetricsRecord]:
        return [record for record in self.records if record.is_aggregate]

    @property
    def metrics_tsv(self) -> str:
        output = io.StringIO()
        writer = csv.DictWriter(
            output, fieldnames=metrics_fields, delimiter="\t", lineterminator="\n"
        )
        writer.writeheader()
        for record in self.records:
            writer.writerow(record.to_row())
        return output.getvalue()

    @property
    def timings_tsv(self) -> str:
        output = io.StringIO()
        writer = csv.writer(output, delimiter="\t", lineterminator="\n")
        writer.writerow(["experiment", "n", "replicate", "metric", "wall_time"])
        for record in self.records:
            row = record.to_row()
            fields = [row["experiment"], row["n"], row["replicate"], row["metric"]]
            writer.writerow(fields + [f"{record.wall_time:.3f}"])
        return output.getvalue()

    def plot_tsvs(self) -> Dict[str, str]:
        """Plot-data text per aggregate metric, keyed by metric name."""
        tables: Dict[str, List[str]] = {}
        for record in self.aggregates():
            lines = tables.setdefault(record.metric, ["n\tvalue\tstderr"])
            lines.append(
                f"{record.n}\t{format_value(record.value)}\t{format_value(record.stderr)}"
            )
        return {metric: "\n".join(lines) + "\n" for metric, lines in tables.items()}

    @property
    def summary(self) -> dict:
        grid: Dict[int, Dict[str, dict]] = {}
        for record in self.aggregates():
            grid.setdefault(record.n, {})[record.metric] = {
                "value": float(record.value),
                "stderr": float(record.stderr),
                "replicates": record.replicates,
            }
        return {
            "experiment": self.experiment,
            "params": self.params,
            "grid": grid,
        }

    @property
    def summary_yaml(self) -> str:
        from rfcheck.util import get_configured_yaml

        yaml = get_configured_yaml()
        return yaml.dump(
            self.summary,
            default_flow_style=False,
            width=float("inf"),
            allow_unicode=True,
            sort_keys=False,
        )

    def write(self, directory: PathLike) -> pathlib.Path:
        """
        Write metrics.tsv, summary.yaml, timings.tsv and one plot-data file
        per aggregate metric to `directory`. Return the metrics.tsv path.
        """
        directory = pathlib.Path(directory)
        outputs = {
            "metrics.tsv": self.metrics_tsv,
            "summary.yaml": self.summary_yaml,
            "timings.tsv": self.timings_tsv,
        }
        for metric, text in self.plot_tsvs().items():
            outputs[f"{metric}.plot.tsv"] = text
        for name, text in outputs.items():
            with atomic_writer(directory / name) as write_file:
                write_file.write(text)
        logging.info(
            f"wrote {len(self._records)} {self.experiment} records to {directory}"
        )
        return directory / "metrics.tsv"
