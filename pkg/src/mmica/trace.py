"""Metric records and run traces shared by solvers, metrics, and the runner."""

import math
from dataclasses import dataclass, field

__all__ = ["MetricRecord", "RunTrace", "TRACE_COLUMNS"]

# Column order of trace CSV files; NaN is spelled "nan".
TRACE_COLUMNS = (
    "algo",
    "seed",
    "epoch",
    "wall_time_s",
    "train_loss",
    "surrogate_loss",
    "test_loss",
    "grad_norm",
    "amari",
)


@dataclass
class MetricRecord:
    epoch: int = 0
    wall_time_s: float = 0.0
    train_loss: float = math.nan
    surrogate_loss: float = math.nan  # NaN for non-MM algorithms
    test_loss: float = math.nan
    grad_norm: float = math.nan
    amari: float = math.nan  # NaN if no ground-truth mixing


@dataclass
class RunTrace:
    """Ordered metric records plus run metadata."""

    algo: str = ""
    seed: int = 0
    config_hash: str = ""
    git_describe: str = ""
    records: list = field(default_factory=list)

    def append(self, record):
        if self.records and record.epoch <= self.records[-1].epoch:
            raise ValueError("trace epochs must be strictly increasing")
        self.records.append(record)

    def column(self, name):
        """All values of one metric column, in epoch order."""
        return [getattr(r, name) for r in self.records]

    def __len__(self):
        return len(self.records)
