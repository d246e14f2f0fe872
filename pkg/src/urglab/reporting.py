"""Estimate reports and deterministic CSV/JSON emission."""

from __future__ import annotations

import csv
import hashlib
import json
import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Iterable

ESTIMATE_CSV_HEADER = ("quantity", "estimate", "stderr", "trials", "master_seed")


@dataclass(frozen=True)
class EstimateReport:
    """A Monte Carlo estimate with its sampling noise and seed provenance."""

    quantity: str
    estimate: float
    stderr: float
    trials: int
    master_seed: int

    def csv_row(self) -> tuple[str, str, str, str, str]:
        return (
            self.quantity,
            fmt_float(self.estimate),
            fmt_float(self.stderr),
            str(self.trials),
            str(self.master_seed),
        )


def mean_and_stderr(values) -> tuple[float, float]:
    """Sample mean and its standard error (0 stderr for a single value)."""
    import numpy as np

    arr = np.asarray(values, dtype=float)
    if arr.size == 0:
        raise ValueError("need at least one value")
    mean = float(arr.mean())
    if arr.size == 1:
        return mean, 0.0
    return mean, float(arr.std(ddof=1) / math.sqrt(arr.size))


def binomial_stderr(p_hat: float, n: int) -> float:
    return math.sqrt(max(p_hat * (1.0 - p_hat), 0.0) / n)


def fmt_float(x: float) -> str:
    """Shortest round-trip decimal form; stable across reruns."""
    return repr(float(x))


def write_estimates_csv(path: Path, reports: Iterable[EstimateReport]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(ESTIMATE_CSV_HEADER)
        for report in reports:
            writer.writerow(report.csv_row())


def write_json(path: Path, payload) -> None:
    if hasattr(payload, "__dataclass_fields__"):
        payload = asdict(payload)
    with open(path, "w") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")


def sha256_of(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()
