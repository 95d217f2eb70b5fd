"""Validation-based choice of E and of boosting rounds; Wilcoxon signed-rank z."""

from __future__ import annotations

import csv
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from typing import NamedTuple, Optional

import numpy as np

from . import engine
from .baselines import BaselineConfig, train_baseline
from .data_io import Dataset

log = logging.getLogger(__name__)

DEFAULT_E_GRID = tuple(round(0.05 * k, 2) for k in range(1, 20))


@dataclass(frozen=True)
class EGrid:
    values: tuple = DEFAULT_E_GRID

    def __post_init__(self):
        values = tuple(float(v) for v in self.values)
        if not values:
            raise ValueError("E grid is empty")
        if any(not 0.0 < v < 1.0 for v in values):
            raise ValueError("every E must lie strictly inside (0, 1)")
        if any(b <= a for a, b in zip(values, values[1:])):
            raise ValueError("E grid must be strictly increasing")
        object.__setattr__(self, "values", values)

    @classmethod
    def from_values(cls, values) -> "EGrid":
        """Sorts and de-duplicates before validating."""
        return cls(tuple(sorted(set(float(v) for v in values))))


@dataclass
class CvResult:
    chosen: float
    table: list
    chosen_rule: str
    failed: list = field(default_factory=list)
    models: dict = field(default_factory=dict)

    def write(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["candidate", "validation_error", "chosen"])
            for candidate, err in self.table:
                writer.writerow([candidate, repr(float(err)), int(candidate == self.chosen)])


def _fit_and_score(args):
    train, valid, config = args
    try:
        result = engine.train(train, config)
    except (engine.TrainingError, ValueError) as exc:
        return config.E, None, str(exc)
    return config.E, result, result.ensemble.error_rate(valid)


def select_E(
    train: Dataset,
    valid: Dataset,
    grid: Optional[EGrid] = None,
    template: Optional[engine.TrainConfig] = None,
    n_jobs: int = 1,
) -> CvResult:
    """Train one model per E and keep the largest E with the lowest validation error."""
    grid = EGrid() if grid is None else grid
    template = engine.TrainConfig() if template is None else template
    jobs = [(train, valid, replace(template, E=E)) for E in sorted(grid.values)]
    if n_jobs > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            outcomes = list(pool.map(_fit_and_score, jobs))
    else:
        outcomes = [_fit_and_score(job) for job in jobs]

    table, failed, models = [], [], {}
    for E, result, score in outcomes:
        if result is None:
            log.warning("E=%g failed: %s", E, score)
            failed.append((E, score))
            continue
        table.append((E, score))
        models[E] = result
    if not table:
        raise engine.TrainingError("every E candidate failed to train")
    best = min(err for _, err in table)
    chosen = max(E for E, err in table if err == best)
    return CvResult(chosen, table, "largest E attaining the minimum validation error", failed, models)


def select_rounds(
    train: Dataset,
    valid: Dataset,
    max_rounds: int,
    learner: str = "adaboost",
) -> CvResult:
    """One stagewise run; every prefix length is scored on ``valid``."""
    config = BaselineConfig(max_rounds, learner)
    result = train_baseline(train, config)
    errors = result.staged_errors(valid)
    table = [(t + 1, float(e)) for t, e in enumerate(errors)]
    best = errors.min()
    chosen = int(np.flatnonzero(errors == best)[0]) + 1
    return CvResult(
        chosen,
        table,
        "smallest round count attaining the minimum validation error",
        models={"run": result},
    )


class WilcoxonResult(NamedTuple):
    z: float
    n_effective: int
    W: float


def average_ranks(values) -> np.ndarray:
    """Ranks starting at 1; tied values share the mean of their positions."""
    values = np.asarray(values, dtype=np.float64)
    order = np.argsort(values, kind="stable")
    ranks = np.empty(values.size)
    sorted_vals = values[order]
    start = 0
    while start < values.size:
        stop = start + 1
        while stop < values.size and sorted_vals[stop] == sorted_vals[start]:
            stop += 1
        ranks[order[start:stop]] = (start + 1 + stop) / 2.0
        start = stop
    return ranks


def wilcoxon_z(errors_a, errors_b, decimals: int = 10) -> WilcoxonResult:
    """One-tailed signed-rank z for "method a has lower error than method b".

    Differences ``b - a`` are rounded to ``decimals`` places so values copied
    from a printed table tie exactly, zeros are dropped, and ``W`` sums the
    ranks of ``|d|`` over pairs where ``b > a``. The normal approximation uses
    no tie correction.
    """
    a = np.asarray(errors_a, dtype=np.float64)
    b = np.asarray(errors_b, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 1:
        raise ValueError("error vectors must be 1-D and of equal length")
    if a.size < 5:
        raise ValueError("need at least 5 paired results")
    d = np.round(b - a, decimals)
    d = d[d != 0]
    n = d.size
    if n < 5:
        raise ValueError(f"only {n} nonzero differences; the z approximation needs at least 5")
    ranks = average_ranks(np.abs(d))
    W = float(ranks[d > 0].sum())
    z = (W - n * (n + 1) / 4.0) / math.sqrt(n * (n + 1) * (2 * n + 1) / 24.0)
    return WilcoxonResult(float(z), int(n), W)


def write_wilcoxon(result: WilcoxonResult, path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["n_effective", "W", "z"])
        writer.writerow([result.n_effective, repr(result.W), repr(result.z)])
