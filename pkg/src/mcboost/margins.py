"""Normalized margins, their moments and cumulative distributions."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .data_io import Dataset
from .engine import Ensemble

DEFAULT_GRID_SIZE = 201


def default_grid(n: int = DEFAULT_GRID_SIZE) -> np.ndarray:
    return np.linspace(-1.0, 1.0, n)


def normalized_margins(ensemble: Ensemble, data: Dataset) -> np.ndarray:
    """``y_i F(x_i) / sum(w)`` for every example."""
    total = ensemble.w.sum()
    if total <= 0:
        raise ValueError("normalized margins are undefined for all-zero weights")
    rho = data.labels * ensemble.decision_function(data.features) / total
    # rounding can push a unanimous vote a hair past +-1
    return np.clip(rho, -1.0, 1.0)


def margin_stats(rho) -> tuple[float, float]:
    """Mean and population variance (divisor M)."""
    rho = np.asarray(rho, dtype=np.float64)
    if rho.size == 0:
        raise ValueError("margin statistics need at least one margin")
    mean = rho.sum() / rho.size
    variance = np.sum((rho - mean) ** 2) / rho.size
    return float(mean), float(variance)


def decomposition_check(rho, E: float) -> tuple[float, float, float]:
    """Mean squared distance to E against variance plus squared bias.

    Both sides are summed directly; returns ``(lhs, rhs, |lhs - rhs|)``.
    """
    rho = np.asarray(rho, dtype=np.float64)
    M = rho.size
    lhs = float(np.sum((rho - E) ** 2) / M)
    mean = rho.sum() / M
    rhs = float(np.sum((rho - mean) ** 2) / M + (mean - E) ** 2)
    return lhs, rhs, abs(lhs - rhs)


def cross_term(rho, E: float) -> float:
    """``sum_i (rho_i - mean)(mean - E)``; zero up to rounding."""
    rho = np.asarray(rho, dtype=np.float64)
    mean = rho.sum() / rho.size
    return float(np.sum((rho - mean) * (mean - E)))


def cumulative_distribution(rho, grid=None) -> np.ndarray:
    """Fraction of margins ``<= theta`` for each threshold in ``grid``."""
    rho = np.sort(np.asarray(rho, dtype=np.float64))
    grid = default_grid() if grid is None else np.asarray(grid, dtype=np.float64)
    if grid.ndim != 1 or np.any(np.diff(grid) < 0):
        raise ValueError("grid must be a 1-D ascending sequence of thresholds")
    return np.searchsorted(rho, grid, side="right") / rho.size


@dataclass
class MarginReport:
    rho: np.ndarray
    mean: float
    variance: float
    grid: np.ndarray
    cdf: np.ndarray

    @classmethod
    def from_margins(cls, rho, grid=None) -> "MarginReport":
        rho = np.asarray(rho, dtype=np.float64)
        grid = default_grid() if grid is None else np.asarray(grid, dtype=np.float64)
        mean, variance = margin_stats(rho)
        return cls(rho, mean, variance, grid, cumulative_distribution(rho, grid))

    @classmethod
    def for_model(cls, ensemble: Ensemble, data: Dataset, grid=None) -> "MarginReport":
        return cls.from_margins(normalized_margins(ensemble, data), grid)

    def write(self, out_dir, prefix: str = "", E: Optional[float] = None) -> dict:
        """Write cdf, raw margin and stats CSVs; returns the paths written."""
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        paths = {
            "cdf": out_dir / f"{prefix}margin_cdf.csv",
            "margins": out_dir / f"{prefix}margins.csv",
            "stats": out_dir / f"{prefix}margin_stats.csv",
        }
        with open(paths["cdf"], "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["threshold", "cumulative_fraction"])
            for theta, frac in zip(self.grid, self.cdf):
                writer.writerow([repr(float(theta)), repr(float(frac))])
        with open(paths["margins"], "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "margin"])
            for i, value in enumerate(self.rho):
                writer.writerow([i, repr(float(value))])
        with open(paths["stats"], "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["mean", "variance", "E"])
            writer.writerow([repr(self.mean), repr(self.variance), "" if E is None else repr(float(E))])
        return paths
