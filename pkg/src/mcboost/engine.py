"""Totally corrective MCBoost training by column generation."""

from __future__ import annotations

import csv
import logging
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .data_io import Dataset
from .qp_master import RestrictedMaster, SolverError, solve_restricted
from .stumps import Stump, StumpOracle

log = logging.getLogger(__name__)

PRUNE_BELOW = 1e-12

EDGE_BELOW_R_PLUS_EPS = "edge_below_r_plus_eps"
DUPLICATE_COLUMN = "duplicate_column"
N_MAX_REACHED = "n_max_reached"


class TrainingError(RuntimeError):
    def __init__(self, message, iteration=None):
        super().__init__(message)
        self.iteration = iteration


@dataclass(frozen=True)
class Ensemble:
    """Weighted vote ``F(x) = sum_j w_j h_j(x)`` with ``w >= 0``."""

    stumps: tuple
    w: np.ndarray
    normalized: bool = True

    def __post_init__(self):
        stumps = tuple(self.stumps)
        w = np.array(self.w, dtype=np.float64, copy=True).reshape(-1)
        if len(stumps) == 0 or len(stumps) != w.size:
            raise ValueError("an ensemble needs one weight per stump and at least one stump")
        if np.any(w < 0) or not np.all(np.isfinite(w)):
            raise ValueError("ensemble weights must be finite and nonnegative")
        if self.normalized and abs(w.sum() - 1.0) > 1e-10:
            raise ValueError(f"normalized ensemble weights sum to {w.sum()!r}")
        w.setflags(write=False)
        object.__setattr__(self, "stumps", stumps)
        object.__setattr__(self, "w", w)

    def __len__(self):
        return len(self.stumps)

    @classmethod
    def from_rounds(cls, rounds: Sequence[tuple], normalized: bool = False) -> "Ensemble":
        """Merge repeated stumps of a stagewise run into one weight each."""
        weights: dict = {}
        order = []
        for stump, step in rounds:
            if stump not in weights:
                weights[stump] = 0.0
                order.append(stump)
            weights[stump] += step
        ens = cls(tuple(order), np.array([weights[s] for s in order]), normalized=False)
        return ens.normalize() if normalized else ens

    def normalize(self) -> "Ensemble":
        total = self.w.sum()
        if total <= 0:
            raise ValueError("cannot normalize an ensemble with all-zero weights")
        return Ensemble(self.stumps, self.w / total, normalized=True)

    def stump_outputs(self, X) -> np.ndarray:
        """Matrix of base classifier outputs, one column per stump."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        return np.column_stack([s.predict_many(X) for s in self.stumps])

    def decision_function(self, X) -> np.ndarray:
        return self.stump_outputs(X) @ self.w

    def decision_value(self, x) -> float:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1:
            raise ValueError("decision_value takes a single feature vector")
        return float(self.decision_function(x[None, :])[0])

    def predict(self, X) -> np.ndarray:
        """Sign of the decision value; an exact zero votes +1."""
        return np.where(self.decision_function(X) >= 0, 1, -1)

    def predict_one(self, x) -> int:
        return 1 if self.decision_value(x) >= 0 else -1

    def error_rate(self, data: Dataset) -> float:
        return float(np.mean(self.predict(data.features) != data.labels))


def decision_value(ensemble: Ensemble, x) -> float:
    return ensemble.decision_value(x)


def predict(ensemble: Ensemble, x) -> int:
    return ensemble.predict_one(x)


def error_rate(ensemble: Ensemble, data: Dataset) -> float:
    return ensemble.error_rate(data)


@dataclass(frozen=True)
class TrainConfig:
    E: float = 0.3
    epsilon: float = 1e-5
    n_max: int = 1000
    trace: bool = False

    def __post_init__(self):
        if not 0.0 < self.E < 1.0:
            raise ValueError(f"E must lie strictly inside (0, 1), got {self.E}")
        if not self.epsilon > 0:
            raise ValueError(f"epsilon must be positive, got {self.epsilon}")
        if int(self.n_max) != self.n_max or self.n_max < 1:
            raise ValueError(f"n_max must be a positive integer, got {self.n_max}")


@dataclass
class TraceRecord:
    iteration: int
    feature: int
    threshold: float
    polarity: int
    edge: float
    r: float
    primal_objective: float
    dual_objective: float
    gap: float
    active: int
    train_error: float
    monitor_error: float = math.nan


TRACE_FIELDS = [f for f in TraceRecord.__dataclass_fields__]


@dataclass
class TrainResult:
    ensemble: Ensemble
    iterations: int
    termination_reason: str
    final_edge: float
    final_r: float
    oracle_calls: int
    objectives: list = field(default_factory=list)
    trace: Optional[list] = None


def _margin_error(rho: np.ndarray, y: np.ndarray) -> float:
    # decision value 0 predicts +1, so a zero margin is an error only on -1 examples
    wrong = (rho < 0) | ((rho == 0) & (y == -1))
    return float(np.mean(wrong))


def train(data: Dataset, config: TrainConfig, monitor: Optional[Dataset] = None) -> TrainResult:
    """Column generation with an exact stump oracle.

    Starting from uniform example weights, each round asks the oracle for the
    stump with the largest edge ``sum_i u_i y_i h(x_i)``. From the second round
    on, training stops once that edge is below ``r + epsilon``. Otherwise the
    stump's margin column is added and the restricted master problem is
    re-solved over all columns, which updates ``(u, r)``.

    ``monitor``, when given with ``config.trace``, adds a held-out error to
    every trace record.
    """
    data.check_trainable()
    X, y = data.features, data.labels.astype(np.float64)
    M = data.n_examples
    oracle = StumpOracle(data)

    u = np.full(M, 1.0 / M)
    r = math.inf  # never read at t = 1
    stumps: list[Stump] = []
    seen = set()
    A = np.empty((M, 0))
    gram = np.empty((0, 0))
    w = None
    objectives = []
    trace = [] if config.trace else None
    monitor_outputs = None
    if monitor is not None and trace is not None:
        monitor_outputs = np.empty((monitor.n_examples, 0))

    reason = N_MAX_REACHED
    edge = math.nan
    calls = 0
    for t in range(1, config.n_max + 1):
        stump, edge = oracle.best(u)
        calls += 1
        if t > 1 and edge < r + config.epsilon:
            reason = EDGE_BELOW_R_PLUS_EPS
            break
        if stump in seen:
            reason = DUPLICATE_COLUMN
            break
        seen.add(stump)
        stumps.append(stump)

        column = y * stump.predict_many(X)
        cross = A.T @ column
        T = len(stumps)
        new_gram = np.empty((T, T))
        new_gram[:-1, :-1] = gram
        new_gram[:-1, -1] = cross
        new_gram[-1, :-1] = cross
        new_gram[-1, -1] = column @ column
        gram = new_gram
        A = np.column_stack((A, column))
        warm = None if w is None else np.append(w, 0.0)
        try:
            sol = solve_restricted(RestrictedMaster(A, config.E), warm_start=warm, gram=gram)
        except SolverError as exc:
            raise TrainingError(f"master solve failed at iteration {t}: {exc}", iteration=t) from exc
        w, u, r = sol.w, sol.u, sol.r
        objectives.append(sol.primal_objective)

        if trace is not None:
            record = TraceRecord(
                iteration=t,
                feature=stump.feature,
                threshold=stump.threshold,
                polarity=stump.polarity,
                edge=edge,
                r=r,
                primal_objective=sol.primal_objective,
                dual_objective=sol.dual_objective,
                gap=sol.gap,
                active=int(sol.active.size),
                train_error=_margin_error(sol.rho, data.labels),
            )
            if monitor_outputs is not None:
                monitor_outputs = np.column_stack(
                    (monitor_outputs, stump.predict_many(monitor.features))
                )
                pred = np.where(monitor_outputs @ w >= 0, 1, -1)
                record.monitor_error = float(np.mean(pred != monitor.labels))
            trace.append(record)

    keep = w > PRUNE_BELOW
    kept = np.asarray(w)[keep]
    ensemble = Ensemble(
        tuple(s for s, k in zip(stumps, keep) if k), kept / kept.sum(), normalized=True
    )
    log.debug("trained %d columns, stop reason %s", len(stumps), reason)
    return TrainResult(
        ensemble=ensemble,
        iterations=len(stumps),
        termination_reason=reason,
        final_edge=float(edge),
        final_r=float(r),
        oracle_calls=calls,
        objectives=objectives,
        trace=trace,
    )


def write_trace(trace: Sequence[TraceRecord], path) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(TRACE_FIELDS)
        for rec in trace:
            writer.writerow([repr(getattr(rec, f)) if isinstance(getattr(rec, f), float) else getattr(rec, f) for f in TRACE_FIELDS])
