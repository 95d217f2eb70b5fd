"""Stagewise reference boosters: discrete AdaBoost and two-class L2Boost."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .data_io import Dataset
from .engine import Ensemble
from .stumps import StumpOracle

LEARNERS = ("adaboost", "l2boost")

COMPLETED = "completed"
PERFECT_STUMP = "perfect_stump"
NO_EDGE = "no_edge"
STATIONARY = "stationary"


@dataclass(frozen=True)
class BaselineConfig:
    n_rounds: int = 1000
    learner: str = "adaboost"

    def __post_init__(self):
        if int(self.n_rounds) != self.n_rounds or self.n_rounds < 1:
            raise ValueError(f"n_rounds must be a positive integer, got {self.n_rounds}")
        if self.learner not in LEARNERS:
            raise ValueError(f"unknown learner {self.learner!r}; expected one of {LEARNERS}")


@dataclass
class BaselineResult:
    """Round-by-round history of a stagewise run.

    ``rounds`` holds ``(stump, step)`` pairs in the order they were fitted, so
    any prefix is itself the model that training would have returned after
    that many rounds.
    """

    learner: str
    rounds: list
    stop_reason: str = COMPLETED
    history: dict = field(default_factory=dict)

    @property
    def ensemble(self) -> Ensemble:
        return Ensemble.from_rounds(self.rounds)

    def prefix(self, t: int) -> Ensemble:
        if not 1 <= t <= len(self.rounds):
            raise ValueError(f"prefix length {t} outside 1..{len(self.rounds)}")
        return Ensemble.from_rounds(self.rounds[:t])

    def staged_decision(self, X) -> np.ndarray:
        """Decision values after each round, shape ``(n_rounds_run, n_samples)``."""
        X = np.asarray(X, dtype=np.float64)
        cache: dict = {}
        out = np.empty((len(self.rounds), X.shape[0]))
        F = np.zeros(X.shape[0])
        for t, (stump, step) in enumerate(self.rounds):
            if stump not in cache:
                cache[stump] = stump.predict_many(X)
            F = F + step * cache[stump]
            out[t] = F
        return out

    def staged_errors(self, data: Dataset) -> np.ndarray:
        F = self.staged_decision(data.features)
        pred = np.where(F >= 0, 1, -1)
        return np.mean(pred != data.labels[None, :], axis=1)


def adaboost_train(data: Dataset, n_rounds: int) -> BaselineResult:
    """Discrete AdaBoost over decision stumps.

    Stops early when the best stump is perfect under the current distribution
    (that stump is kept with weight 1) or has weighted error >= 1/2.
    """
    BaselineConfig(n_rounds, "adaboost")
    data.check_trainable()
    X, y = data.features, data.labels
    M = data.n_examples
    oracle = StumpOracle(data)
    D = np.full(M, 1.0 / M)
    rounds = []
    errors = []
    reason = COMPLETED
    for _ in range(n_rounds):
        stump, _edge = oracle.best(D)
        pred = stump.predict_many(X)
        err = math.fsum(D[pred != y])
        if err <= 0.0:
            rounds.append((stump, 1.0))
            errors.append(0.0)
            reason = PERFECT_STUMP
            break
        if err >= 0.5:
            reason = NO_EDGE
            break
        alpha = 0.5 * math.log((1.0 - err) / err)
        rounds.append((stump, alpha))
        errors.append(err)
        D = D * np.exp(-alpha * y * pred)
        D /= D.sum()
    if not rounds:
        raise ValueError("AdaBoost found no stump with weighted error below 1/2")
    return BaselineResult("adaboost", rounds, reason, {"weighted_error": errors})


def l2boost_train(data: Dataset, n_rounds: int) -> BaselineResult:
    """Stagewise least squares on the margins with nonnegative steps.

    Each round fits the stump and step ``beta >= 0`` that most reduce
    ``sum_i (1 - y_i F(x_i))^2``. For a +-1 stump the best step is
    ``sum_i r_i y_i h(x_i) / M`` with residuals ``r_i = 1 - y_i F(x_i)``, so
    the stump is the one maximizing that edge over both polarities.
    """
    BaselineConfig(n_rounds, "l2boost")
    data.check_trainable()
    X, y = data.features, data.labels.astype(np.float64)
    M = data.n_examples
    oracle = StumpOracle(data)
    margins = np.zeros(M)
    rounds = []
    losses = []
    reason = COMPLETED
    for _ in range(n_rounds):
        residual = 1.0 - margins
        stump, edge = oracle.best(residual)
        beta = edge / M
        if beta <= 0.0:
            reason = STATIONARY
            break
        rounds.append((stump, beta))
        margins = margins + beta * y * stump.predict_many(X)
        losses.append(float(np.sum((1.0 - margins) ** 2)))
    if not rounds:
        raise ValueError("L2Boost made no progress from F = 0")
    return BaselineResult("l2boost", rounds, reason, {"loss": losses})


def train_baseline(data: Dataset, config: BaselineConfig) -> BaselineResult:
    if config.learner == "adaboost":
        return adaboost_train(data, config.n_rounds)
    return l2boost_train(data, config.n_rounds)
