"""Decision stumps and the exact edge-maximizing oracle."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .data_io import Dataset


@dataclass(frozen=True, order=True)
class Stump:
    """``polarity`` if ``x[feature] >= threshold`` else ``-polarity``."""

    feature: int
    threshold: float
    polarity: int = 1

    def __post_init__(self):
        if self.polarity not in (1, -1):
            raise ValueError(f"polarity must be +1 or -1, got {self.polarity}")
        if self.feature < 0:
            raise ValueError(f"feature index must be non-negative, got {self.feature}")
        if not math.isfinite(self.threshold):
            raise ValueError("threshold must be finite")

    def predict(self, x) -> int:
        x = np.asarray(x, dtype=np.float64)
        if x.ndim != 1 or self.feature >= x.shape[0]:
            raise IndexError(f"feature {self.feature} out of bounds for input of shape {x.shape}")
        return self.polarity if x[self.feature] >= self.threshold else -self.polarity

    def predict_many(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or self.feature >= X.shape[1]:
            raise IndexError(f"feature {self.feature} out of bounds for input of shape {X.shape}")
        out = np.where(X[:, self.feature] >= self.threshold, 1.0, -1.0)
        return out * self.polarity

    def negate(self) -> "Stump":
        return Stump(self.feature, self.threshold, -self.polarity)

    def key(self) -> tuple:
        return (self.feature, self.threshold, self.polarity)


def candidate_thresholds(values) -> np.ndarray:
    """Thresholds realizing every distinct split of ``values``.

    One threshold below the minimum (the constant rule) followed by the
    midpoints of consecutive distinct sorted values.
    """
    v = np.unique(np.asarray(values, dtype=np.float64))
    if v.size == 0:
        return np.empty(0)
    below = v[0] - 1.0
    if below >= v[0]:
        below = np.nextafter(v[0], -np.inf)
    mids = (v[:-1] + v[1:]) / 2
    # adjacent floats: a midpoint that rounds down onto the lower value would misplace it
    mids = np.where(mids > v[:-1], mids, v[1:])
    return np.concatenate(([below], mids))


def _check_weights(data: Dataset, u) -> np.ndarray:
    u = np.asarray(u, dtype=np.float64)
    if u.shape != (data.n_examples,):
        raise ValueError(f"weights of shape {u.shape} do not match {data.n_examples} examples")
    if not np.all(np.isfinite(u)):
        raise ValueError("weights must be finite")
    return u


def weighted_edge(stump: Stump, data: Dataset, u) -> float:
    """Correctly rounded sum of ``u_i * y_i * h(x_i)``."""
    u = _check_weights(data, u)
    return math.fsum(u * data.labels * stump.predict_many(data.features))


class StumpOracle:
    """Strong oracle over all axis-aligned stumps for one dataset.

    Sorting is done once; each query is a prefix sum per feature. Candidates
    whose fast-path edge is within rounding distance of the maximum are
    re-scored with :func:`weighted_edge`, then ties are broken by feature,
    threshold and polarity (+1 first).
    """

    def __init__(self, data: Dataset):
        self.data = data
        X = data.features
        self._order = np.argsort(X, axis=0, kind="stable").T  # (d, M)
        self._thresholds = []
        self._positions = []
        for f in range(data.n_features):
            sorted_vals = X[self._order[f], f]
            thr = candidate_thresholds(sorted_vals)
            # number of examples strictly below each threshold
            pos = np.searchsorted(sorted_vals, thr, side="left")
            self._thresholds.append(thr)
            self._positions.append(pos)
        self._feature_of = np.concatenate(
            [np.full(len(t), f) for f, t in enumerate(self._thresholds)]
        )
        self._flat_thr = np.concatenate(self._thresholds)
        self._flat_pos = np.concatenate(self._positions)
        self.n_candidates = 2 * self._flat_thr.size

    def edges(self, u) -> np.ndarray:
        """Fast-path edges of all (feature, threshold) pairs for polarity +1."""
        u = _check_weights(self.data, u)
        s = u * self.data.labels
        prefix = np.zeros((self.data.n_features, self.data.n_examples + 1))
        np.cumsum(s[self._order], axis=1, out=prefix[:, 1:])
        total = prefix[:, -1]
        below = prefix[self._feature_of, self._flat_pos]
        return total[self._feature_of] - 2.0 * below

    def best(self, u) -> tuple[Stump, float]:
        u = _check_weights(self.data, u)
        plus = self.edges(u)
        both = np.empty(2 * plus.size)
        both[0::2] = plus
        both[1::2] = -plus
        top = both.max()
        slack = 1e-9 * (np.abs(u).sum() + 1e-300)
        best_stump, best_edge = None, -math.inf
        for k in np.flatnonzero(both >= top - slack):
            j = k // 2
            stump = Stump(int(self._feature_of[j]), float(self._flat_thr[j]), 1 if k % 2 == 0 else -1)
            edge = weighted_edge(stump, self.data, u)
            if edge > best_edge:
                best_stump, best_edge = stump, edge
        return best_stump, best_edge


def best_stump(data: Dataset, u) -> tuple[Stump, float]:
    """Stump maximizing the signed-weight edge, with its exact edge."""
    return StumpOracle(data).best(u)


def enumerate_stumps(data: Dataset):
    """Every (feature, threshold, polarity) stump in tie-break order."""
    for f in range(data.n_features):
        for thr in candidate_thresholds(data.features[:, f]):
            yield Stump(f, float(thr), 1)
            yield Stump(f, float(thr), -1)
