"""Dataset loading, validation and seeded train/valid/test splitting."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Sequence, Union

import numpy as np


class DataError(ValueError):
    """Raised for malformed or unusable datasets."""


@dataclass(frozen=True)
class Dataset:
    """Labeled examples with labels in {-1, +1}.

    Arrays are copied and marked read-only on construction so a dataset can be
    shared between concurrent trainers.
    """

    features: np.ndarray
    labels: np.ndarray
    feature_names: Optional[tuple] = None

    def __post_init__(self):
        X = np.array(self.features, dtype=np.float64, copy=True)
        y = np.array(self.labels, copy=True)
        if X.ndim != 2:
            raise DataError(f"features must be 2-D, got shape {X.shape}")
        if y.ndim != 1 or y.shape[0] != X.shape[0]:
            raise DataError("labels must be 1-D with one entry per row of features")
        if not np.all(np.isfinite(X)):
            bad = np.argwhere(~np.isfinite(X))[0]
            raise DataError(f"non-finite feature value at row {bad[0]}, column {bad[1]}")
        if not np.all((y == 1) | (y == -1)):
            raise DataError("invalid label: labels must be -1 or +1")
        y = y.astype(np.int8)
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "labels", y)
        if self.feature_names is not None:
            names = tuple(str(n) for n in self.feature_names)
            if len(names) != X.shape[1]:
                raise DataError("feature_names length does not match feature count")
            object.__setattr__(self, "feature_names", names)

    @property
    def n_examples(self) -> int:
        return self.features.shape[0]

    @property
    def n_features(self) -> int:
        return self.features.shape[1]

    def subset(self, index) -> "Dataset":
        index = np.asarray(index)
        return Dataset(self.features[index], self.labels[index], self.feature_names)

    def check_trainable(self) -> None:
        """Require at least two examples and both classes."""
        if self.n_examples < 2:
            raise DataError("training data needs at least 2 examples")
        if np.all(self.labels == 1) or np.all(self.labels == -1):
            raise DataError("single-class dataset: both labels must be present")


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.6
    valid_fraction: float = 0.2
    test_fraction: float = 0.2
    seed: int = 0
    max_retries: int = field(default=100, compare=False)

    def __post_init__(self):
        fractions = (self.train_fraction, self.valid_fraction, self.test_fraction)
        if any(not 0.0 < f < 1.0 for f in fractions):
            raise DataError(f"split fractions must lie in (0, 1), got {fractions}")
        if abs(math.fsum(fractions) - 1.0) > 1e-12:
            raise DataError(f"split fractions must sum to 1, got {math.fsum(fractions)}")

    def sizes(self, n: int) -> tuple[int, int, int]:
        # 1e-9 guards floor() against 0.6 * 10 == 5.999999...
        n_train = int(math.floor(self.train_fraction * n + 1e-9))
        n_valid = int(math.floor(self.valid_fraction * n + 1e-9))
        return n_train, n_valid, n - n_train - n_valid


def _parse_label(text: str, where: str) -> int:
    try:
        value = float(text.replace("\u2212", "-"))
    except ValueError:
        raise DataError(f"invalid label {text!r} at {where}") from None
    if value == 1:
        return 1
    if value in (-1, 0):
        return -1
    raise DataError(f"invalid label {text!r} at {where}")


def _is_number(text: str) -> bool:
    try:
        float(text)
    except ValueError:
        return False
    return True


def load_csv(path: Union[str, Path], label_column: Union[int, str] = -1) -> Dataset:
    """Read a comma-separated file.

    A header row is detected when the first line has any non-numeric cell.
    ``label_column`` is an index (negative allowed) or a header name. Labels
    in {0, 1} are mapped to {-1, +1}.
    """
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing file: {path}")
    with open(path, newline="", encoding="utf-8") as fh:
        rows = [r for r in csv.reader(fh) if r and any(c.strip() for c in r)]
    if not rows:
        raise DataError(f"empty file: {path}")

    header = None
    if not all(_is_number(c) for c in rows[0]):
        header = [c.strip() for c in rows[0]]
        rows = rows[1:]
    if not rows:
        raise DataError(f"no data rows in {path}")
    width = len(rows[0])

    if isinstance(label_column, str) and not label_column.lstrip("-").isdigit():
        if header is None or label_column not in header:
            raise DataError(f"label column {label_column!r} not found in header")
        label_idx = header.index(label_column)
    else:
        label_idx = int(label_column)
        if not -width <= label_idx < width:
            raise DataError(f"label column {label_idx} out of range for {width} columns")
        label_idx %= width

    feature_cols = [j for j in range(width) if j != label_idx]
    X = np.empty((len(rows), len(feature_cols)))
    y = np.empty(len(rows), dtype=np.int8)
    first_data_line = 2 if header else 1
    for i, row in enumerate(rows):
        line_no = i + first_data_line
        if len(row) != width:
            raise DataError(f"line {line_no}: expected {width} cells, got {len(row)}")
        y[i] = _parse_label(row[label_idx].strip(), f"line {line_no}")
        for k, j in enumerate(feature_cols):
            cell = row[j].strip()
            try:
                X[i, k] = float(cell)
            except ValueError:
                raise DataError(
                    f"non-numeric feature {cell!r} at line {line_no}, column {j}"
                ) from None
    names = [header[j] for j in feature_cols] if header else None
    data = Dataset(X, y, names)
    data.check_trainable()
    return data


def load_libsvm(path: Union[str, Path]) -> Dataset:
    """Read sparse ``label index:value ...`` lines (1-based indices)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"missing file: {path}")
    labels, rows = [], []
    n_features = 0
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            line = line.split("#", 1)[0].strip()
            if not line:
                continue
            tokens = line.split()
            labels.append(_parse_label(tokens[0], f"line {line_no}"))
            entries = {}
            last = 0
            for tok in tokens[1:]:
                try:
                    idx_text, val_text = tok.split(":")
                    idx, val = int(idx_text), float(val_text)
                except ValueError:
                    raise DataError(f"malformed entry {tok!r} on line {line_no}") from None
                if idx < 1:
                    raise DataError(f"malformed entry {tok!r} on line {line_no}")
                if idx <= last:
                    raise DataError(f"indices not increasing on line {line_no}")
                last = idx
                entries[idx - 1] = val
            n_features = max(n_features, last)
            rows.append(entries)
    if not rows:
        raise DataError(f"no data rows in {path}")
    X = np.zeros((len(rows), n_features))
    for i, entries in enumerate(rows):
        for j, v in entries.items():
            X[i, j] = v
    return Dataset(X, np.array(labels))


def save_csv(data: Dataset, path: Union[str, Path]) -> None:
    """Write features then label; ``repr`` floats so values round-trip exactly."""
    names = data.feature_names or tuple(f"x{j}" for j in range(data.n_features))
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(list(names) + ["label"])
        for row, label in zip(data.features, data.labels):
            writer.writerow([repr(float(v)) for v in row] + [int(label)])


def _has_both_classes(labels: np.ndarray) -> bool:
    return bool(np.any(labels == 1) and np.any(labels == -1))


def split_indices(labels: Sequence[int], spec: SplitSpec) -> tuple[np.ndarray, ...]:
    """Random (unstratified) partition; re-drawn until every part has both classes."""
    labels = np.asarray(labels)
    n = labels.shape[0]
    sizes = spec.sizes(n)
    if min(sizes) < 2:
        raise DataError(f"{n} examples is too few for split sizes {sizes}")
    rng = np.random.default_rng(spec.seed)
    for _ in range(spec.max_retries):
        perm = rng.permutation(n)
        parts = (
            perm[: sizes[0]],
            perm[sizes[0] : sizes[0] + sizes[1]],
            perm[sizes[0] + sizes[1] :],
        )
        if all(_has_both_classes(labels[p]) for p in parts):
            return tuple(np.sort(p) for p in parts)
    raise DataError(
        f"could not draw a split with both classes in every part after {spec.max_retries} tries"
    )


def split(data: Dataset, spec: SplitSpec) -> tuple[Dataset, Dataset, Dataset]:
    train, valid, test = split_indices(data.labels, spec)
    return data.subset(train), data.subset(valid), data.subset(test)


def train_test_split(data: Dataset, train_fraction: float, seed: int) -> tuple[Dataset, Dataset]:
    """Two-way random split with both classes in each part."""
    if not 0.0 < train_fraction < 1.0:
        raise DataError(f"train fraction must lie in (0, 1), got {train_fraction}")
    n = data.n_examples
    n_train = int(math.floor(train_fraction * n + 1e-9))
    if min(n_train, n - n_train) < 2:
        raise DataError(f"{n} examples is too few for a {train_fraction} train fraction")
    rng = np.random.default_rng(seed)
    for _ in range(100):
        perm = rng.permutation(n)
        train, test = perm[:n_train], perm[n_train:]
        if _has_both_classes(data.labels[train]) and _has_both_classes(data.labels[test]):
            return data.subset(np.sort(train)), data.subset(np.sort(test))
    raise DataError("could not draw a split with both classes in each part")
