"""Seeded 2-D synthetic two-class data."""

from __future__ import annotations

import numpy as np

from .data_io import Dataset

# Each class is an equal-weight mixture of two isotropic Gaussians. The classes
# are offset along x1, and the components interleave along x2, so the boundary
# bends but one coordinate still carries most of the signal.
POSITIVE_CENTERS = np.array([[0.5, -1.1], [0.625, 1.1]])
NEGATIVE_CENTERS = np.array([[-0.5, 1.1], [-0.625, -1.1]])


def make_toy(n: int = 800, spread: float = 0.325, seed: int = 0) -> Dataset:
    """``n`` points, half per class; ``spread`` is the per-component std dev.

    Larger ``spread`` means more class overlap.
    """
    if n < 4 or n % 2:
        raise ValueError("n must be an even number >= 4")
    rng = np.random.default_rng(seed)
    half = n // 2
    parts, labels = [], []
    for centers, label in ((POSITIVE_CENTERS, 1), (NEGATIVE_CENTERS, -1)):
        which = rng.integers(0, len(centers), size=half)
        parts.append(centers[which] + spread * rng.standard_normal((half, 2)))
        labels.append(np.full(half, label))
    X = np.vstack(parts)
    y = np.concatenate(labels)
    perm = rng.permutation(n)
    return Dataset(X[perm], y[perm], ("x1", "x2"))
