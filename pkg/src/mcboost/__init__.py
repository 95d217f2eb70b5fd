"""Margin-distribution-controlled boosting by column generation."""

__version__ = "0.1.0"

from .data_io import DataError, Dataset, SplitSpec, load_csv, load_libsvm, split
from .engine import Ensemble, TrainConfig, TrainResult, train
from .stumps import Stump, best_stump

__all__ = [
    "DataError",
    "Dataset",
    "Ensemble",
    "SplitSpec",
    "Stump",
    "TrainConfig",
    "TrainResult",
    "best_stump",
    "load_csv",
    "load_libsvm",
    "split",
    "train",
]
