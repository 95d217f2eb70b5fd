"""Plain-text model files.

Layout::

    # mcboost model
    format_version=1
    learner=mcboost
    ...more key=value header lines...
    feature,threshold,polarity,weight
    0,0.5,1,0.25
    ...

Floats are written with ``repr`` so a reloaded model reproduces decision
values bit for bit.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

from .engine import Ensemble
from .stumps import Stump

FORMAT_VERSION = 1
MAGIC = "# mcboost model"
COLUMNS = "feature,threshold,polarity,weight"


class ModelFormatError(ValueError):
    pass


def save_model(ensemble: Ensemble, path, **header) -> None:
    lines = [MAGIC, f"format_version={FORMAT_VERSION}"]
    header.setdefault("learner", "mcboost")
    header["normalized"] = int(ensemble.normalized)
    header["stumps"] = len(ensemble)
    for key, value in header.items():
        if isinstance(value, float):
            value = repr(value)
        if "\n" in str(value) or "=" in str(key):
            raise ValueError(f"header entry {key!r} cannot be written")
        lines.append(f"{key}={value}")
    lines.append(COLUMNS)
    for stump, weight in zip(ensemble.stumps, ensemble.w):
        lines.append(
            f"{stump.feature},{float(stump.threshold)!r},{stump.polarity},{float(weight)!r}"
        )
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_model(path) -> tuple[Ensemble, dict]:
    text = Path(path).read_text(encoding="utf-8").splitlines()
    if not text or text[0] != MAGIC:
        raise ModelFormatError(f"{path} is not a model file")
    header = {}
    i = 1
    while i < len(text) and text[i] != COLUMNS:
        key, sep, value = text[i].partition("=")
        if not sep:
            raise ModelFormatError(f"bad header line {i + 1}: {text[i]!r}")
        header[key] = value
        i += 1
    if i == len(text):
        raise ModelFormatError("missing stump table")
    if int(header.get("format_version", -1)) != FORMAT_VERSION:
        raise ModelFormatError(f"unsupported format version {header.get('format_version')}")
    stumps, weights = [], []
    for line_no, line in enumerate(text[i + 1 :], start=i + 2):
        if not line.strip():
            continue
        try:
            f, thr, pol, wt = line.split(",")
            stumps.append(Stump(int(f), float(thr), int(pol)))
            weights.append(float(wt))
        except ValueError as exc:
            raise ModelFormatError(f"bad stump record on line {line_no}: {exc}") from None
    normalized = header.get("normalized", "1") == "1"
    return Ensemble(tuple(stumps), np.array(weights), normalized=normalized), header
