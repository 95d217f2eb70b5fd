"""Convert the KEEL copies of breast-cancer (Ljubljana) and Pima diabetes to CSV.

Usage: python scripts/convert_keel.py breast.dat pima.dat data/

The raw files ship inside the ``keel-ds`` wheel under
``keel_ds/data/balanced/raw/``.
"""
import csv
import sys
from pathlib import Path

BREAST_COLUMNS = [
    "age", "menopause", "tumor_size", "inv_nodes", "node_caps",
    "deg_malig", "breast", "breast_quad", "irradiat",
]
MENOPAUSE = {"premeno": 0, "lt40": 1, "ge40": 2}
QUADRANT = {"left_up": 0, "left_low": 1, "right_up": 2, "right_low": 3, "central": 4}
YES_NO = {"no": 0, "yes": 1}
SIDE = {"left": 0, "right": 1}

PIMA_COLUMNS = ["preg", "plas", "pres", "skin", "insu", "mass", "pedi", "age"]


def _midpoint(text):
    lo, hi = text.split("-")
    return (float(lo) + float(hi)) / 2


def convert_breast(src, dst):
    with open(src) as fh, open(dst, "w", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(BREAST_COLUMNS + ["label"])
        for line in fh:
            if not line.strip() or line.startswith("@"):
                continue
            f = [v.strip() for v in line.split(",")]
            row = [
                _midpoint(f[0]), MENOPAUSE[f[1]], _midpoint(f[2]), _midpoint(f[3]),
                YES_NO[f[4]], int(f[5]), SIDE[f[6]], QUADRANT[f[7]], YES_NO[f[8]],
            ]
            label = 1 if f[9] == "recurrence-events" else -1
            writer.writerow(row + [label])


def convert_pima(src, dst):
    with open(src) as fh, open(dst, "w", newline="") as out:
        writer = csv.writer(out)
        writer.writerow(PIMA_COLUMNS + ["label"])
        for line in fh:
            if not line.strip() or line.startswith("@"):
                continue
            f = [v.strip() for v in line.split(",")]
            label = 1 if f[8] == "tested_positive" else -1
            writer.writerow(f[:8] + [label])


if __name__ == "__main__":
    breast, pima, outdir = sys.argv[1:4]
    convert_breast(breast, Path(outdir) / "breast_cancer.csv")
    convert_pima(pima, Path(outdir) / "diabetes.csv")
