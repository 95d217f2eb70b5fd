"""Command-line entry point.

Parameters resolve in three layers: built-in defaults, then a ``key=value``
config file (``--config``), then explicit flags. Every command writes
``manifest.cfg`` into its output directory; ``mcboost rerun manifest.cfg``
repeats the run from it.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .baselines import BaselineConfig, train_baseline
from .data_io import DataError, Dataset, SplitSpec, load_csv, load_libsvm, save_csv, split, train_test_split
from .engine import TrainConfig, TrainingError, train, write_trace
from .margins import MarginReport
from .model_io import ModelFormatError, load_model, save_model
from .model_select import DEFAULT_E_GRID, EGrid, select_E, select_rounds, wilcoxon_z, write_wilcoxon
from .qp_master import SolverError
from .toy import make_toy

log = logging.getLogger("mcboost")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_SOLVER = 0, 1, 2, 3
OUT_ENV = "MCBOOST_OUT"
COMMANDS = ("train", "predict", "margins", "cv", "compare", "repro")
ALGOS = ("mcboost", "adaboost", "l2boost")


class UsageError(Exception):
    pass


def _fractions(text):
    parts = [float(p) for p in str(text).split(",")]
    if len(parts) != 3:
        raise ValueError("expected three comma-separated fractions")
    return tuple(parts)


def _bool(text):
    if isinstance(text, bool):
        return text
    lowered = str(text).strip().lower()
    if lowered in ("1", "true", "yes", "on"):
        return True
    if lowered in ("0", "false", "no", "off", ""):
        return False
    raise ValueError(f"not a boolean: {text!r}")


# key -> (type, default)
PARAMS = {
    "data": (str, None),
    "format": (str, "csv"),
    "label_column": (str, "-1"),
    "algo": (str, "mcboost"),
    "e": (float, None),
    "epsilon": (float, 1e-5),
    "nmax": (int, 1000),
    "rounds": (int, None),
    "max_rounds": (int, 1000),
    "grid": (str, "default"),
    "seed": (int, 0),
    "split": (_fractions, (0.6, 0.2, 0.2)),
    "trace": (_bool, False),
    "jobs": (int, 1),
    "model": (str, None),
    "table": (str, None),
    "a": (str, "MC"),
    "b": (str, "AB"),
    "n": (int, 800),
    "spread": (float, 0.325),
    "train_fraction": (float, 0.6),
    "out": (str, None),
}

COMMAND_KEYS = {
    "train": ["data", "format", "label_column", "algo", "e", "epsilon", "nmax", "rounds", "seed", "split", "trace", "out"],
    "predict": ["model", "data", "format", "label_column", "out"],
    "margins": ["model", "data", "format", "label_column", "out"],
    "cv": ["data", "format", "label_column", "algo", "grid", "epsilon", "nmax", "max_rounds", "seed", "split", "jobs", "out"],
    "compare": ["table", "a", "b", "out"],
    "repro": ["seed", "n", "spread", "train_fraction", "grid", "epsilon", "nmax", "out"],
}


def read_config(path) -> dict:
    values = {}
    for line_no, raw in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise UsageError(f"{path}:{line_no}: expected key=value")
        key = key.strip().replace("-", "_")
        if key != "command" and key not in PARAMS:
            raise UsageError(f"{path}:{line_no}: unknown key {key!r}")
        values[key] = value.strip()
    return values


def resolve(command: str, flags: dict, config: dict) -> dict:
    params = {}
    for key in COMMAND_KEYS[command]:
        kind, default = PARAMS[key]
        value = default
        if key in config and config[key] != "":
            value = config[key]
        if flags.get(key) is not None:
            value = flags[key]
        if value is not None and not isinstance(value, (tuple, bool)) and kind is not str:
            try:
                value = kind(value)
            except ValueError as exc:
                raise UsageError(f"bad value for {key}: {exc}") from None
        params[key] = value
    if params.get("out") is None:
        params["out"] = os.environ.get(OUT_ENV, f"mcboost-{command}")
    validate(command, params, explicit={**config, **{k: v for k, v in flags.items() if v is not None}})
    return params


def validate(command: str, params: dict, explicit: dict) -> None:
    algo = params.get("algo")
    if algo is not None and algo not in ALGOS:
        raise UsageError(f"unknown algorithm {algo!r}; choose from {', '.join(ALGOS)}")
    if command in ("train", "predict", "margins", "cv") and not params.get("data"):
        raise UsageError(f"{command} needs --data")
    if command in ("predict", "margins") and not params.get("model"):
        raise UsageError(f"{command} needs --model")
    if command == "compare" and not params.get("table"):
        raise UsageError("compare needs --table")
    if params.get("format") not in (None, "csv", "libsvm"):
        raise UsageError("--format must be csv or libsvm")
    if command in ("train", "cv"):
        if algo == "mcboost":
            for key in ("rounds", "max_rounds"):
                if key in explicit and key in params:
                    raise UsageError(f"--{key.replace('_', '-')} does not apply to mcboost")
        else:
            for key in ("e", "epsilon", "nmax", "grid"):
                if key in explicit and key in params:
                    raise UsageError(f"--{key} does not apply to {algo}")
    if command == "train" and algo == "mcboost":
        if params["e"] is None:
            raise UsageError("mcboost training needs --e (or use the cv command)")
        if not 0.0 < params["e"] < 1.0:
            raise UsageError("--e must lie strictly inside (0, 1)")
    if command == "train" and algo != "mcboost" and params["rounds"] is None:
        params["rounds"] = 1000
    for key in ("epsilon",):
        if key in params and params[key] is not None and not params[key] > 0:
            raise UsageError(f"--{key} must be positive")
    for key in ("nmax", "rounds", "max_rounds", "jobs", "n"):
        if params.get(key) is not None and params[key] < 1:
            raise UsageError(f"--{key.replace('_', '-')} must be a positive integer")


def parse_grid(text) -> EGrid:
    if text in (None, "default"):
        return EGrid(DEFAULT_E_GRID)
    try:
        return EGrid.from_values(float(v) for v in str(text).split(","))
    except ValueError as exc:
        raise UsageError(f"bad E grid: {exc}") from None


MCBOOST_ONLY = ("e", "epsilon", "nmax", "grid")
BASELINE_ONLY = ("rounds", "max_rounds")


def write_manifest(out: Path, command: str, params: dict) -> None:
    skip = ()
    if command in ("train", "cv"):
        skip = BASELINE_ONLY if params["algo"] == "mcboost" else MCBOOST_ONLY
    lines = [f"command={command}"]
    for key, value in params.items():
        if value is None or key in skip:
            continue
        if isinstance(value, tuple):
            value = ",".join(repr(float(v)) for v in value)
        elif isinstance(value, float):
            value = repr(value)
        lines.append(f"{key}={value}")
    (out / "manifest.cfg").write_text("\n".join(lines) + "\n", encoding="utf-8")


def _load(params) -> Dataset:
    if params["format"] == "libsvm":
        return load_libsvm(params["data"])
    return load_csv(params["data"], params["label_column"])


def _write_rows(path, header, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(header)
        for row in rows:
            writer.writerow([repr(v) if isinstance(v, float) else v for v in row])


def _write_metrics(path, parts):
    _write_rows(path, ["split", "error"], [(name, float(err)) for name, err in parts])


def cmd_train(params, out: Path) -> None:
    data = _load(params)
    spec = SplitSpec(*params["split"], seed=params["seed"])
    train_set, valid_set, test_set = split(data, spec)
    if params["algo"] == "mcboost":
        config = TrainConfig(E=params["e"], epsilon=params["epsilon"], n_max=params["nmax"], trace=params["trace"])
        result = train(train_set, config, monitor=test_set if params["trace"] else None)
        ensemble = result.ensemble
        save_model(
            ensemble, out / "model.txt", learner="mcboost", E=params["e"],
            iterations=result.iterations, termination_reason=result.termination_reason,
        )
        if params["trace"]:
            write_trace(result.trace, out / "trace.csv")
    else:
        run = train_baseline(train_set, BaselineConfig(params["rounds"], params["algo"]))
        ensemble = run.ensemble
        save_model(ensemble, out / "model.txt", learner=params["algo"], rounds=len(run.rounds), termination_reason=run.stop_reason)
    _write_metrics(out / "metrics.csv", [
        ("train", ensemble.error_rate(train_set)),
        ("valid", ensemble.error_rate(valid_set)),
        ("test", ensemble.error_rate(test_set)),
    ])
    MarginReport.for_model(ensemble, train_set).write(out, prefix="train_")


def cmd_predict(params, out: Path) -> None:
    ensemble, _ = load_model(params["model"])
    data = _load(params)
    F = ensemble.decision_function(data.features)
    pred = np.where(F >= 0, 1, -1)
    _write_rows(out / "predictions.csv", ["index", "decision_value", "prediction", "label"],
                [(i, float(f), int(p), int(y)) for i, (f, p, y) in enumerate(zip(F, pred, data.labels))])
    _write_metrics(out / "metrics.csv", [("data", float(np.mean(pred != data.labels)))])


def cmd_margins(params, out: Path) -> None:
    ensemble, header = load_model(params["model"])
    data = _load(params)
    E = float(header["E"]) if "E" in header else None
    MarginReport.for_model(ensemble, data).write(out, E=E)


def cmd_cv(params, out: Path) -> None:
    data = _load(params)
    spec = SplitSpec(*params["split"], seed=params["seed"])
    train_set, valid_set, test_set = split(data, spec)
    if params["algo"] == "mcboost":
        template = TrainConfig(epsilon=params["epsilon"], n_max=params["nmax"])
        cv = select_E(train_set, valid_set, parse_grid(params["grid"]), template, n_jobs=params["jobs"])
        result = cv.models[cv.chosen]
        ensemble = result.ensemble
        save_model(ensemble, out / "model.txt", learner="mcboost", E=cv.chosen,
                   iterations=result.iterations, termination_reason=result.termination_reason)
    else:
        cv = select_rounds(train_set, valid_set, params["max_rounds"], params["algo"])
        ensemble = cv.models["run"].prefix(cv.chosen)
        save_model(ensemble, out / "model.txt", learner=params["algo"], rounds=cv.chosen)
    cv.write(out / "cv_report.csv")
    _write_metrics(out / "metrics.csv", [
        ("train", ensemble.error_rate(train_set)),
        ("valid", ensemble.error_rate(valid_set)),
        ("test", ensemble.error_rate(test_set)),
    ])
    print(f"chosen {cv.chosen} ({cv.chosen_rule})")


def read_table(path) -> dict:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [r for r in reader if r]
    columns = {}
    for j, name in enumerate(header[1:], start=1):
        try:
            columns[name.strip()] = [float(r[j].split("±")[0]) for r in rows]
        except (ValueError, IndexError) as exc:
            raise DataError(f"column {name!r} of {path} is not numeric: {exc}") from None
    return columns


def cmd_compare(params, out: Path) -> None:
    columns = read_table(params["table"])
    for key in (params["a"], params["b"]):
        if key not in columns:
            raise UsageError(f"column {key!r} not in table; available: {', '.join(columns)}")
    try:
        result = wilcoxon_z(columns[params["a"]], columns[params["b"]])
    except ValueError as exc:
        raise DataError(str(exc)) from None
    write_wilcoxon(result, out / "wilcoxon.csv")
    print(f"{params['a']} vs {params['b']}: n={result.n_effective} W={result.W:g} z={result.z:.4f}")


def repro_toy(seed: int, out_dir, n: int = 800, spread: float = 0.325, train_fraction: float = 0.6,
              grid: EGrid | None = None, epsilon: float = 1e-5, n_max: int = 1000) -> list:
    """E sweep on the synthetic toy set; writes one directory of CSVs per E.

    Returns the rows of ``sweep.csv``.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    grid = EGrid() if grid is None else grid
    data = make_toy(n, spread=spread, seed=seed)
    save_csv(data, out_dir / "toy_data.csv")
    train_set, test_set = train_test_split(data, train_fraction, seed)
    rows = []
    for E in grid.values:
        result = train(train_set, TrainConfig(E=E, epsilon=epsilon, n_max=n_max))
        report = MarginReport.for_model(result.ensemble, train_set)
        tag = f"E_{E:.2f}"
        report.write(out_dir / tag, E=E)
        train_err = result.ensemble.error_rate(train_set)
        test_err = result.ensemble.error_rate(test_set)
        _write_rows(out_dir / tag / "summary.csv",
                    ["E", "iterations", "train_error", "test_error", "margin_mean", "margin_variance"],
                    [(E, result.iterations, train_err, test_err, report.mean, report.variance)])
        rows.append((E, result.iterations, train_err, test_err, report.mean, report.variance,
                     result.termination_reason))
    _write_rows(out_dir / "sweep.csv",
                ["E", "iterations", "train_error", "test_error", "margin_mean", "margin_variance", "termination_reason"],
                rows)
    return rows


def cmd_repro(params, out: Path) -> None:
    rows = repro_toy(params["seed"], out, n=params["n"], spread=params["spread"],
                     train_fraction=params["train_fraction"], grid=parse_grid(params["grid"]),
                     epsilon=params["epsilon"], n_max=params["nmax"])
    for E, iters, tr, te, mean, var, _ in rows:
        print(f"E={E:.2f} iterations={iters} train={tr:.4f} test={te:.4f} mean={mean:.4f} var={var:.4f}")


HANDLERS = {
    "train": cmd_train,
    "predict": cmd_predict,
    "margins": cmd_margins,
    "cv": cmd_cv,
    "compare": cmd_compare,
    "repro": cmd_repro,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="mcboost", description="Margin-controlled boosting toolkit")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, keys):
        p.add_argument("--config", help="key=value file with parameter defaults")
        for key in keys:
            flag = "--" + key.replace("_", "-")
            if key == "trace":
                p.add_argument(flag, action="store_const", const=True, default=None)
            else:
                p.add_argument(flag, dest=key, default=None)

    for name in COMMANDS:
        common(sub.add_parser(name), COMMAND_KEYS[name])
    rerun = sub.add_parser("rerun", help="repeat a run from its manifest.cfg")
    rerun.add_argument("manifest")
    rerun.add_argument("--out", default=None)
    return parser


def run(command: str, flags: dict, config: dict) -> int:
    params = resolve(command, flags, config)
    out = Path(params["out"])
    out.mkdir(parents=True, exist_ok=True)
    write_manifest(out, command, params)
    HANDLERS[command](params, out)
    return EXIT_OK


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_USAGE
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "rerun":
            config = read_config(args.manifest)
            command = config.pop("command", None)
            if command not in COMMANDS:
                raise UsageError(f"manifest {args.manifest} names no valid command")
            return run(command, {"out": args.out}, config)
        flags = {k: v for k, v in vars(args).items() if k not in ("command", "config", "verbose")}
        config = read_config(args.config) if args.config else {}
        config.pop("command", None)
        return run(args.command, flags, config)
    except UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (DataError, ModelFormatError, FileNotFoundError) as exc:
        print(f"data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"I/O error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except (TrainingError, SolverError) as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
