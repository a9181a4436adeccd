"""Command-line surface: CSV ingestion, model persistence, subcommands.

Exit codes: 0 success, 1 usage or input error, 2 infeasible fit,
3 numerical failure.  Logs and diagnostics go to standard error; data
goes to standard output or the requested output file.  Every command
taking a --seed is bit-deterministic across runs.
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .bench import EvalReport, GenSpec, LassoGrid, compare, generate, mse
from .core import (
    Dataset,
    FitConfig,
    Model,
    NumericalError,
    Standardizer,
    inlier_count,
    predict,
)
from .milp import FitResult, FitStatus, enumerate_exact, export_milp, fit

__all__ = ["ingest_csv", "save_model", "load_model", "run", "main"]

SCHEMA_VERSION = 1


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse would exit(2); we own the exit codes
        raise UsageError(message)


def _log(msg: str) -> None:
    print(msg, file=sys.stderr)


# ---------------------------------------------------------------------------
# CSV ingestion


def _read_table(path: str) -> tuple[list[str], list[list[str]]]:
    try:
        with open(path, newline="", encoding="utf-8") as fh:
            records = list(csv.reader(fh))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    if not records:
        raise UsageError(f"{path}: empty file")
    header = [h.lstrip("﻿") for h in records[0]]
    seen = set()
    for name in header:
        if name in seen:
            raise UsageError(f"{path}: duplicate column name '{name}'")
        seen.add(name)
    body = records[1:]
    for r, row in enumerate(body, start=1):
        if len(row) != len(header):
            raise UsageError(
                f"{path}: row {r} has {len(row)} fields, expected {len(header)}"
            )
    return header, body


def _parse_cell(text: str, row: int, column: str, path: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise UsageError(
            f"{path}: row {row}, column '{column}': cannot parse '{text}' as a number"
        ) from None
    if not np.isfinite(value):
        raise UsageError(
            f"{path}: row {row}, column '{column}': non-finite value '{text}'"
        )
    return value


def ingest_csv(path: str, target_column_name: str) -> Dataset:
    """Load a UTF-8 CSV with a header row into a Dataset.

    Feature order is the column order minus the target; row order is
    preserved.  Rows are reported 1-based (header excluded) in
    diagnostics.
    """
    header, body = _read_table(path)
    if target_column_name not in header:
        raise UsageError(
            f"{path}: target column '{target_column_name}' not found; "
            f"columns are {', '.join(header)}"
        )
    t = header.index(target_column_name)
    names = tuple(h for i, h in enumerate(header) if i != t)
    if not names:
        raise UsageError(f"{path}: no feature columns besides the target")
    X = np.empty((len(body), len(names)))
    y = np.empty(len(body))
    for r, row in enumerate(body, start=1):
        k = 0
        for i, cell in enumerate(row):
            if i == t:
                y[r - 1] = _parse_cell(cell, r, header[i], path)
            else:
                X[r - 1, k] = _parse_cell(cell, r, header[i], path)
                k += 1
    return Dataset(X, y, names)


def _read_feature_matrix(path: str, names: tuple[str, ...]) -> np.ndarray:
    header, body = _read_table(path)
    missing = [n for n in names if n not in header]
    if missing:
        raise UsageError(f"{path}: missing feature columns: {', '.join(missing)}")
    pos = [header.index(n) for n in names]
    X = np.empty((len(body), len(names)))
    for r, row in enumerate(body, start=1):
        for k, i in enumerate(pos):
            X[r - 1, k] = _parse_cell(row[i], r, header[i], path)
    return X


# ---------------------------------------------------------------------------
# Model persistence


@dataclass(frozen=True)
class LoadedModel:
    model: Model
    feature_names: tuple[str, ...]
    solver: dict


def save_model(path: str, result: FitResult, feature_names) -> None:
    """Write the schema-version-1 model document.  Reals are serialized by
    json's repr, the shortest round-trip representation, so reloading
    reproduces predictions bit-exactly."""
    model = result.model
    if model is None:
        raise ValueError("cannot save an infeasible fit")
    config = model.config_echo
    std = None
    if model.standardizer is not None:
        std = {
            "means": [float(v) for v in model.standardizer.means],
            "scales": [float(v) for v in model.standardizer.scales],
        }
    doc = {
        "schema_version": SCHEMA_VERSION,
        "weights": [float(v) for v in model.weights],
        "intercept": float(model.intercept),
        "delta": float(config.delta),
        "c": float(config.c),
        "feature_names": list(feature_names),
        "standardizer": std,
        "solver": {
            "status": result.status.value,
            "objective": float(result.objective),
            "outlier_indices": result.outlier_indices,
            "nodes_explored": int(result.nodes_explored),
        },
    }
    Path(path).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")


def load_model(path: str) -> LoadedModel:
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        raise UsageError(f"cannot read {path}: {exc}") from exc
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}: not valid JSON: {exc}") from exc
    if doc.get("schema_version") != SCHEMA_VERSION:
        raise UsageError(
            f"{path}: unsupported schema_version {doc.get('schema_version')}"
        )
    names = tuple(doc["feature_names"])
    weights = np.asarray(doc["weights"], dtype=float)
    if weights.shape[0] != len(names):
        raise UsageError(f"{path}: weights length does not match feature names")
    std = None
    if doc.get("standardizer") is not None:
        std = Standardizer(
            np.asarray(doc["standardizer"]["means"], dtype=float),
            np.asarray(doc["standardizer"]["scales"], dtype=float),
        )
    config = FitConfig(
        delta=float(doc["delta"]),
        c=float(doc["c"]),
        fit_intercept=bool(doc["intercept"] != 0.0),
        standardize=std is not None,
    )
    model = Model(
        weights=weights,
        intercept=float(doc["intercept"]),
        standardizer=std,
        config_echo=config,
        meta={"loaded_from": str(path)},
    )
    return LoadedModel(model, names, dict(doc.get("solver", {})))


# ---------------------------------------------------------------------------
# Subcommands


def _add_fit_like(p: _Parser) -> None:
    p.add_argument("--data", required=True)
    p.add_argument("--target", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--c", type=float, required=True)
    p.add_argument("--intercept", action="store_true")
    p.add_argument("--standardize", action="store_true")
    p.add_argument("--threads", type=int, default=1)


def _build_parser() -> _Parser:
    parser = _Parser(prog="tubefit", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("fit", help="fit a tube model and save it as JSON")
    _add_fit_like(p)
    p.add_argument("--oracle-check", action="store_true")
    p.add_argument("--out", required=True)

    p = sub.add_parser("predict", help="evaluate a saved model on a CSV")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--out", required=True)

    p = sub.add_parser("eval", help="MSE and inlier rate of a saved model")
    p.add_argument("--model", required=True)
    p.add_argument("--data", required=True)
    p.add_argument("--target")
    p.add_argument("--delta", type=float)

    p = sub.add_parser("gen", help="generate a synthetic dataset")
    p.add_argument("--m", type=int, required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--k", type=int, required=True, help="nonzero true coefficients")
    p.add_argument("--coef-scale", type=float, default=1.0)
    p.add_argument("--noise", type=float, required=True)
    p.add_argument("--outliers", type=int, required=True)
    p.add_argument("--outlier-magnitude", type=float, default=10.0)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("--target-name", default="y")
    p.add_argument("--out", required=True)
    p.add_argument("--truth")

    p = sub.add_parser("export", help="write the fit as an LP-format MILP")
    _add_fit_like(p)
    p.add_argument("--out", required=True)

    p = sub.add_parser("compare", help="CV comparison against the lasso baseline")
    _add_fit_like(p)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--csv", help="also write the report as CSV")

    return parser


def _config_from(args) -> FitConfig:
    if args.threads < 1:
        raise UsageError("--threads must be >= 1")
    return FitConfig(
        delta=args.delta,
        c=args.c,
        fit_intercept=args.intercept,
        standardize=args.standardize,
    )


def _cmd_fit(args) -> int:
    data = ingest_csv(args.data, args.target)
    config = _config_from(args)
    if args.oracle_check and data.m > 15:
        raise UsageError("--oracle-check is allowed only when m <= 15")
    budget = config.outlier_budget(data.m)
    _log(f"outlier budget: {budget} of {data.m} rows")
    result = fit(data, config)
    if result.status is not FitStatus.PROVEN_OPTIMAL:
        _log(f"fit infeasible: {result.status.value}")
        return 2
    if args.oracle_check:
        oracle = enumerate_exact(data, config)
        mismatch = (
            oracle.status is not result.status
            or abs(oracle.objective - result.objective) > 1e-6
        )
        if mismatch:
            _log(
                "oracle check FAILED: "
                f"fit objective {result.objective!r} vs oracle {oracle.objective!r}"
            )
            return 3
        result = FitResult(
            result.model,
            result.outlier_flags,
            result.objective,
            result.status,
            result.nodes_explored,
            oracle_verified=True,
        )
        _log("oracle check passed")
    save_model(args.out, result, data.feature_names)
    _log(
        f"objective {result.objective!r}, outliers {result.outlier_indices}, "
        f"nodes {result.nodes_explored}"
    )
    return 0


def _cmd_predict(args) -> int:
    loaded = load_model(args.model)
    X = _read_feature_matrix(args.data, loaded.feature_names)
    lines = ["prediction"]
    for i in range(X.shape[0]):
        lines.append(repr(predict(loaded.model, X[i])))
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    _log(f"wrote {X.shape[0]} predictions to {args.out}")
    return 0


def _cmd_eval(args) -> int:
    loaded = load_model(args.model)
    header, _ = _read_table(args.data)
    target = args.target
    if target is None:
        extra = [h for h in header if h not in loaded.feature_names]
        if len(extra) != 1:
            raise UsageError(
                "cannot infer the target column; pass --target "
                f"(non-feature columns: {', '.join(extra) or 'none'})"
            )
        target = extra[0]
    data = ingest_csv(args.data, target)
    data = Dataset(
        _read_feature_matrix(args.data, loaded.feature_names),
        data.response,
        loaded.feature_names,
    )
    delta = args.delta if args.delta is not None else loaded.model.config_echo.delta
    score = mse(loaded.model, data)
    rate = inlier_count(loaded.model, data, delta, 1e-9) / data.m
    print(f"mse {score!r}")
    print(f"inlier_rate {rate!r}")
    return 0


def _cmd_gen(args) -> int:
    spec = GenSpec(
        m=args.m,
        n=args.n,
        sparsity=args.k,
        noise_half_width=args.noise,
        outlier_count=args.outliers,
        outlier_magnitude=args.outlier_magnitude,
        coef_scale=args.coef_scale,
        seed=args.seed,
    )
    data, true_w, outlier_idx = generate(spec)
    lines = [",".join(list(data.feature_names) + [args.target_name])]
    for i in range(data.m):
        cells = [repr(float(v)) for v in data.features[i]]
        cells.append(repr(float(data.response[i])))
        lines.append(",".join(cells))
    Path(args.out).write_text("\n".join(lines) + "\n", encoding="utf-8")
    if args.truth:
        doc = {
            "true_weights": [float(v) for v in true_w],
            "outlier_indices": [int(i) for i in outlier_idx],
            "seed": args.seed,
        }
        Path(args.truth).write_text(json.dumps(doc, indent=2) + "\n", encoding="utf-8")
    _log(f"wrote {data.m} rows x {data.n} features to {args.out}")
    return 0


def _cmd_export(args) -> int:
    data = ingest_csv(args.data, args.target)
    config = _config_from(args)
    exported = export_milp(data, config)
    Path(args.out).write_text(exported.text, encoding="utf-8")
    _log(
        f"wrote MILP with {2 * data.m} tube rows and budget "
        f"{config.outlier_budget(data.m)} to {args.out}"
    )
    return 0


def _cmd_compare(args) -> int:
    data = ingest_csv(args.data, args.target)
    config = _config_from(args)
    report = compare(data, config, LassoGrid(), k=args.folds, seed=args.seed)
    sys.stdout.write(report.to_text())
    if args.csv:
        Path(args.csv).write_text(report.to_csv(), encoding="utf-8")
    return 0


_COMMANDS = {
    "fit": _cmd_fit,
    "predict": _cmd_predict,
    "eval": _cmd_eval,
    "gen": _cmd_gen,
    "export": _cmd_export,
    "compare": _cmd_compare,
}


def run(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except UsageError as exc:
        _log(f"error: {exc}")
        return 1
    except NumericalError as exc:
        _log(f"numerical failure: {exc}")
        return 3
    except (ValueError, OSError) as exc:
        _log(f"error: {exc}")
        return 1


def main() -> None:
    sys.exit(run())
