"""Core domain types for tube-constrained robust regression.

A fitted model is a linear predictor (optionally with an unpenalized
intercept) trained so that all but a budgeted number of observations lie
inside a response tube of half-width ``delta``.  This module holds the
shared data structures plus the small pure operations everything else
builds on: prediction, residuals, tube membership counting, and feature
standardization.  All types are immutable after construction and every
operation is a pure function, so instances are safe to share across
threads without coordination.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

__all__ = [
    "Dataset",
    "FitConfig",
    "Model",
    "Standardizer",
    "DimensionError",
    "NumericalError",
    "predict",
    "residuals",
    "inlier_count",
    "standardize",
]


class DimensionError(ValueError):
    """Input shapes disagree with the dataset or model."""


class NumericalError(RuntimeError):
    """A solver lost numerical certainty and refuses to report a result."""


def _readonly(values, dtype=float) -> np.ndarray:
    out = np.array(values, dtype=dtype)
    out.setflags(write=False)
    return out


@dataclass(frozen=True)
class Dataset:
    """Feature matrix, response vector, and column labels.

    ``features`` is m x n, ``response`` has length m.  Entries must be
    finite and column names unique.  m may be zero (degenerate corner
    cases are allowed downstream) but n must be at least one.
    """

    features: np.ndarray
    response: np.ndarray
    feature_names: tuple[str, ...] = ()

    def __post_init__(self):
        X = np.array(self.features, dtype=float)
        if X.ndim != 2:
            raise DimensionError(f"features must be 2-D, got shape {X.shape}")
        if X.shape[1] < 1:
            raise ValueError("dataset needs at least one feature column")
        y = np.array(self.response, dtype=float)
        if y.ndim != 1:
            raise DimensionError(f"response must be 1-D, got shape {y.shape}")
        if y.shape[0] != X.shape[0]:
            raise DimensionError(
                f"response length {y.shape[0]} does not match {X.shape[0]} rows"
            )
        if X.size and not np.all(np.isfinite(X)):
            raise ValueError("features contain non-finite entries")
        if y.size and not np.all(np.isfinite(y)):
            raise ValueError("response contains non-finite entries")
        names = tuple(str(s) for s in self.feature_names)
        if not names:
            names = tuple(f"x{j}" for j in range(X.shape[1]))
        if len(names) != X.shape[1]:
            raise ValueError(
                f"{len(names)} feature names for {X.shape[1]} columns"
            )
        if len(set(names)) != len(names):
            raise ValueError("feature names must be distinct")
        X.setflags(write=False)
        y.setflags(write=False)
        object.__setattr__(self, "features", X)
        object.__setattr__(self, "response", y)
        object.__setattr__(self, "feature_names", names)

    @property
    def m(self) -> int:
        return self.features.shape[0]

    @property
    def n(self) -> int:
        return self.features.shape[1]

    def subset(self, indices) -> "Dataset":
        """Row selection; keeps column names, preserves the given order."""
        idx = np.asarray(indices, dtype=int)
        return Dataset(self.features[idx], self.response[idx], self.feature_names)


@dataclass(frozen=True)
class FitConfig:
    """Tube half-width, outlier fraction, and preprocessing switches.

    Defaults mirror the plain model: no intercept and no feature
    standardization.  When an intercept is requested it is carried as an
    extra all-ones column whose coefficient is exempt from the L1
    penalty; standardization, when on, touches features only so that
    ``delta`` keeps its response-unit meaning.
    """

    delta: float
    c: float
    fit_intercept: bool = False
    standardize: bool = False

    def __post_init__(self):
        if not (math.isfinite(self.delta) and self.delta >= 0.0):
            raise ValueError(f"delta must be finite and >= 0, got {self.delta}")
        if not (math.isfinite(self.c) and 0.0 <= self.c <= 1.0):
            raise ValueError(f"c must lie in [0, 1], got {self.c}")

    def outlier_budget(self, m: int) -> int:
        """floor(m * c), nudged upward by 1e-12 before flooring so decimal
        fractions such as c=0.10 on m=50 rows give exactly 5 despite binary
        representation."""
        return max(0, min(int(m), int(math.floor(m * self.c + 1e-12))))


@dataclass(frozen=True)
class Standardizer:
    """Per-feature (mean, scale) pairs; scale is the population standard
    deviation, with constant columns mapped to scale 1."""

    means: np.ndarray
    scales: np.ndarray

    def __post_init__(self):
        mu = np.array(self.means, dtype=float)
        sc = np.array(self.scales, dtype=float)
        if mu.ndim != 1 or sc.ndim != 1 or mu.shape != sc.shape:
            raise DimensionError("means and scales must be 1-D of equal length")
        if not (np.all(np.isfinite(mu)) and np.all(np.isfinite(sc))):
            raise ValueError("standardizer entries must be finite")
        if np.any(sc <= 0.0):
            raise ValueError("every scale must be strictly positive")
        mu.setflags(write=False)
        sc.setflags(write=False)
        object.__setattr__(self, "means", mu)
        object.__setattr__(self, "scales", sc)

    def apply(self, x) -> np.ndarray:
        return (np.asarray(x, dtype=float) - self.means) / self.scales

    def invert(self, z) -> np.ndarray:
        return np.asarray(z, dtype=float) * self.scales + self.means


@dataclass(frozen=True)
class Model:
    """Linear coefficients, optional unpenalized intercept, optional
    feature standardizer, plus provenance metadata from the fit."""

    weights: np.ndarray
    intercept: float = 0.0
    standardizer: Optional[Standardizer] = None
    config_echo: Optional[FitConfig] = None
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        w = np.array(self.weights, dtype=float)
        if w.ndim != 1:
            raise DimensionError(f"weights must be 1-D, got shape {w.shape}")
        if w.size and not np.all(np.isfinite(w)):
            raise ValueError("weights contain non-finite entries")
        b = float(self.intercept)
        if not math.isfinite(b):
            raise ValueError("intercept must be finite")
        if self.standardizer is not None and self.standardizer.means.shape[0] != w.shape[0]:
            raise DimensionError("standardizer length does not match weights")
        w.setflags(write=False)
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "intercept", b)

    @property
    def n(self) -> int:
        return self.weights.shape[0]


def predict(model: Model, x) -> float:
    """Evaluate ``intercept + w . x'`` where x' is x after the model's
    standardizer (identity when the model has none)."""
    xv = np.asarray(x, dtype=float)
    if xv.ndim != 1 or xv.shape[0] != model.n:
        raise DimensionError(
            f"input of shape {xv.shape} does not match model with {model.n} weights"
        )
    if xv.size and not np.all(np.isfinite(xv)):
        raise ValueError("prediction input contains non-finite entries")
    if model.standardizer is not None:
        xv = model.standardizer.apply(xv)
    return float(np.dot(model.weights, xv) + model.intercept)


def residuals(model: Model, data: Dataset) -> np.ndarray:
    """Signed residuals ``y_i - predict(model, x_i)``, order preserved."""
    if data.n != model.n:
        raise DimensionError(
            f"dataset has {data.n} features but model expects {model.n}"
        )
    return np.array(
        [data.response[i] - predict(model, data.features[i]) for i in range(data.m)],
        dtype=float,
    )


def inlier_count(model: Model, data: Dataset, delta: float, tol: float = 0.0) -> int:
    """Number of observations with ``|residual| <= delta + tol``."""
    if delta < 0.0:
        raise ValueError("delta must be >= 0")
    if tol < 0.0:
        raise ValueError("tol must be >= 0")
    r = residuals(model, data)
    return int(np.count_nonzero(np.abs(r) <= delta + tol))


def standardize(data: Dataset) -> tuple[Dataset, Standardizer]:
    """Center and scale each feature column to mean 0 / population
    variance 1.  Constant columns become exactly zero with scale 1 instead
    of erroring, which keeps ingestion of real CSVs robust.  The response
    is never touched."""
    if data.m < 1:
        raise ValueError("cannot standardize an empty dataset")
    X = data.features
    means = np.empty(data.n)
    scales = np.empty(data.n)
    for j in range(data.n):
        col = X[:, j]
        # max == min detects constant columns exactly, where a computed
        # mean could differ from the common value by rounding.
        if col.max() == col.min():
            means[j] = col[0]
            scales[j] = 1.0
        else:
            means[j] = col.mean()
            scales[j] = col.std()
    Z = (X - means) / scales
    return (
        Dataset(Z, data.response, data.feature_names),
        Standardizer(means, scales),
    )
