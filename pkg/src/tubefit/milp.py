"""Exact solver for tube regression with an outlier budget.

The estimator chooses at most floor(m*c) observations to deactivate and
the L1-minimal coefficient vector fitting the rest inside the delta
tube.  Internally the search uses indicator semantics: a flagged row is
simply removed from the inner LP, so no big-M constant ever enters the
numerics.  Big-M appears only in the exported MILP text, which exists
for cross-validation against external solvers.

Search design, all deterministic:

* depth-first branch and bound over per-row outlier flags;
* node bound = LP on committed inlier rows only (dropping constraints of
  a minimization can only lower the optimum, so the bound is valid);
* branch on the undecided row with the largest tube violation at the
  node LP's coefficients, ties to the lowest index, exploring the
  flag-as-outlier child first;
* prune when the node bound is >= incumbent - 1e-9;
* when the budget is exhausted all undecided rows become committed
  inliers and one final LP decides feasibility;
* the incumbent is replaced only when strictly better by > 1e-9, or tied
  within 1e-9 with a lexicographically smaller outlier flag vector.

A greedy trim heuristic seeds the incumbent so pruning bites early; the
same heuristic supplies the coefficient-norm bound used for big-M.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from enum import Enum
from itertools import combinations
from typing import Optional

import numpy as np

from .core import Dataset, FitConfig, Model, Standardizer, standardize
from .lp import LpStatus, build_l1_tube_lp, solve
from .lpformat import LpRow, write_milp

__all__ = [
    "FitStatus",
    "FitResult",
    "BnbNode",
    "MilpExport",
    "fit",
    "enumerate_exact",
    "compute_big_m",
    "export_milp",
]

logger = logging.getLogger(__name__)

_TIE_TOL = 1e-9
_PRUNE_TOL = 1e-9
# Stricter than the 1e-9 reported-inlier tolerance so rows kept by the
# completion shortcut always pass the downstream tube check.
_VIOLATION_TOL = 1e-10

_INTERCEPT_NAME = "(intercept)"


class FitStatus(Enum):
    PROVEN_OPTIMAL = "proven_optimal"
    INFEASIBLE = "infeasible"
    BUDGET_EXHAUSTED_INFEASIBLE = "budget_exhausted_infeasible"


@dataclass(frozen=True)
class FitResult:
    """Outcome of an exact fit: model (when optimal), per-row outlier
    flags, the L1 objective excluding any intercept, and search stats."""

    model: Optional[Model]
    outlier_flags: np.ndarray
    objective: float
    status: FitStatus
    nodes_explored: int
    oracle_verified: bool = False

    @property
    def outlier_indices(self) -> list[int]:
        return [int(i) for i in np.flatnonzero(self.outlier_flags)]


@dataclass(frozen=True)
class BnbNode:
    """Search state over the outlier flags: disjoint committed sets plus
    the objective bound proven for every completion of this node."""

    committed_inliers: tuple[int, ...]
    committed_outliers: tuple[int, ...]
    lower_bound: float


@dataclass(frozen=True)
class MilpExport:
    big_m: np.ndarray
    text: str


@dataclass(frozen=True)
class _Design:
    """The matrix the inner LPs actually see: features standardized when
    requested, plus a unit column for an unpenalized intercept."""

    dataset: Dataset
    penalties: np.ndarray
    standardizer: Optional[Standardizer]
    has_intercept: bool
    n_features: int


def _build_design(data: Dataset, config: FitConfig) -> _Design:
    std = None
    X = data.features
    names = list(data.feature_names)
    if config.standardize:
        scaled, std = standardize(data)
        X = scaled.features
    penalties = [1.0] * data.n
    if config.fit_intercept:
        X = np.hstack([X, np.ones((data.m, 1))])
        names.append(_INTERCEPT_NAME)
        penalties.append(0.0)
    ds = Dataset(X, data.response, tuple(names))
    return _Design(ds, np.asarray(penalties), std, config.fit_intercept, data.n)


def _solve_rows(design: _Design, delta: float, rows) -> tuple:
    """Solve the tube LP on the given rows; returns (solution, coef)."""
    sol = solve(build_l1_tube_lp(design.dataset, rows, delta, design.penalties))
    if sol.status is not LpStatus.OPTIMAL:
        return sol, None
    p = design.dataset.n
    coef = sol.primal[:p] - sol.primal[p:]
    return sol, coef


def _flags_lex_less(a: np.ndarray, b: np.ndarray) -> bool:
    """Lexicographic order on outlier flag vectors: the vector that keeps
    the earliest differing row as an inlier is the smaller one."""
    diff = np.flatnonzero(a != b)
    if diff.size == 0:
        return False
    return not a[diff[0]]


@dataclass
class _Incumbent:
    objective: float
    flags: np.ndarray
    coef: np.ndarray


def _consider(
    inc: Optional[_Incumbent], m: int, objective: float, outliers, coef
) -> _Incumbent:
    flags = np.zeros(m, dtype=bool)
    if len(outliers):
        flags[list(outliers)] = True
    if (
        inc is None
        or objective < inc.objective - _TIE_TOL
        or (
            abs(objective - inc.objective) <= _TIE_TOL
            and _flags_lex_less(flags, inc.flags)
        )
    ):
        return _Incumbent(float(objective), flags, np.array(coef, dtype=float))
    return inc


def _least_squares(X: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.linalg.lstsq(X, y, rcond=None)[0]


def _greedy_trim(design: _Design, delta: float, budget: int):
    """Drop up to ``budget`` rows, worst least-squares residual first,
    until the tube LP on the remaining rows is feasible.  Returns
    (coef, objective, dropped_indices) or None when every attempt failed."""
    m = design.dataset.m
    keep = list(range(m))
    for step in range(budget + 1):
        sol, coef = _solve_rows(design, delta, keep)
        if sol.status is LpStatus.OPTIMAL:
            dropped = sorted(set(range(m)) - set(keep))
            return coef, float(sol.objective), dropped
        if step == budget:
            break
        X = design.dataset.features[keep]
        y = design.dataset.response[keep]
        w = _least_squares(X, y)
        resid = np.abs(y - X @ w)
        keep.pop(int(np.argmax(resid)))  # argmax takes the lowest index on ties
    return None


def _finish(
    inc: Optional[_Incumbent],
    design: _Design,
    config: FitConfig,
    budget: int,
    nodes: int,
) -> FitResult:
    m = design.dataset.m
    if inc is None:
        status = (
            FitStatus.INFEASIBLE
            if budget == 0
            else FitStatus.BUDGET_EXHAUSTED_INFEASIBLE
        )
        flags = np.zeros(m, dtype=bool)
        flags.setflags(write=False)
        return FitResult(None, flags, float("nan"), status, nodes)
    nf = design.n_features
    weights = inc.coef[:nf]
    intercept = float(inc.coef[nf]) if design.has_intercept else 0.0
    model = Model(
        weights=weights,
        intercept=intercept,
        standardizer=design.standardizer,
        config_echo=config,
        meta={"solver": "branch-and-bound", "nodes_explored": nodes},
    )
    flags = inc.flags.copy()
    flags.setflags(write=False)
    objective = float(np.sum(np.abs(weights)))
    return FitResult(model, flags, objective, FitStatus.PROVEN_OPTIMAL, nodes)


def fit(data: Dataset, config: FitConfig) -> FitResult:
    """Global optimum of the budgeted tube fit, proven by branch and bound.

    Among optima whose objectives tie within 1e-9 the returned outlier
    flag vector is kept lexicographically small (prefer keeping earlier
    rows as inliers), which also pins the all-budget corner: with c = 1
    only rows violating the tube at w = 0 are flagged.
    """
    if data.m < 1:
        raise ValueError("fit requires at least one observation")
    budget = config.outlier_budget(data.m)
    logger.info("outlier budget %d of %d rows", budget, data.m)
    return _fit_with_budget(data, config, budget)


def _fit_with_budget(data: Dataset, config: FitConfig, budget: int) -> FitResult:
    design = _build_design(data, config)
    delta = config.delta
    m = data.m
    X = design.dataset.features
    y = design.dataset.response

    inc: Optional[_Incumbent] = None
    nodes = 0

    heur = _greedy_trim(design, delta, budget)
    if heur is not None:
        coef, objective, dropped = heur
        inc = _consider(inc, m, objective, dropped, coef)

    def visit(inliers: list[int], outliers: list[int], undecided: list[int], cached):
        nonlocal inc, nodes
        nodes += 1
        if len(outliers) == budget or not undecided:
            # Leaf: whatever is undecided must hold; one LP decides.
            if not undecided and cached is not None:
                sol, coef = cached
            else:
                sol, coef = _solve_rows(design, delta, sorted(inliers + undecided))
            if sol.status is LpStatus.OPTIMAL:
                inc = _consider(inc, m, sol.objective, outliers, coef)
            return
        if cached is not None:
            sol, coef = cached
        else:
            sol, coef = _solve_rows(design, delta, sorted(inliers))
        if sol.status is not LpStatus.OPTIMAL:
            return  # committed rows already conflict: every completion fails
        if inc is not None and sol.objective >= inc.objective - _PRUNE_TOL:
            return
        resid = y - X @ coef
        violation = np.abs(resid) - delta
        violated = [i for i in undecided if violation[i] > _VIOLATION_TOL]
        if not violated:
            # The node coefficients already satisfy every undecided row, so
            # the bound is attained: fathom with the node's own solution.
            inc = _consider(inc, m, sol.objective, outliers, coef)
            return
        if len(outliers) + len(violated) <= budget:
            # Flagging exactly the violated rows completes the node at its
            # bound, which no completion can beat.
            inc = _consider(inc, m, sol.objective, outliers + violated, coef)
            return
        branch = violated[
            int(np.argmax([violation[i] for i in violated]))
        ]  # ties fall to the lowest index via argmax-first semantics
        rest = [i for i in undecided if i != branch]
        visit(inliers, outliers + [branch], rest, (sol, coef))
        visit(inliers + [branch], outliers, rest, None)

    visit([], [], list(range(m)), None)
    return _finish(inc, design, config, budget, nodes)


def enumerate_exact(data: Dataset, config: FitConfig, max_m: int = 15) -> FitResult:
    """Brute-force ground truth: one inner LP per admissible outlier subset.

    Shares the tie-breaking contract with :func:`fit`.  Refuses datasets
    with more than ``max_m`` rows to guard against combinatorial blow-up.
    """
    if data.m < 1:
        raise ValueError("enumerate_exact requires at least one observation")
    if data.m > max_m:
        raise ValueError(
            f"enumerate_exact refused: m={data.m} exceeds max_m={max_m}"
        )
    budget = config.outlier_budget(data.m)
    design = _build_design(data, config)
    m = data.m
    inc: Optional[_Incumbent] = None
    count = 0
    everything = set(range(m))
    for size in range(budget + 1):
        for subset in combinations(range(m), size):
            count += 1
            rows = sorted(everything - set(subset))
            sol, coef = _solve_rows(design, config.delta, rows)
            if sol.status is LpStatus.OPTIMAL:
                inc = _consider(inc, m, sol.objective, subset, coef)
    result = _finish(inc, design, config, budget, count)
    return replace(result, oracle_verified=True)


def _upper_bounds(design: _Design, delta: float, budget: int) -> tuple[float, float]:
    """(U, Bb): U bounds the optimal penalized L1 norm, Bb the optimal
    absolute intercept (0.0 when the design has no intercept column)."""
    heur = _greedy_trim(design, delta, budget)
    if heur is not None:
        u = heur[1]
    else:
        # Fallback: least-squares coefficients on all rows.
        coef = _least_squares(design.dataset.features, design.dataset.response)
        u = float(np.sum(np.abs(coef[: design.n_features])))
        logger.warning(
            "greedy trim found no feasible subset; big-M uses the "
            "least-squares fallback bound (prefer the indicator-form fit)"
        )
    if not design.has_intercept:
        return u, 0.0
    y = design.dataset.response
    feats = design.dataset.features[:, : design.n_features]
    xmax = float(np.abs(feats).max()) if feats.size else 0.0
    ymax = float(np.abs(y).max()) if y.size else 0.0
    # Any optimum keeps at least one row in the tube, which caps |b|.
    bb = ymax + u * xmax + delta
    return u, bb


def compute_big_m(data: Dataset, config: FitConfig) -> np.ndarray:
    """Per-row deactivation constants M_i = |y_i| + U * max_j |x_ij| + delta
    where U is a heuristic upper bound on the optimal penalized L1 norm,
    so a flagged row is guaranteed inactive at any candidate optimum."""
    if data.m < 1:
        raise ValueError("compute_big_m requires at least one observation")
    design = _build_design(data, config)
    budget = config.outlier_budget(data.m)
    return _big_m_from_design(design, config.delta, budget)


def _big_m_from_design(design: _Design, delta: float, budget: int) -> np.ndarray:
    u, bb = _upper_bounds(design, delta, budget)
    feats = design.dataset.features[:, : design.n_features]
    y = design.dataset.response
    row_max = np.abs(feats).max(axis=1) if feats.size else np.zeros(len(y))
    big_m = np.abs(y) + u * row_max + bb + delta
    big_m.setflags(write=False)
    return big_m


def export_milp(data: Dataset, config: FitConfig) -> MilpExport:
    """Emit the budgeted tube fit as LP-format MILP text with big-M rows.

    Two rows per observation encode
    ``-delta - M_i lam_i <= y_i - w . x_i <= delta + M_i lam_i``,
    one budget row caps the binary flags, and the objective is the sum of
    the split coefficient variables (intercept column, when present, is
    unpenalized and therefore absent from the objective).
    """
    if data.m < 1:
        raise ValueError("export_milp requires at least one observation")
    design = _build_design(data, config)
    budget = config.outlier_budget(data.m)
    big_m = _big_m_from_design(design, config.delta, budget)

    X = design.dataset.features
    y = design.dataset.response
    m, p = X.shape
    delta = config.delta

    objective = {}
    for j in range(p):
        if design.penalties[j] > 0.0:
            objective[f"wp{j}"] = design.penalties[j]
            objective[f"wn{j}"] = design.penalties[j]

    rows = []
    for i in range(m):
        lo = {}
        hi = {}
        for j in range(p):
            v = X[i, j]
            if v != 0.0:
                lo[f"wp{j}"] = v
                lo[f"wn{j}"] = -v
                hi[f"wp{j}"] = v
                hi[f"wn{j}"] = -v
        lo[f"lam{i}"] = big_m[i]
        hi[f"lam{i}"] = -big_m[i]
        rows.append(LpRow(f"r{i}_lo", lo, ">=", float(y[i] - delta)))
        rows.append(LpRow(f"r{i}_hi", hi, "<=", float(y[i] + delta)))
    rows.append(
        LpRow("budget", {f"lam{i}": 1.0 for i in range(m)}, "<=", float(budget))
    )

    binaries = [f"lam{i}" for i in range(m)]
    nonneg = [f"wp{j}" for j in range(p)] + [f"wn{j}" for j in range(p)]
    text = write_milp(objective, rows, binaries, nonneg)
    return MilpExport(big_m=big_m, text=text)


def milp_assignment(result: FitResult) -> dict:
    """Variable assignment for the exported MILP from a fit result: split
    coefficients (intercept included as the last pair when fitted) plus
    the binary flags.  Useful for substitution checks."""
    if result.model is None:
        raise ValueError("no model to substitute")
    model = result.model
    coef = list(model.weights)
    if model.config_echo is not None and model.config_echo.fit_intercept:
        coef.append(model.intercept)
    values = {}
    for j, w in enumerate(coef):
        values[f"wp{j}"] = max(w, 0.0)
        values[f"wn{j}"] = max(-w, 0.0)
    for i, flagged in enumerate(result.outlier_flags):
        values[f"lam{i}"] = 1.0 if flagged else 0.0
    return values
