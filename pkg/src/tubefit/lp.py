"""Dense two-phase primal simplex and the tube-constraint LP builder.

The inner problem solved here: minimize a weighted L1 norm of the
coefficient vector subject to each selected observation lying inside a
response tube of half-width ``delta``.  The absolute-value objective is
handled by the classic positive/negative variable split (w = w+ - w-,
both >= 0), never by iterative reweighting, because the integer layer
above needs exact bounds.

The solver is a textbook dense tableau simplex at desk scale: Dantzig
pricing, switching to Bland's rule after a fixed streak of degenerate
pivots so cycling is impossible, and a clean primal/dual recomputation
from the final basis so the reported solution does not carry tableau
round-off.  Pivot tolerance is 1e-10 and feasibility tolerance 1e-9;
entries below the pivot tolerance are treated as zero.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

import numpy as np

from .core import Dataset, DimensionError, NumericalError

__all__ = [
    "LpStatus",
    "LpProblem",
    "LpSolution",
    "build_l1_tube_lp",
    "solve",
]

PIVOT_TOL = 1e-10
FEAS_TOL = 1e-9
DEGENERATE_SWITCH = 50  # consecutive degenerate pivots before Bland's rule
_RATIO_ZERO = 1e-12

_SENSES = ("<=", "=", ">=")
_FLIP = {"<=": ">=", ">=": "<=", "=": "="}


class LpStatus(Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LpProblem:
    """A standard-form LP: minimize costs . x subject to row senses and
    x >= variable_lower_bounds (all zero in standard form)."""

    costs: np.ndarray
    constraint_matrix: np.ndarray
    rhs: np.ndarray
    row_senses: tuple[str, ...]
    variable_lower_bounds: np.ndarray = None  # defaults to zeros

    def __post_init__(self):
        c = np.array(self.costs, dtype=float)
        A = np.array(self.constraint_matrix, dtype=float)
        b = np.array(self.rhs, dtype=float)
        if c.ndim != 1 or A.ndim != 2 or b.ndim != 1:
            raise DimensionError("costs/matrix/rhs must be 1-D/2-D/1-D")
        if A.shape != (b.shape[0], c.shape[0]):
            raise DimensionError(
                f"matrix shape {A.shape} inconsistent with {b.shape[0]} rows "
                f"and {c.shape[0]} variables"
            )
        senses = tuple(self.row_senses)
        if len(senses) != b.shape[0] or any(s not in _SENSES for s in senses):
            raise ValueError("row_senses must be one of <=, =, >= per row")
        lb = self.variable_lower_bounds
        lb = np.zeros(c.shape[0]) if lb is None else np.array(lb, dtype=float)
        if lb.shape != c.shape or np.any(lb != 0.0):
            raise ValueError("standard form requires all-zero lower bounds")
        for arr in (c, A, b):
            if arr.size and not np.all(np.isfinite(arr)):
                raise ValueError("LP data must be finite")
            arr.setflags(write=False)
        lb.setflags(write=False)
        object.__setattr__(self, "costs", c)
        object.__setattr__(self, "constraint_matrix", A)
        object.__setattr__(self, "rhs", b)
        object.__setattr__(self, "row_senses", senses)
        object.__setattr__(self, "variable_lower_bounds", lb)


@dataclass(frozen=True)
class LpSolution:
    """Primal/dual answer.  ``primal`` and ``dual`` are populated only for
    OPTIMAL status; strong duality then holds up to
    |costs.primal - rhs.dual| <= 1e-7 * (1 + |objective|)."""

    status: LpStatus
    primal: Optional[np.ndarray]
    dual: Optional[np.ndarray]
    objective: float


def build_l1_tube_lp(
    data: Dataset,
    inlier_indices: Sequence[int],
    delta: float,
    penalty_weights: Sequence[float],
) -> LpProblem:
    """LP whose optimum is min sum_j penalty_j * |w_j| subject to
    |y_i - w . x_i| <= delta for every selected row i.

    Variables are ordered wp_0..wp_{n-1}, wn_0..wn_{n-1} with w = wp - wn.
    Each tube constraint expands to a pair of rows (lower then upper).  An
    empty selection is allowed and yields an LP with no rows.
    """
    if delta < 0.0:
        raise ValueError("delta must be >= 0")
    pen = np.asarray(penalty_weights, dtype=float)
    if pen.shape != (data.n,):
        raise DimensionError(
            f"penalty_weights must have length {data.n}, got {pen.shape}"
        )
    if np.any(pen < 0.0) or not np.all(np.isfinite(pen)):
        raise ValueError("penalty weights must be finite and >= 0")
    idx = sorted(set(int(i) for i in inlier_indices))
    if idx and (idx[0] < 0 or idx[-1] >= data.m):
        raise ValueError(f"inlier indices must lie in [0, {data.m})")

    n = data.n
    r = len(idx)
    A = np.zeros((2 * r, 2 * n))
    rhs = np.zeros(2 * r)
    if r:
        Xs = data.features[idx]
        ys = data.response[idx]
        A[0::2, :n] = Xs
        A[0::2, n:] = -Xs
        A[1::2, :n] = Xs
        A[1::2, n:] = -Xs
        rhs[0::2] = ys - delta
        rhs[1::2] = ys + delta
    senses = (">=", "<=") * r
    costs = np.concatenate([pen, pen])
    return LpProblem(costs, A, rhs, senses)


def solve(problem: LpProblem) -> LpSolution:
    """Two-phase primal simplex.  Deterministic for identical input; raises
    NumericalError instead of ever reporting a wrong OPTIMAL."""
    A = problem.constraint_matrix
    b = problem.rhs
    c = problem.costs
    senses = list(problem.row_senses)
    k, nv = A.shape

    # Normalize to b >= 0; remember flips to restore dual signs later.
    A2 = A.copy()
    b2 = b.copy()
    flipped = b2 < 0.0
    if flipped.any():
        A2[flipped] *= -1.0
        b2[flipped] *= -1.0
        for i in np.flatnonzero(flipped):
            senses[i] = _FLIP[senses[i]]

    # Column layout: original variables, one slack per inequality row,
    # then artificials for >= and = rows.
    slack_col = {}
    cols = nv
    for i, s in enumerate(senses):
        if s in ("<=", ">="):
            slack_col[i] = cols
            cols += 1
    art_start = cols
    art_col = {}
    for i, s in enumerate(senses):
        if s in (">=", "="):
            art_col[i] = cols
            cols += 1

    M0 = np.zeros((k, cols))
    M0[:, :nv] = A2
    basis = np.zeros(k, dtype=int)
    for i, s in enumerate(senses):
        if s == "<=":
            M0[i, slack_col[i]] = 1.0
            basis[i] = slack_col[i]
        elif s == ">=":
            M0[i, slack_col[i]] = -1.0
            M0[i, art_col[i]] = 1.0
            basis[i] = art_col[i]
        else:
            M0[i, art_col[i]] = 1.0
            basis[i] = art_col[i]

    T = np.zeros((k + 1, cols + 1))
    T[:k, :cols] = M0
    T[:k, -1] = b2
    enterable = np.ones(cols, dtype=bool)
    enterable[art_start:] = False  # artificials may leave but never re-enter

    if art_start < cols:
        z = np.zeros(cols + 1)
        z[art_start:cols] = 1.0
        for i in range(k):
            if basis[i] >= art_start:
                z -= T[i]
        T[-1] = z
        outcome = _run_simplex(T, basis, enterable)
        if outcome != "optimal":
            raise NumericalError("phase 1 terminated abnormally")
        phase1_obj = -T[-1, -1]
        if phase1_obj > FEAS_TOL * (1.0 + (b2.max() if k else 0.0)):
            return LpSolution(LpStatus.INFEASIBLE, None, None, float("nan"))
        # Drive artificials out of the basis where a well-scaled pivot
        # exists (largest magnitude keeps the basis conditioned); rows
        # where none exists are redundant and keep their artificial basic
        # at value zero.
        for i in range(k):
            if basis[i] >= art_start:
                row = np.where(enterable, np.abs(T[i, :cols]), 0.0)
                j = int(np.argmax(row))
                if row[j] > 1e-7:
                    _pivot(T, i, j)
                    basis[i] = j

    c_ext = np.zeros(cols)
    c_ext[:nv] = c
    z = np.concatenate([c_ext, [0.0]])
    for i in range(k):
        cbi = c_ext[basis[i]]
        if cbi != 0.0:
            z -= cbi * T[i]
    T[-1] = z
    outcome = _run_simplex(T, basis, enterable)
    if outcome == "unbounded":
        return LpSolution(LpStatus.UNBOUNDED, None, None, float("nan"))

    def _audit(primal: np.ndarray) -> bool:
        # Tolerances scale with the evaluation magnitude: a solution of
        # size 1e7 cannot satisfy rows to 1e-9 absolute because the dot
        # products themselves round at that level.
        scale = 1.0 + float(np.max(primal, initial=0.0))
        if np.any(primal < -FEAS_TOL * scale):
            return False
        if not k:
            return True
        lhs = A @ primal
        mags = np.abs(A) @ np.abs(primal)
        for i, s in enumerate(problem.row_senses):
            tol_i = FEAS_TOL * (1.0 + abs(b[i]) + mags[i])
            diff = lhs[i] - b[i]
            if (
                (s == "<=" and diff > tol_i)
                or (s == ">=" and diff < -tol_i)
                or (s == "=" and abs(diff) > tol_i)
            ):
                return False
        return True

    # Preferred extraction: recompute primal and dual from the pristine
    # basis columns, which strips tableau drift.  When that system is too
    # ill-conditioned to pass the feasibility audit, fall back to the
    # tableau's own values; if neither passes, refuse to certify.
    primal = None
    y = np.zeros(k)
    if k:
        try:
            B = M0[:, basis]
            x = np.zeros(cols)
            x[basis] = np.linalg.solve(B, b2)
            cand = x[:nv].copy()
            if _audit(cand):
                primal = cand
                y = np.linalg.solve(B.T, c_ext[basis])
        except np.linalg.LinAlgError:
            primal = None
    else:
        primal = np.zeros(nv)
    if primal is None:
        x = np.zeros(cols)
        x[basis] = T[:k, -1]
        primal = x[:nv].copy()
        if not _audit(primal):
            raise NumericalError("optimal basis failed the feasibility audit")
        # Each row owns a +1 identity column (slack for <=, artificial
        # otherwise); its reduced cost there is -y_i.
        for i in range(k):
            col = art_col[i] if i in art_col else slack_col[i]
            y[i] = -T[-1, col]
    if k:
        y = y.copy()
        y[flipped] *= -1.0

    objective = float(np.dot(c, primal))
    primal.setflags(write=False)
    y.setflags(write=False)
    return LpSolution(LpStatus.OPTIMAL, primal, y, objective)


def _pivot(T: np.ndarray, r: int, j: int) -> None:
    prow = T[r] / T[r, j]
    colv = T[:, j].copy()
    T -= colv[:, None] * prow
    T[r] = prow  # exact unit pivot row; column j is now e_r


def _run_simplex(T: np.ndarray, basis: np.ndarray, enterable: np.ndarray) -> str:
    """Minimize the tableau's cost row.  Returns 'optimal' or 'unbounded'."""
    k = T.shape[0] - 1
    max_iter = 1000 + 50 * (T.shape[0] + T.shape[1])
    degen = 0
    bland = False
    masked = np.empty(T.shape[1] - 1)
    ratios = np.empty(k)
    not_enterable = ~enterable
    inf = np.inf
    for _ in range(max_iter):
        red = T[-1, :-1]
        if bland:
            cand = np.flatnonzero(enterable & (red < -PIVOT_TOL))
            if cand.size == 0:
                return "optimal"
            j = int(cand[0])
        else:
            np.copyto(masked, red)
            masked[not_enterable] = 0.0
            j = int(np.argmin(masked))
            if masked[j] >= -PIVOT_TOL:
                return "optimal"
        if k == 0:
            return "unbounded"
        col = T[:k, j]
        np.divide(T[:k, -1], col, out=ratios, where=col > PIVOT_TOL)
        ratios[col <= PIVOT_TOL] = inf
        r = int(np.argmin(ratios))
        rmin = ratios[r]
        if rmin == inf:
            return "unbounded"
        tied = np.flatnonzero(ratios == rmin)
        if tied.size > 1:
            r = int(tied[np.argmin(basis[tied])])  # smallest basic label
        degenerate = rmin <= _RATIO_ZERO
        _pivot(T, r, j)
        basis[r] = j
        if degenerate:
            degen += 1
            if degen >= DEGENERATE_SWITCH:
                bland = True
        else:
            degen = 0
            bland = False
    raise NumericalError("simplex iteration limit exceeded")
