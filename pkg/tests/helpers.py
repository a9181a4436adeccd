"""Shared test utilities: random instance generators and independent
oracles that never call the code paths they check."""

from itertools import combinations

import numpy as np

from tubefit import Dataset, FitConfig
from tubefit.lp import LpProblem, LpStatus


def random_instance(rng) -> tuple[Dataset, FitConfig]:
    """Small random fitting instance mixing clean rows and gross errors."""
    m = int(rng.integers(4, 13))
    n = int(rng.integers(1, 6))
    delta = float(rng.choice([0.0, 0.1, 0.5]))
    c = float(rng.choice([0.0, 0.1, 0.25, 0.5]))
    X = rng.standard_normal((m, n))
    w = np.zeros(n)
    k = int(rng.integers(1, n + 1))
    w[rng.choice(n, k, replace=False)] = rng.uniform(-2.0, 2.0, k)
    y = X @ w + rng.uniform(-0.2, 0.2, m)
    nout = int(rng.integers(0, 3))
    if nout:
        y[rng.choice(m, nout, replace=False)] += rng.choice([-4.0, 4.0], nout)
    return Dataset(X, y), FitConfig(delta=delta, c=c)


def random_feasible_lp(rng) -> LpProblem:
    """Standard-form LP guaranteed feasible (built around a known point)
    and bounded (nonnegative costs, so the objective is bounded by 0)."""
    nv = int(rng.integers(1, 5))
    k = int(rng.integers(0, 7))
    A = rng.normal(size=(k, nv))
    x0 = rng.uniform(0.0, 2.0, nv)
    senses = []
    b = np.empty(k)
    lhs = A @ x0 if k else np.empty(0)
    for i in range(k):
        s = ["<=", ">=", "="][int(rng.integers(0, 3))]
        senses.append(s)
        if s == "<=":
            b[i] = lhs[i] + rng.uniform(0.0, 1.0)
        elif s == ">=":
            b[i] = lhs[i] - rng.uniform(0.0, 1.0)
        else:
            b[i] = lhs[i]
    costs = rng.uniform(0.0, 2.0, nv)
    costs[rng.random(nv) < 0.2] = 0.0
    return LpProblem(costs, A, b, tuple(senses))


def vertex_oracle(problem: LpProblem, tol: float = 1e-7):
    """Exhaustive vertex enumeration for small standard-form LPs.

    Returns (status, objective).  Sound because x >= 0 makes the feasible
    region pointed: if it is nonempty and the objective bounded, some
    vertex attains the minimum.
    """
    A = problem.constraint_matrix
    b = problem.rhs
    c = problem.costs
    k, nv = A.shape

    # Halfspace list: every row plus the coordinate planes.
    normals = [A[i] for i in range(k)]
    offsets = [b[i] for i in range(k)]
    for j in range(nv):
        e = np.zeros(nv)
        e[j] = 1.0
        normals.append(e)
        offsets.append(0.0)
    eq_rows = [i for i, s in enumerate(problem.row_senses) if s == "="]
    others = [i for i in range(len(normals)) if i not in eq_rows]

    def feasible(x) -> bool:
        if np.any(x < -tol):
            return False
        lhs = A @ x if k else np.empty(0)
        for i, s in enumerate(problem.row_senses):
            d = lhs[i] - b[i]
            if s == "<=" and d > tol:
                return False
            if s == ">=" and d < -tol:
                return False
            if s == "=" and abs(d) > tol:
                return False
        return True

    best = None
    need = nv - len(eq_rows)
    if need < 0:
        return ("infeasible", None)
    for combo in combinations(others, need):
        active = eq_rows + list(combo)
        M = np.array([normals[i] for i in active])
        rhs = np.array([offsets[i] for i in active])
        try:
            x = np.linalg.solve(M, rhs)
        except np.linalg.LinAlgError:
            continue
        if np.max(np.abs(M @ x - rhs)) > 1e-6 * (1.0 + np.max(np.abs(rhs))):
            continue  # nearly singular active set
        if feasible(x):
            value = float(c @ x)
            if best is None or value < best:
                best = value
    if best is None:
        return ("infeasible", None)
    return ("optimal", best)


def status_name(status: LpStatus) -> str:
    return status.value
