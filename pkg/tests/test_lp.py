import numpy as np
import pytest

from tubefit import Dataset, LpProblem, LpStatus, build_l1_tube_lp, solve

from helpers import random_feasible_lp, vertex_oracle


def tube_lp(xs, ys, delta, idx=None):
    X = np.asarray(xs, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    ds = Dataset(X, np.asarray(ys, dtype=float))
    if idx is None:
        idx = range(ds.m)
    return build_l1_tube_lp(ds, idx, delta, np.ones(ds.n))


class TestBuilder:
    def test_no_rows_unconstrained_minimum(self):
        sol = solve(tube_lp([1.0, 2.0], [2.0, 4.0], 0.144, idx=[]))
        assert sol.status is LpStatus.OPTIMAL
        assert sol.objective == 0.0
        assert np.all(sol.primal == 0.0)

    def test_two_point_tube_value(self):
        # Feasible slope interval [1.928, 2.072]; L1 minimum at the left end.
        sol = solve(tube_lp([1.0, 2.0], [2.0, 4.0], 0.144))
        assert sol.status is LpStatus.OPTIMAL
        assert sol.objective == pytest.approx(1.928, abs=1e-9)
        w = sol.primal[0] - sol.primal[1]
        assert w == pytest.approx(1.928, abs=1e-9)

    def test_disjoint_tubes_infeasible(self):
        sol = solve(tube_lp([1.0, 1.0], [0.0, 1.0], 0.2))
        assert sol.status is LpStatus.INFEASIBLE

    def test_row_count_and_senses(self):
        lp = tube_lp([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], 0.5)
        assert lp.constraint_matrix.shape == (6, 2)
        assert lp.row_senses == (">=", "<=") * 3

    def test_index_validation(self):
        with pytest.raises(ValueError):
            tube_lp([1.0], [1.0], 0.1, idx=[3])


class TestSolve:
    def test_min_x_lower_bounded(self):
        p = LpProblem(np.array([1.0]), np.array([[1.0]]), np.array([3.0]), (">=",))
        sol = solve(p)
        assert sol.status is LpStatus.OPTIMAL
        assert sol.objective == pytest.approx(3.0, abs=1e-9)

    def test_unbounded(self):
        p = LpProblem(np.array([-1.0]), np.array([[0.0]]), np.array([1.0]), ("<=",))
        assert solve(p).status is LpStatus.UNBOUNDED

    def test_no_rows_negative_cost_unbounded(self):
        p = LpProblem(np.array([-1.0]), np.empty((0, 1)), np.empty(0), ())
        assert solve(p).status is LpStatus.UNBOUNDED

    def test_equality_rows(self):
        # x + y = 2, x - y = 0 -> x = y = 1
        p = LpProblem(
            np.array([1.0, 2.0]),
            np.array([[1.0, 1.0], [1.0, -1.0]]),
            np.array([2.0, 0.0]),
            ("=", "="),
        )
        sol = solve(p)
        assert sol.status is LpStatus.OPTIMAL
        assert sol.primal == pytest.approx([1.0, 1.0], abs=1e-9)

    def test_redundant_rows(self):
        p = LpProblem(
            np.array([1.0]),
            np.array([[1.0], [1.0]]),
            np.array([2.0, 2.0]),
            ("=", "="),
        )
        sol = solve(p)
        assert sol.status is LpStatus.OPTIMAL
        assert sol.objective == pytest.approx(2.0, abs=1e-9)

    def test_beale_cycling_guard(self):
        # Classic degenerate instance that cycles under naive Dantzig
        # pricing; the degenerate-streak switch to Bland's rule must
        # terminate at the true optimum.
        A = np.array(
            [
                [0.25, -60.0, -1.0 / 25.0, 9.0],
                [0.5, -90.0, -1.0 / 50.0, 3.0],
                [0.0, 0.0, 1.0, 0.0],
            ]
        )
        b = np.array([0.0, 0.0, 1.0])
        c = np.array([-0.75, 150.0, -0.02, 6.0])
        p = LpProblem(c, A, b, ("<=", "<=", "<="))
        sol = solve(p)
        assert sol.status is LpStatus.OPTIMAL
        status, expected = vertex_oracle(p)
        assert status == "optimal"
        assert sol.objective == pytest.approx(expected, abs=1e-9)

    def test_deterministic(self):
        rng = np.random.default_rng(33)
        p = random_feasible_lp(rng)
        a = solve(p)
        b = solve(p)
        assert a.objective == b.objective
        assert np.array_equal(a.primal, b.primal)
        assert np.array_equal(a.dual, b.dual)


def check_optimal_certificates(problem, sol):
    """Feasibility, duality gap, dual feasibility per the solution contract."""
    A = problem.constraint_matrix
    b = problem.rhs
    c = problem.costs
    x = sol.primal
    y = sol.dual
    assert np.all(x >= -1e-9)
    lhs = A @ x if A.shape[0] else np.empty(0)
    for i, s in enumerate(problem.row_senses):
        d = lhs[i] - b[i]
        if s == "<=":
            assert d <= 1e-9
            assert y[i] <= 1e-9
        elif s == ">=":
            assert d >= -1e-9
            assert y[i] >= -1e-9
        else:
            assert abs(d) <= 1e-9
    gap = abs(float(c @ x) - float(b @ y)) if A.shape[0] else abs(float(c @ x))
    assert gap <= 1e-7 * (1.0 + abs(sol.objective))
    reduced = c - (A.T @ y if A.shape[0] else 0.0)
    assert np.all(reduced >= -1e-9)


class TestCertificates:
    def test_duality_battery(self):
        rng = np.random.default_rng(404)
        optimal = 0
        for _ in range(120):
            p = random_feasible_lp(rng)
            sol = solve(p)
            assert sol.status is LpStatus.OPTIMAL
            check_optimal_certificates(p, sol)
            optimal += 1
        assert optimal == 120

    def test_oracle_cross_check_tube_instances(self):
        # n <= 3, at most 3 points (6 tube rows): vertex enumeration in the
        # split space is the independent reference.
        rng = np.random.default_rng(77)
        checked = 0
        while checked < 25:
            n = int(rng.integers(1, 4))
            pts = int(rng.integers(0, 4))
            X = rng.normal(size=(pts, n))
            y = rng.normal(size=pts) * 2.0
            delta = float(rng.uniform(0.05, 1.0))
            ds = Dataset(X, y) if pts else Dataset(np.empty((0, n)), np.empty(0))
            p = build_l1_tube_lp(ds, range(pts), delta, np.ones(n))
            status, expected = vertex_oracle(p)
            sol = solve(p)
            if status == "infeasible":
                assert sol.status is LpStatus.INFEASIBLE
            else:
                assert sol.status is LpStatus.OPTIMAL
                assert sol.objective == pytest.approx(expected, abs=1e-6)
            checked += 1


class TestInvariances:
    def test_objective_monotone_in_delta(self):
        rng = np.random.default_rng(8)
        X = rng.normal(size=(6, 2))
        y = X @ np.array([1.5, -2.0]) + rng.uniform(-0.1, 0.1, 6)
        ds = Dataset(X, y)
        prev = None
        for delta in [0.05, 0.1, 0.2, 0.4, 0.8]:
            sol = solve(build_l1_tube_lp(ds, range(6), delta, np.ones(2)))
            assert sol.status is LpStatus.OPTIMAL
            if prev is not None:
                assert sol.objective <= prev + 1e-9
            prev = sol.objective

    def test_scale_equivariance(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(5, 2))
        y = X @ np.array([1.0, 0.5]) + rng.uniform(-0.05, 0.05, 5)
        ds = Dataset(X, y)
        base = solve(build_l1_tube_lp(ds, range(5), 0.1, np.ones(2)))
        scaled_ds = Dataset(X, 3.0 * y)
        scaled = solve(build_l1_tube_lp(scaled_ds, range(5), 3.0 * 0.1, np.ones(2)))
        assert scaled.objective == pytest.approx(
            3.0 * base.objective, rel=1e-9, abs=1e-12
        )
