"""
Tests for the Lasso baselines
"""
import numpy as np
import pandas as pd
import pytest
from hypothesis import given, strategies as st

from baselines import (
    LassoProblem,
    check_kkt,
    fista,
    ista,
    lambda_grid,
    lambda_max,
    lasso_cv,
    lasso_path,
    lipschitz_constant,
    soft_threshold,
)
from conftest import make_problem
from design.dataset import Dataset
from utils.errors import ConfigurationError, DegenerateInputError

finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False)
thresholds = st.floats(min_value=0.0, max_value=1e3, allow_nan=False)


def random_dataset(n, p, seed):
    rng = np.random.default_rng(seed)
    X = rng.standard_normal((n, p))
    beta = np.zeros(p)
    beta[:3] = [1.5, -2.0, 1.0]
    return Dataset(X=X, y=X @ beta + 0.1 * rng.standard_normal(n))


class TestSoftThreshold:
    def test_values(self):
        assert np.array_equal(soft_threshold(np.array([3.0, -0.5, -4.0]), 1.0), [2.0, 0.0, -3.0])

    def test_negative_threshold(self):
        with pytest.raises(ConfigurationError):
            soft_threshold(np.ones(2), -0.1)

    @given(finite, thresholds)
    def test_odd(self, x, lam):
        assert soft_threshold(-x, lam) == -soft_threshold(x, lam)

    @given(finite, finite, thresholds)
    def test_nonexpansive(self, x, z, lam):
        assert abs(soft_threshold(x, lam) - soft_threshold(z, lam)) <= abs(x - z) * (1 + 1e-12) + 1e-9

    @given(finite, thresholds)
    def test_shrinks_toward_zero(self, x, lam):
        assert abs(soft_threshold(x, lam)) <= abs(x)


class TestSolvers:
    @pytest.mark.parametrize("seed", range(4))
    def test_fista_satisfies_kkt(self, seed):
        ds = random_dataset(40, 60, seed)
        prob = LassoProblem(ds, 0.2 * lambda_max(ds))
        solution = fista(prob, tol=1e-8)
        assert solution.converged
        assert check_kkt(prob, solution.beta, 1e-6).ok

    def test_large_lambda_gives_zero(self):
        ds = random_dataset(30, 20, 1)
        solution = fista(LassoProblem(ds, 1.01 * lambda_max(ds)))
        assert np.array_equal(solution.beta, np.zeros(20))
        assert solution.converged

    def test_ista_and_fista_agree(self, overdetermined):
        _, ds = overdetermined
        prob = LassoProblem(ds, 0.05)
        slow, fast = ista(prob, tol=1e-10), fista(prob, tol=1e-10)
        assert slow.objective == pytest.approx(fast.objective, abs=1e-8)
        assert np.allclose(slow.beta, fast.beta, atol=1e-6)

    def test_restart_keeps_the_objective_monotone(self):
        ds = random_dataset(40, 60, 7)
        solution = fista(LassoProblem(ds, 0.1 * lambda_max(ds)), restart=True, track=True, max_iter=500)
        assert np.all(np.diff(solution.history) <= 1e-12)

    def test_restart_clears_the_momentum(self):
        _, ds = make_problem(50, 20, [1.0, -2.0, 1.5], sigma=0.1, seed=6, kind="equicorrelated", rho=0.9)
        prob = LassoProblem(ds, 0.01 * lambda_max(ds))
        L = lipschitz_constant(ds)
        solution = fista(prob, tol=0.0, max_iter=150, L=L, restart=True, track=True)
        assert solution.restarts >= 1

        # Reference loop: a restart replaces the step by a plain proximal step and drops the momentum
        beta = point = np.zeros(ds.p)
        t, objective = 1.0, prob.objective(beta)
        for _ in range(150):
            updated = soft_threshold(point - prob.gradient(point) / L, prob.lam / L)
            t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
            if prob.objective(updated) > objective:
                updated = soft_threshold(beta - prob.gradient(beta) / L, prob.lam / L)
                t_next, point = 1.0, updated
            else:
                point = updated + ((t - 1.0) / t_next) * (updated - beta)
            objective = prob.objective(updated)
            beta, t = updated, t_next
        assert np.allclose(solution.beta, beta, atol=1e-12)
        assert np.all(np.diff(solution.history) <= 1e-12)

    def test_fista_needs_no_more_iterations_than_ista(self):
        faster = 0
        for seed in range(20):
            ds = random_dataset(40, 60, 100 + seed)
            prob = LassoProblem(ds, 0.1 * lambda_max(ds))
            faster += fista(prob, tol=1e-6).iters <= ista(prob, tol=1e-6).iters
        assert faster >= 18

    def test_fista_objective_after_100_steps(self):
        ds = random_dataset(50, 100, 12)
        prob = LassoProblem(ds, 0.05 * lambda_max(ds))
        L = lipschitz_constant(ds)
        accelerated = fista(prob, tol=0.0, max_iter=100, L=L)
        plain = ista(prob, tol=0.0, max_iter=100, L=L)
        assert accelerated.objective <= plain.objective

    def test_ista_objective_is_monotone(self):
        ds = random_dataset(40, 60, 8)
        solution = ista(LassoProblem(ds, 0.1 * lambda_max(ds)), track=True, max_iter=300)
        assert np.all(np.diff(solution.history) <= 1e-12)

    def test_iteration_cap_is_reported(self):
        ds = random_dataset(40, 60, 2)
        solution = fista(LassoProblem(ds, 0.01 * lambda_max(ds)), tol=1e-14, max_iter=3)
        assert solution.iters == 3
        assert not solution.converged

    def test_negative_lambda(self, small_problem):
        _, ds = small_problem
        with pytest.raises(ConfigurationError):
            LassoProblem(ds, -1.0)

    def test_kkt_flags_a_wrong_point(self, small_problem):
        _, ds = small_problem
        prob = LassoProblem(ds, 0.01)
        report = check_kkt(prob, np.ones(ds.p), 1e-6)
        assert not report.ok and report.max_violation > 0


class TestLipschitz:
    def test_bounds_the_top_eigenvalue(self):
        ds = random_dataset(30, 10, 3)
        top = float(np.linalg.eigvalsh(ds.X.T @ ds.X / ds.n)[-1])
        assert top <= lipschitz_constant(ds) <= 1.01 * top

    def test_zero_design(self):
        assert lipschitz_constant(Dataset(X=np.zeros((3, 2)), y=np.ones(3))) == 1.0


class TestPath:
    def test_grid(self, small_problem):
        _, ds = small_problem
        grid = lambda_grid(ds)
        assert grid.size == 50
        assert grid[0] == pytest.approx(lambda_max(ds))
        assert grid[-1] == pytest.approx(1e-3 * lambda_max(ds))
        assert np.all(np.diff(grid) < 0)

    def test_grid_needs_correlation(self):
        with pytest.raises(DegenerateInputError):
            lambda_grid(Dataset(X=np.eye(2), y=np.zeros(2)))

    def test_l1_norm_grows_along_the_path(self, small_problem):
        _, ds = small_problem
        path = lasso_path(ds, lambda_grid(ds, size=15, ratio=0.01), tol=1e-9)
        assert np.all(np.diff(path.l1_norms) >= -1e-6)
        assert np.array_equal(path.betas[0], np.zeros(ds.p))

    def test_warm_and_cold_starts_agree(self, small_problem):
        _, ds = small_problem
        lambdas = lambda_grid(ds, size=5, ratio=0.05)
        warm = lasso_path(ds, lambdas, warm_start=True, tol=1e-10)
        cold = lasso_path(ds, lambdas, warm_start=False, tol=1e-10)
        for a, b in zip(warm.betas, cold.betas):
            assert np.allclose(a, b, atol=1e-6)

    @pytest.mark.parametrize("lambdas", [[], [0.1, 0.2], [0.1, 0.1], [0.1, -0.1]])
    def test_invalid_sequences(self, small_problem, lambdas):
        _, ds = small_problem
        with pytest.raises(ConfigurationError):
            lasso_path(ds, lambdas)

    def test_export(self, small_problem, tmp_path):
        truth, ds = small_problem
        path = lasso_path(ds, lambda_grid(ds, size=4, ratio=0.1))
        assert path.export_to_csv(str(tmp_path / "path.csv"), truth) == 4
        frame = pd.read_csv(tmp_path / "path.csv")
        assert list(frame.columns) == ["lambda", "l1_norm", "est_error"]


class TestCrossValidation:
    def test_selects_a_grid_point(self, small_problem):
        _, ds = small_problem
        grid = lambda_grid(ds, size=10, ratio=0.01)
        cv = lasso_cv(ds, k=5, lambdas=grid, seed=3)
        assert cv.lam in grid
        assert cv.best_index == int(np.argmin(cv.cv_error))
        assert cv.cv_error.shape == (10,)

    def test_refit_matches_a_direct_solve(self, small_problem):
        _, ds = small_problem
        grid = lambda_grid(ds, size=8, ratio=0.01)
        cv = lasso_cv(ds, k=4, lambdas=grid, tol=1e-10)
        direct = fista(LassoProblem(ds, cv.lam), tol=1e-10)
        assert np.allclose(cv.beta, direct.beta, atol=1e-6)

    def test_reproducible(self, small_problem):
        _, ds = small_problem
        grid = lambda_grid(ds, size=6, ratio=0.01)
        first = lasso_cv(ds, lambdas=grid, seed=5)
        second = lasso_cv(ds, lambdas=grid, seed=5, workers=2)
        assert np.array_equal(first.cv_error, second.cv_error)

    @pytest.mark.parametrize("k", [1, 61])
    def test_fold_count_bounds(self, small_problem, k):
        _, ds = small_problem
        with pytest.raises(ConfigurationError):
            lasso_cv(ds, k=k)
