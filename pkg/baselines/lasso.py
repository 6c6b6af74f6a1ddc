"""
Lasso baselines: soft thresholding, ISTA, FISTA, regularization paths, KKT checks

Objective: (2n)^-1 ||X beta - y||^2 + lambda ||beta||_1
"""
from dataclasses import dataclass
from typing import Any, Dict, List, NamedTuple, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd

from config.solver_config import (
    CV_FOLDS,
    LASSO_GRID_RATIO,
    LASSO_GRID_SIZE,
    LASSO_MAX_ITER,
    LASSO_TOL,
)
from design.dataset import Dataset, GroundTruth
from utils.errors import ConfigurationError, DegenerateInputError
from utils.helpers import derive_seed, gram_lambda_max, make_folds
from utils.workers import JobPool

logger = logging.getLogger(__name__)

# Power iteration converges from below; the margin keeps 1/L a valid step
LIPSCHITZ_MARGIN = 1.001
KKT_FACTOR = 10.0

_CV_STREAM = 21


def soft_threshold(x, lam):
    """sign(x) * max(|x| - lam, 0), elementwise"""
    if np.any(np.asarray(lam) < 0):
        raise ConfigurationError(f"threshold must be non-negative, got {lam}")
    return np.sign(x) * np.maximum(np.abs(x) - lam, 0.0)


def lipschitz_constant(ds: Dataset) -> float:
    """Upper estimate of lambda_max(X^T X / n); 1.0 for an all-zero design"""
    estimate = gram_lambda_max(ds.X, steps=1000, tol=1e-12)
    return estimate * LIPSCHITZ_MARGIN if estimate > 0 else 1.0


def lambda_max(ds: Dataset) -> float:
    """Smallest lambda whose Lasso solution is zero: ||X^T y / n||_inf"""
    return float(np.max(np.abs(ds.X.T @ ds.require_response())) / ds.n)


def lambda_grid(ds: Dataset, size: int = LASSO_GRID_SIZE, ratio: float = LASSO_GRID_RATIO) -> np.ndarray:
    """
    Log-spaced grid from lambda_max down to ratio * lambda_max

    Args:
        ds: Dataset with response
        size: Number of grid points
        ratio: Smallest / largest lambda

    Returns:
        Strictly descending lambdas
    """
    top = lambda_max(ds)
    if top == 0.0:
        raise DegenerateInputError("X^T y = 0: every lambda gives the zero solution")
    if size < 1 or not 0 < ratio < 1:
        raise ConfigurationError(f"invalid grid: size={size}, ratio={ratio}")
    return np.geomspace(top, top * ratio, size)


@dataclass(frozen=True, eq=False)
class LassoProblem:
    ds: Dataset
    lam: float

    def __post_init__(self):
        if not self.lam >= 0:
            raise ConfigurationError(f"lambda must be non-negative, got {self.lam}")
        self.ds.require_response()

    def gradient(self, beta: np.ndarray) -> np.ndarray:
        return self.ds.X.T @ (self.ds.X @ beta - self.ds.y) / self.ds.n

    def objective(self, beta: np.ndarray) -> float:
        residual = self.ds.X @ beta - self.ds.y
        return float(residual @ residual) / (2.0 * self.ds.n) + self.lam * float(np.sum(np.abs(beta)))


class LassoSolution(NamedTuple):
    beta: np.ndarray
    iters: int
    converged: bool
    kkt_violation: float
    objective: float
    history: Tuple[float, ...] = ()
    restarts: int = 0


class KKTReport(NamedTuple):
    ok: bool
    max_violation: float


def check_kkt(prob: LassoProblem, beta: np.ndarray, tol: float) -> KKTReport:
    """
    Subgradient optimality certificate

    With c = X^T (X beta - y) / n: off the support the violation is
    max(|c_j| - lambda, 0); on it, |c_j + lambda sign(beta_j)|.
    """
    beta = np.asarray(beta, dtype=float)
    c = prob.gradient(beta)
    on = beta != 0
    violation = np.maximum(np.abs(c) - prob.lam, 0.0)
    violation[on] = np.abs(c[on] + prob.lam * np.sign(beta[on]))
    worst = float(np.max(violation)) if violation.size else 0.0
    return KKTReport(ok=worst <= tol, max_violation=worst)


def _setup(prob: LassoProblem, beta0: Optional[np.ndarray], L: Optional[float]):
    L = lipschitz_constant(prob.ds) if L is None else L
    beta = np.zeros(prob.ds.p) if beta0 is None else np.array(beta0, dtype=float)
    return L, beta


def _converged(prob: LassoProblem, beta: np.ndarray, change: float, tol: float) -> Tuple[bool, float]:
    if change > tol:
        return False, float("nan")
    report = check_kkt(prob, beta, KKT_FACTOR * tol)
    return report.ok, report.max_violation


def _solution(prob: LassoProblem, beta: np.ndarray, iters: int, converged: bool,
              tol: float, history: List[float], solver: str, restarts: int = 0) -> LassoSolution:
    kkt = check_kkt(prob, beta, KKT_FACTOR * tol)
    if not converged:
        logger.warning(f"{solver} did not converge in {iters} iterations "
                       f"(lambda={prob.lam:.4g}, KKT residual {kkt.max_violation:.3e})")
    return LassoSolution(
        beta=beta,
        iters=iters,
        converged=converged and kkt.ok,
        kkt_violation=kkt.max_violation,
        objective=prob.objective(beta),
        history=tuple(history),
        restarts=restarts,
    )


def ista(prob: LassoProblem, tol: float = LASSO_TOL, max_iter: int = LASSO_MAX_ITER,
         beta0: Optional[np.ndarray] = None, L: Optional[float] = None,
         track: bool = False) -> LassoSolution:
    """
    Proximal gradient with step 1/L

    Stops once the sup-norm iterate change is at most tol and the KKT residual
    is at most 10 * tol.

    Args:
        prob: Lasso problem
        tol: Iterate-change tolerance
        max_iter: Iteration cap
        beta0: Starting point (default zero)
        L: Lipschitz constant (estimated when None)
        track: Keep the objective value of every iterate

    Returns:
        LassoSolution (converged=False when max_iter was hit)
    """
    L, beta = _setup(prob, beta0, L)
    history = [prob.objective(beta)] if track else []
    converged, iters = False, 0

    for iters in range(1, max_iter + 1):
        updated = soft_threshold(beta - prob.gradient(beta) / L, prob.lam / L)
        change = float(np.max(np.abs(updated - beta))) if beta.size else 0.0
        beta = updated
        if track:
            history.append(prob.objective(beta))
        converged, _ = _converged(prob, beta, change, tol)
        if converged:
            break

    return _solution(prob, beta, iters, converged, tol, history, "ISTA")


def fista(prob: LassoProblem, tol: float = LASSO_TOL, max_iter: int = LASSO_MAX_ITER,
          beta0: Optional[np.ndarray] = None, L: Optional[float] = None,
          restart: bool = False, track: bool = False) -> LassoSolution:
    """
    Accelerated proximal gradient with the t_{k+1} = (1 + sqrt(1 + 4 t_k^2)) / 2 schedule

    Args:
        prob: Lasso problem
        tol: Iterate-change tolerance (on the main sequence)
        max_iter: Iteration cap
        beta0: Starting point (default zero)
        L: Lipschitz constant (estimated when None)
        restart: Reset the momentum whenever the objective increases
        track: Keep the objective value of every main iterate

    Returns:
        LassoSolution
    """
    L, beta = _setup(prob, beta0, L)
    point = beta.copy()
    t = 1.0
    objective = prob.objective(beta)
    history = [objective] if track else []
    converged, iters, restarts = False, 0, 0

    for iters in range(1, max_iter + 1):
        updated = soft_threshold(point - prob.gradient(point) / L, prob.lam / L)
        t_next = (1.0 + np.sqrt(1.0 + 4.0 * t * t)) / 2.0
        reset = False

        if restart:
            new_objective = prob.objective(updated)
            if new_objective > objective:
                # Momentum reset: redo the step from the current main iterate
                reset = True
                restarts += 1
                t_next = 1.0
                updated = soft_threshold(beta - prob.gradient(beta) / L, prob.lam / L)
                new_objective = prob.objective(updated)
            objective = new_objective

        point = updated if reset else updated + ((t - 1.0) / t_next) * (updated - beta)
        change = float(np.max(np.abs(updated - beta))) if beta.size else 0.0
        beta, t = updated, t_next
        if track:
            history.append(prob.objective(beta))
        converged, _ = _converged(prob, beta, change, tol)
        if converged:
            break

    return _solution(prob, beta, iters, converged, tol, history, "FISTA", restarts)


# =============================================================================
# PATHS AND CROSS-VALIDATION
# =============================================================================

@dataclass(frozen=True, eq=False)
class PathResult:
    lambdas: np.ndarray
    betas: Tuple[np.ndarray, ...]
    kkt_residuals: Tuple[float, ...]
    converged: Tuple[bool, ...]
    iters: Tuple[int, ...]
    tol: float

    @property
    def l1_norms(self) -> np.ndarray:
        return np.array([float(np.sum(np.abs(beta))) for beta in self.betas])

    def to_frame(self, truth: Optional[GroundTruth] = None) -> pd.DataFrame:
        frame = pd.DataFrame({"lambda": self.lambdas, "l1_norm": self.l1_norms})
        if truth is not None:
            frame["est_error"] = [float(np.linalg.norm(beta - truth.beta_star)) for beta in self.betas]
        return frame

    def export_to_csv(self, filepath: str, truth: Optional[GroundTruth] = None) -> int:
        """Write (lambda, l1_norm[, est_error]) rows; returns the row count"""
        self.to_frame(truth).to_csv(filepath, index=False)
        return len(self.lambdas)


def _check_descending(lambdas: Sequence[float]) -> np.ndarray:
    lambdas = np.asarray(lambdas, dtype=float)
    if lambdas.size == 0:
        raise ConfigurationError("lambda path is empty")
    if np.any(lambdas < 0):
        raise ConfigurationError("lambdas must be non-negative")
    if np.any(np.diff(lambdas) >= 0):
        raise ConfigurationError("lambdas must be strictly descending")
    return lambdas


def lasso_path(ds: Dataset, lambdas: Sequence[float], warm_start: bool = True,
               tol: float = LASSO_TOL, max_iter: int = LASSO_MAX_ITER) -> PathResult:
    """
    FISTA solutions along a descending lambda sequence

    Non-converged points are logged and kept; the path never aborts on them.

    Args:
        ds: Dataset with response
        lambdas: Strictly descending lambdas
        warm_start: Start each solve from the previous solution
        tol: Solver tolerance
        max_iter: Iteration cap per lambda

    Returns:
        PathResult
    """
    lambdas = _check_descending(lambdas)
    L = lipschitz_constant(ds)
    betas, kkt, converged, iters = [], [], [], []
    previous = None

    for lam in lambdas:
        solution = fista(LassoProblem(ds, float(lam)), tol=tol, max_iter=max_iter,
                         beta0=previous if warm_start else None, L=L)
        betas.append(solution.beta)
        kkt.append(solution.kkt_violation)
        converged.append(solution.converged)
        iters.append(solution.iters)
        previous = solution.beta

    if not all(converged):
        logger.warning(f"Lasso path: {converged.count(False)}/{len(lambdas)} points did not converge")
    return PathResult(
        lambdas=lambdas,
        betas=tuple(betas),
        kkt_residuals=tuple(kkt),
        converged=tuple(converged),
        iters=tuple(iters),
        tol=tol,
    )


@dataclass(frozen=True, eq=False)
class LassoCVResult:
    lambdas: np.ndarray
    cv_error: np.ndarray
    best_index: int
    beta: np.ndarray
    converged: bool

    @property
    def lam(self) -> float:
        return float(self.lambdas[self.best_index])

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lambda": self.lam,
            "best_index": self.best_index,
            "beta": self.beta,
            "converged": self.converged,
            "grid": self.lambdas,
            "cv_error": self.cv_error,
        }


def _fold_errors(job: Tuple[Dataset, Dataset, np.ndarray, float, int]) -> np.ndarray:
    train, valid, lambdas, tol, max_iter = job
    path = lasso_path(train, lambdas, warm_start=True, tol=tol, max_iter=max_iter)
    y = valid.require_response()
    return np.array([float(np.sum((valid.X @ beta - y) ** 2)) for beta in path.betas])


def lasso_cv(ds: Dataset, k: int = CV_FOLDS, lambdas: Optional[Sequence[float]] = None,
             seed: int = 0, tol: float = LASSO_TOL, max_iter: int = LASSO_MAX_ITER,
             workers: int = 1) -> LassoCVResult:
    """
    Lambda minimizing the k-fold prediction error, refit on all data

    Args:
        ds: Dataset with response
        k: Number of folds (2 <= k <= n)
        lambdas: Descending grid (default: lambda_grid on the full data)
        seed: Fold shuffle seed
        tol: Solver tolerance
        max_iter: Iteration cap per lambda
        workers: Fold worker threads

    Returns:
        LassoCVResult (earliest grid point among ties, i.e. the largest lambda)
    """
    if not 2 <= k <= ds.n:
        raise ConfigurationError(f"k must lie in [2, {ds.n}], got {k}")
    lambdas = lambda_grid(ds) if lambdas is None else _check_descending(lambdas)

    folds = make_folds(ds.n, k, derive_seed(seed, 0, _CV_STREAM))
    jobs = []
    for fold in folds:
        mask = np.ones(ds.n, dtype=bool)
        mask[fold] = False
        jobs.append((ds.rows(np.flatnonzero(mask)), ds.rows(fold), lambdas, tol, max_iter))

    cv_error = np.sum(JobPool("lasso_cv", workers).map(_fold_errors, jobs), axis=0)
    best = int(np.argmin(cv_error))

    full = lasso_path(ds, lambdas[:best + 1], warm_start=True, tol=tol, max_iter=max_iter)
    logger.info(f"Lasso {k}-fold CV selected lambda = {lambdas[best]:.4g} (grid index {best})")
    return LassoCVResult(
        lambdas=lambdas,
        cv_error=cv_error,
        best_index=best,
        beta=full.betas[-1],
        converged=full.converged[-1],
    )
