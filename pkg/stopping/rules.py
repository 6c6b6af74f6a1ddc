"""
Early-stopping rules: hold-out validation, k-fold cross-validation, SURE and oracle
"""
from dataclasses import dataclass, replace
from typing import Any, Dict, List, Optional, Tuple
import logging

import numpy as np
from scipy.stats import median_abs_deviation

from config.solver_config import CV_FOLDS, SURE_MAX_N
from design.dataset import Dataset, GroundTruth
from design.screening import screen_by_correlation
from solver.hadamard_gd import (
    FitResult,
    HyperParams,
    RecordingPolicy,
    min_l2_solution,
    resolve_step_size,
    run,
)
from stopping.base_rule import SELECTION_MODES, RiskCurve, RiskMonitor
from utils.errors import ConfigurationError, DegenerateInputError, DimensionMismatchError, SizeGuardError
from utils.helpers import derive_seed, make_folds
from utils.workers import JobPool

logger = logging.getLogger(__name__)

RULE_KINDS = ("none", "holdout", "kfold", "sure", "oracle")
SIGMA_METHODS = ("holdout_mad", "screened_ols")

# Seed streams of the k-fold rule
_SHUFFLE_STREAM = 11
_FOLD_STREAM = 12
_REFIT_STREAM = 13


@dataclass(frozen=True, eq=False)
class StoppingRule:
    """Selector of the stopping time T~"""
    kind: str = "none"
    mode: str = "first_rise"
    k: int = CV_FOLDS
    sigma: Optional[float] = None
    beta_star: Optional[np.ndarray] = None
    t_max: Optional[int] = None

    def __post_init__(self):
        if self.kind not in RULE_KINDS:
            raise ConfigurationError(f"unknown stopping rule {self.kind!r}; expected one of {RULE_KINDS}")
        if self.mode not in SELECTION_MODES:
            raise ConfigurationError(f"unknown selection mode {self.mode!r}; expected one of {SELECTION_MODES}")
        if self.kind == "kfold" and self.k < 2:
            raise ConfigurationError(f"k-fold stopping needs k >= 2, got {self.k}")
        if self.sigma is not None and self.sigma < 0:
            raise ConfigurationError(f"sigma must be non-negative, got {self.sigma}")
        if self.kind == "oracle" and self.beta_star is None:
            raise ConfigurationError("the oracle rule needs beta_star")

    def to_dict(self) -> Dict[str, Any]:
        return {"kind": self.kind, "mode": self.mode, "k": self.k, "sigma": self.sigma, "t_max": self.t_max}


@dataclass(frozen=True)
class SureState:
    """Running smoother trace and C_p risk"""
    trace_S: float
    sigma: float
    risk: float


# =============================================================================
# MONITORS
# =============================================================================

class HoldoutMonitor(RiskMonitor):
    """R(t) = ||X' beta_t - y'||^2 on validation data"""

    def __init__(self, valid: Dataset, mode: str = "first_rise", halt_on_rise: bool = True, name: str = "holdout"):
        super().__init__(name, mode, halt_on_rise)
        self.valid = valid
        self._y = valid.require_response()

    def score(self, t: int, beta: np.ndarray) -> float:
        residual = self.valid.X @ beta - self._y
        return float(residual @ residual)


class SureMonitor(RiskMonitor):
    """
    C_p risk ||r_t||^2 / n + (2 - 2 tr(S_t) / n) sigma^2

    S_{t+1} = S_t (I - 2 eta n^-1 X Diag(|beta_t|) X^T) is the first-order smoother
    of the residual recursion; the O(eta^2) terms are dropped.
    """

    def __init__(self, ds: Dataset, sigma: float, mode: str = "global_min", name: str = "sure"):
        super().__init__(name, mode, halt_on_rise=False)
        self.ds = ds
        self.sigma = sigma
        self.smoother = np.eye(ds.n)
        self._previous: Optional[np.ndarray] = None
        self.traces: List[float] = []
        self.state = SureState(trace_S=float(ds.n), sigma=sigma, risk=float("nan"))

    def update(self, t: int, beta: np.ndarray, ds: Dataset, eta: float) -> None:
        if self._previous is not None:
            weighted = (self.ds.X * np.abs(self._previous)) @ self.ds.X.T
            self.smoother = self.smoother - (2.0 * eta / self.ds.n) * (self.smoother @ weighted)
        self._previous = beta.copy()

    def score(self, t: int, beta: np.ndarray) -> float:
        residual = self.ds.X @ beta - self.ds.require_response()
        trace = float(np.trace(self.smoother))
        risk = float(residual @ residual) / self.ds.n + (2.0 - 2.0 * trace / self.ds.n) * self.sigma ** 2
        self.traces.append(trace)
        self.state = SureState(trace_S=trace, sigma=self.sigma, risk=risk)
        return risk


class OracleMonitor(RiskMonitor):
    """Estimation error ||beta_t - beta*||_2"""

    def __init__(self, beta_star: np.ndarray, name: str = "oracle"):
        super().__init__(name, "global_min", halt_on_rise=False)
        self.beta_star = np.asarray(beta_star, dtype=float)

    def score(self, t: int, beta: np.ndarray) -> float:
        return float(np.linalg.norm(beta - self.beta_star))


def _finish(result: FitResult, monitor: RiskMonitor, curve: RiskCurve, t_sel: int) -> FitResult:
    """FitResult at T~, trajectory cut at T~"""
    diagnostics = dict(result.diagnostics)
    diagnostics.update({
        "run_length": result.stopped_at,
        "selected_risk": curve.risk_at(t_sel),
        "grid_points": int(curve.t_grid.size),
    })
    return replace(
        result,
        beta_hat=monitor.beta_at(t_sel).copy(),
        stopped_at=t_sel,
        stop_reason="rule",
        trajectory=tuple(sample for sample in result.trajectory if sample.t <= t_sel),
        diagnostics=diagnostics,
    )


def _check_pair(train: Dataset, valid: Optional[Dataset]) -> Dataset:
    if valid is None:
        raise DegenerateInputError("validation set is empty")
    if valid.p != train.p:
        raise DimensionMismatchError(f"validation data has {valid.p} columns, training data has {train.p}")
    valid.require_response()
    return valid


# =============================================================================
# RULES
# =============================================================================

def holdout_stop(train: Dataset, valid: Optional[Dataset], hp: HyperParams,
                 mode: str = "first_rise", record: Optional[RecordingPolicy] = None,
                 seed: int = 0, truth: Optional[GroundTruth] = None) -> Tuple[FitResult, RiskCurve]:
    """
    Run GD on train while scoring R(t) on the validation data

    first_rise halts at the first strict rise and returns the iterate before it;
    global_min runs to t_max and returns the earliest minimizer.

    Args:
        train: Training data
        valid: Validation data (same columns)
        hp: Hyper-parameters
        mode: first_rise or global_min
        record: Recording policy (also the risk grid)
        seed: Initialization seed
        truth: Optional ground truth for trajectory diagnostics

    Returns:
        (FitResult at T~, RiskCurve)
    """
    valid = _check_pair(train, valid)
    monitor = HoldoutMonitor(valid, mode=mode, halt_on_rise=mode == "first_rise")
    result = run(train, hp, stop=monitor, record=record, seed=seed, truth=truth)
    curve = monitor.curve()
    t_sel = curve.selected(mode)
    logger.info(f"Holdout ({mode}) selected T~ = {t_sel}")
    return _finish(result, monitor, curve, t_sel), curve


def _fold_risk(job: Tuple[Dataset, Dataset, HyperParams, RecordingPolicy, int]) -> Tuple[np.ndarray, np.ndarray]:
    train, valid, hp, record, seed = job
    monitor = HoldoutMonitor(valid, mode="global_min", halt_on_rise=False, name="fold")
    run(train, hp, stop=monitor, record=record, seed=seed)
    return np.asarray(monitor.times), np.asarray(monitor.values)


def kfold_stop(ds: Dataset, k: int, hp: HyperParams, mode: str = "first_rise",
               seed: int = 0, record: Optional[RecordingPolicy] = None,
               truth: Optional[GroundTruth] = None, workers: int = 1) -> Tuple[FitResult, RiskCurve]:
    """
    k-fold cross-validated stopping time, then a refit on all data to exactly T~

    Folds are contiguous blocks of a seeded shuffle. Every fold runs to t_max
    with the step size resolved once on the full data, so the summed risk lives
    on one common grid.

    Args:
        ds: Full data
        k: Number of folds (2 <= k <= n)
        hp: Hyper-parameters
        mode: first_rise or global_min
        seed: Master seed for the shuffle, the fold inits and the refit
        record: Recording policy (also the risk grid)
        truth: Optional ground truth for the refit trajectory
        workers: Fold worker threads

    Returns:
        (refit FitResult, summed RiskCurve)
    """
    if k < 2:
        raise ConfigurationError(f"k-fold stopping needs k >= 2, got {k}")
    if k > ds.n:
        raise ConfigurationError(f"k = {k} exceeds the sample size n = {ds.n}")
    ds.require_response()
    record = record or RecordingPolicy()
    hp = resolve_step_size(ds, hp)
    fold_hp = hp.evolve(stop_tol=0.0)

    folds = make_folds(ds.n, k, derive_seed(seed, 0, _SHUFFLE_STREAM))
    jobs = []
    for i, fold in enumerate(folds):
        mask = np.ones(ds.n, dtype=bool)
        mask[fold] = False
        jobs.append((ds.rows(np.flatnonzero(mask)), ds.rows(fold), fold_hp, record, derive_seed(seed, i, _FOLD_STREAM)))

    curves = JobPool("kfold", workers).map(_fold_risk, jobs)
    t_grid = curves[0][0]
    for times, _ in curves[1:]:
        if not np.array_equal(times, t_grid):
            raise DimensionMismatchError("fold risk curves are on different grids")
    total = np.sum([values for _, values in curves], axis=0)
    curve = RiskCurve.from_values(t_grid, total)
    t_sel = curve.selected(mode)
    logger.info(f"{k}-fold CV ({mode}) selected T~ = {t_sel}")

    refit = run(ds, hp.evolve(t_max=t_sel, stop_tol=0.0), record=record,
                seed=derive_seed(seed, 0, _REFIT_STREAM), truth=truth)
    diagnostics = dict(refit.diagnostics)
    diagnostics.update({"k": k, "selected_risk": curve.risk_at(t_sel), "grid_points": int(t_grid.size)})
    return replace(refit, stop_reason="rule", diagnostics=diagnostics), curve


def sure_stop(ds: Dataset, hp: HyperParams, sigma: Optional[float] = None,
              mode: str = "global_min", record: Optional[RecordingPolicy] = None,
              seed: int = 0, truth: Optional[GroundTruth] = None,
              valid: Optional[Dataset] = None) -> Tuple[FitResult, RiskCurve]:
    """
    Stopping time minimizing the C_p-type risk built from the smoother trace

    Args:
        ds: Training data (n <= SURE_MAX_N)
        hp: Hyper-parameters
        sigma: Noise level; estimated when None (holdout MAD if valid is given,
            screened least squares otherwise)
        mode: first_rise or global_min
        record: Recording policy (also the risk grid)
        seed: Initialization seed
        truth: Optional ground truth for trajectory diagnostics
        valid: Validation data for the sigma plug-in

    Returns:
        (FitResult at T~, RiskCurve)
    """
    if ds.n > SURE_MAX_N:
        raise SizeGuardError("n", ds.n, SURE_MAX_N, "use the holdout or k-fold rule instead")
    if sigma is None:
        method = "holdout_mad" if valid is not None else "screened_ols"
        sigma = estimate_sigma(ds, hp, method=method, valid=valid, seed=seed)
    if not sigma > 0:
        raise ConfigurationError(f"sigma must be positive for SURE, got {sigma}")

    hp = resolve_step_size(ds, hp)
    monitor = SureMonitor(ds, sigma, mode=mode)
    result = run(ds, hp, stop=monitor, record=record, seed=seed, truth=truth)
    curve = monitor.curve()
    t_sel = curve.selected(mode)
    logger.info(f"SURE ({mode}, sigma={sigma:.4g}) selected T~ = {t_sel}")

    finished = _finish(result, monitor, curve, t_sel)
    diagnostics = dict(finished.diagnostics)
    diagnostics.update({"sigma": float(sigma), "trace_S": monitor.traces[monitor.times.index(t_sel)]})
    return replace(finished, diagnostics=diagnostics), curve


def oracle_stop(ds: Dataset, hp: HyperParams, beta_star: np.ndarray,
                record: Optional[RecordingPolicy] = None, seed: int = 0,
                truth: Optional[GroundTruth] = None) -> Tuple[FitResult, RiskCurve]:
    """
    T~ = argmin_t ||beta_t - beta*||_2 over the recorded grid (benchmarks only)
    """
    beta_star = np.asarray(beta_star, dtype=float)
    if beta_star.shape != (ds.p,):
        raise DimensionMismatchError(f"beta_star has length {beta_star.shape[0]}, expected {ds.p}")
    monitor = OracleMonitor(beta_star)
    result = run(ds, hp, stop=monitor, record=record, seed=seed, truth=truth)
    curve = monitor.curve()
    t_sel = curve.argmin_t
    logger.info(f"Oracle selected T~ = {t_sel} (error {curve.risk_at(t_sel):.4g})")
    return _finish(result, monitor, curve, t_sel), curve


# =============================================================================
# NOISE LEVEL
# =============================================================================

def estimate_sigma(ds: Dataset, hp: HyperParams, method: str = "holdout_mad",
                   valid: Optional[Dataset] = None, seed: int = 0) -> float:
    """
    Plug-in noise level

    holdout_mad: normal-consistent MAD of the validation residuals at the
    first-rise iterate of a hold-out run. screened_ols: residual standard
    deviation of the least-squares fit on the min(p, n // 2) columns most
    correlated with y.

    Args:
        ds: Training data
        hp: Hyper-parameters of the hold-out run
        method: holdout_mad or screened_ols
        valid: Validation data (holdout_mad only)
        seed: Initialization seed of the hold-out run

    Returns:
        sigma_hat
    """
    if method not in SIGMA_METHODS:
        raise ConfigurationError(f"unknown sigma method {method!r}; expected one of {SIGMA_METHODS}")

    if method == "holdout_mad":
        valid = _check_pair(ds, valid)
        fit, _ = holdout_stop(ds, valid, hp, mode="first_rise", seed=seed)
        residual = valid.require_response() - valid.X @ fit.beta_hat
        sigma = float(median_abs_deviation(residual, scale="normal"))
    else:
        keep = max(1, min(ds.p, ds.n // 2))
        reduced, _ = screen_by_correlation(ds, keep)
        residual = ds.require_response() - reduced.X @ min_l2_solution(reduced)
        dof = max(ds.n - keep, 1)
        sigma = float(np.linalg.norm(residual) / np.sqrt(dof))

    logger.info(f"Estimated sigma ({method}) = {sigma:.4g}")
    return sigma


def apply_rule(rule: StoppingRule, train: Dataset, hp: HyperParams,
               valid: Optional[Dataset] = None, record: Optional[RecordingPolicy] = None,
               seed: int = 0, truth: Optional[GroundTruth] = None,
               workers: int = 1) -> Tuple[FitResult, Optional[RiskCurve]]:
    """
    Dispatch on the rule kind

    Returns:
        (FitResult, RiskCurve or None for kind none)
    """
    if rule.t_max is not None:
        hp = hp.evolve(t_max=rule.t_max)
    if rule.kind == "none":
        return run(train, hp, record=record, seed=seed, truth=truth), None
    if rule.kind == "holdout":
        return holdout_stop(train, valid, hp, mode=rule.mode, record=record, seed=seed, truth=truth)
    if rule.kind == "kfold":
        return kfold_stop(train, rule.k, hp, mode=rule.mode, seed=seed, record=record, truth=truth, workers=workers)
    if rule.kind == "sure":
        return sure_stop(train, hp, sigma=rule.sigma, mode=rule.mode, record=record, seed=seed, truth=truth, valid=valid)
    return oracle_stop(train, hp, rule.beta_star, record=record, seed=seed, truth=truth)
