"""
Replication harness: fresh data per replication, every method scored on test data
"""
from dataclasses import dataclass
from typing import Callable, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np

from baselines.lasso import lasso_cv
from config.solver_config import (
    BOOTSTRAP_RESAMPLES,
    DEFAULT_METHODS,
    EXPERIMENT_LASSO_TOL,
    MAX_FAILURE_FRACTION,
)
from design.dataset import (
    Dataset,
    GroundTruth,
    attach_response,
    generate_design,
    normalize_columns,
    to_original_scale,
)
from experiments.settings import SettingSpec
from solver.hadamard_gd import HyperParams
from stopping.rules import holdout_stop, kfold_stop, oracle_stop, sure_stop
from storage.models import MethodSummary, MetricsRow, SummaryTable
from utils.errors import ConfigurationError, ExperimentFailedError
from utils.helpers import derive_seed, hash_config, relative_error
from utils.workers import JobPool

logger = logging.getLogger(__name__)

# Seed streams within one replication
_DESIGN_STREAM = 1
_NOISE_STREAM = 2
_METHOD_STREAM = 3
_BOOTSTRAP_STREAM = 4


@dataclass(frozen=True)
class Replication:
    """Data of one replication, split in order into train / valid / test"""
    index: int
    seed: int
    truth: GroundTruth
    train: Dataset
    valid: Dataset
    test: Dataset
    pooled: Dataset  # train and valid together
    full: Dataset


def make_replication(spec: SettingSpec, index: int, master_seed: int) -> Replication:
    """Draw the data of replication `index`; a pure function of (spec, index, master_seed)"""
    seed = derive_seed(master_seed, index)
    truth = spec.build_truth()
    design = generate_design(spec.total_samples, spec.covariance_spec(), derive_seed(seed, 0, _DESIGN_STREAM))
    ds = attach_response(design, truth, derive_seed(seed, 0, _NOISE_STREAM))
    if spec.normalize:
        ds = normalize_columns(ds)

    bounds = np.round(np.cumsum([0.0] + list(spec.split)) * ds.n).astype(int)
    train = ds.rows(np.arange(bounds[0], bounds[1]))
    valid = ds.rows(np.arange(bounds[1], bounds[2]))
    test = ds.rows(np.arange(bounds[2], bounds[3]))
    pooled = ds.rows(np.arange(bounds[0], bounds[2]))
    return Replication(index=index, seed=seed, truth=truth, train=train, valid=valid, test=test,
                       pooled=pooled, full=ds)


# =============================================================================
# METHODS
# =============================================================================
# Each method returns (beta_hat on the fitted scale, stopped_at or None, extras)

MethodFn = Callable[[Replication, HyperParams, SettingSpec, int], Tuple[np.ndarray, Optional[int], Dict]]


def _gd_holdout(rep, hp, spec, seed):
    fit, _ = holdout_stop(rep.train, rep.valid, hp, mode=spec.stop_mode, seed=seed, truth=rep.truth)
    return fit.beta_hat, fit.stopped_at, {}


def _gd_kfold(rep, hp, spec, seed):
    fit, _ = kfold_stop(rep.pooled, spec.folds, hp, mode=spec.stop_mode, seed=seed)
    return fit.beta_hat, fit.stopped_at, {}


def _gd_oracle(rep, hp, spec, seed):
    fit, _ = oracle_stop(rep.train, hp, rep.truth.beta_star, seed=seed)
    return fit.beta_hat, fit.stopped_at, {}


def _gd_sure(rep, hp, spec, seed):
    fit, _ = sure_stop(rep.train, hp, sigma=None, mode=spec.stop_mode, seed=seed, valid=rep.valid)
    return fit.beta_hat, fit.stopped_at, {"sigma_hat": fit.diagnostics.get("sigma")}


def _lasso_cv(rep, hp, spec, seed):
    result = lasso_cv(rep.pooled, k=spec.folds, seed=seed, tol=EXPERIMENT_LASSO_TOL)
    return result.beta, None, {"lambda": result.lam, "converged": result.converged}


METHODS: Dict[str, MethodFn] = {
    "gd_holdout": _gd_holdout,
    "gd_kfold": _gd_kfold,
    "gd_oracle": _gd_oracle,
    "gd_sure": _gd_sure,
    "lasso_cv": _lasso_cv,
}


def _score(rep: Replication, method: str, beta: np.ndarray, stopped_at: Optional[int],
           extra: Dict, seed: int) -> MetricsRow:
    beta_raw = to_original_scale(beta, rep.full)
    residual = rep.test.require_response() - rep.test.X @ beta
    return MetricsRow(
        method=method,
        replication=rep.index,
        seed=seed,
        std_est_error=relative_error(beta_raw, rep.truth.beta_star),
        mean_pred_error=float(np.sqrt(residual @ residual / rep.test.n)),
        stopped_at=stopped_at,
        extra=extra,
    )


def run_replication(spec: SettingSpec, methods: Sequence[str], master_seed: int, index: int) -> List[MetricsRow]:
    """Fit every method on replication `index`; failures become rows carrying the error"""
    rep = make_replication(spec, index, master_seed)
    hp = spec.hyper_params()
    rows = []
    for position, method in enumerate(methods):
        seed = derive_seed(rep.seed, position, _METHOD_STREAM)
        try:
            beta, stopped_at, extra = METHODS[method](rep, hp, spec, seed)
            rows.append(_score(rep, method, beta, stopped_at, extra, seed))
        except Exception as e:
            logger.error(f"{spec.name} replication {index}, {method} failed: {e}", exc_info=True)
            rows.append(MetricsRow(method=method, replication=index, seed=seed, error=f"{type(e).__name__}: {e}"))
    return rows


# =============================================================================
# SUMMARIES
# =============================================================================

def bootstrap_se(values: Sequence[float], resamples: int = BOOTSTRAP_RESAMPLES, seed: int = 0) -> float:
    """
    Bootstrap standard error of the median

    Zero for fewer than two values and for constant vectors.
    """
    values = np.asarray(values, dtype=float)
    if values.size < 2 or np.ptp(values) == 0.0:
        return 0.0
    rng = np.random.default_rng(seed)
    draws = rng.integers(0, values.size, size=(resamples, values.size))
    medians = np.median(values[draws], axis=1)
    if np.ptp(medians) == 0.0:
        return 0.0
    return float(np.std(medians))


def summarize(method: str, rows: Sequence[MetricsRow], resamples: int, seed: int) -> MethodSummary:
    ok = [row for row in rows if not row.failed]
    failed = len(rows) - len(ok)
    if rows and failed > MAX_FAILURE_FRACTION * len(rows):
        raise ExperimentFailedError(method, failed, len(rows))
    if failed:
        logger.warning(f"{method}: {failed}/{len(rows)} replications failed and are excluded")
    if not ok:
        return MethodSummary(method=method, failed=failed)

    est = [row.std_est_error for row in ok]
    pred = [row.mean_pred_error for row in ok]
    stops = [row.stopped_at for row in ok if row.stopped_at is not None]
    return MethodSummary(
        method=method,
        median_std_est_error=float(np.median(est)),
        se_std_est_error=bootstrap_se(est, resamples, derive_seed(seed, 0, _BOOTSTRAP_STREAM)),
        median_mean_pred_error=float(np.median(pred)),
        se_mean_pred_error=bootstrap_se(pred, resamples, derive_seed(seed, 1, _BOOTSTRAP_STREAM)),
        median_stopped_at=float(np.median(stops)) if stops else None,
        succeeded=len(ok),
        failed=failed,
    )


def run_setting(spec: SettingSpec, methods: Optional[Sequence[str]] = None, master_seed: int = 0,
                workers: int = 1, resamples: int = BOOTSTRAP_RESAMPLES) -> Tuple[SummaryTable, List[MetricsRow]]:
    """
    Run all replications of a setting

    Args:
        spec: Setting
        methods: Subset of METHODS (default: holdout, k-fold, oracle, Lasso CV)
        master_seed: Master seed; replication i uses derive_seed(master_seed, i)
        workers: Replication worker threads
        resamples: Bootstrap resamples

    Returns:
        (SummaryTable, metric rows ordered by replication then method)

    Raises:
        ExperimentFailedError: more than MAX_FAILURE_FRACTION of one method's rows failed
    """
    methods = list(methods or DEFAULT_METHODS)
    unknown = [m for m in methods if m not in METHODS]
    if unknown:
        raise ConfigurationError(f"unknown methods {unknown}; expected a subset of {sorted(METHODS)}")

    config = {
        "setting": spec.to_config(),
        "methods": methods,
        "master_seed": master_seed,
        "bootstrap_resamples": resamples,
    }
    logger.info(f"Running {spec.name}: {spec.replications} replications of {methods}")

    per_rep = JobPool(spec.name, workers).map(
        lambda index: run_replication(spec, methods, master_seed, index),
        list(range(spec.replications)),
    )
    rows = [row for rep_rows in per_rep for row in rep_rows]

    summaries = []
    for position, method in enumerate(methods):
        method_rows = [row for row in rows if row.method == method]
        summaries.append(summarize(method, method_rows, resamples, derive_seed(master_seed, position, _BOOTSTRAP_STREAM)))

    table = SummaryTable(
        name=spec.name,
        config_hash=hash_config(config),
        master_seed=master_seed,
        replications=spec.replications,
        rows=summaries,
        config=config,
    )
    for summary in summaries:
        logger.info(f"{spec.name} {summary.method}: median std est error {summary.median_std_est_error}")
    return table, rows
