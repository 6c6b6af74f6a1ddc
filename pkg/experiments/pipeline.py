"""
Screen, fit, threshold: the p >> n analysis pipeline
"""
from dataclasses import dataclass
from typing import Any, Dict, Optional, Tuple
import logging

import numpy as np

from baselines.lasso import LassoCVResult, lasso_cv
from config.solver_config import CV_FOLDS
from design.dataset import Dataset
from design.screening import screen_by_correlation
from selection.selection import hard_threshold, score_selection
from solver.hadamard_gd import FitResult, HyperParams
from stopping.base_rule import RiskCurve
from stopping.rules import kfold_stop
from utils.helpers import derive_seed

logger = logging.getLogger(__name__)

# Seed streams of the pipeline
_GD_STREAM = 31
_LASSO_STREAM = 32


@dataclass
class PipelineResult:
    """Outcome of screened_pipeline; coefficients are indexed like the input columns"""
    beta: np.ndarray
    beta_unthresholded: np.ndarray
    index_map: np.ndarray
    threshold: float
    fit: FitResult
    curve: RiskCurve
    lasso: LassoCVResult

    @property
    def selected(self) -> Tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.beta))

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta": self.beta,
            "selected": list(self.selected),
            "screened": self.index_map,
            "threshold": self.threshold,
            "stopped_at": self.fit.stopped_at,
            "lasso_lambda": self.lasso.lam,
        }


def screened_pipeline(ds: Dataset, keep: Optional[int], hp: HyperParams,
                      k: int = CV_FOLDS, seed: int = 0, workers: int = 1) -> PipelineResult:
    """
    Correlation screening, k-fold GD, then hard thresholding at the Lasso-CV lambda

    Args:
        ds: Data with response
        keep: Columns kept by screening (None keeps all)
        hp: GD hyper-parameters
        k: Folds of both cross-validations
        seed: Master seed
        workers: Fold worker threads

    Returns:
        PipelineResult with coefficients mapped back to the original columns
    """
    if keep is None or keep >= ds.p:
        reduced, index_map = ds, np.arange(ds.p)
    else:
        reduced, index_map = screen_by_correlation(ds, keep)
        logger.info(f"Screened {ds.p} columns down to {reduced.p}")

    fit, curve = kfold_stop(reduced, k, hp, seed=derive_seed(seed, 0, _GD_STREAM), workers=workers)
    lasso = lasso_cv(reduced, k=k, seed=derive_seed(seed, 0, _LASSO_STREAM), workers=workers)

    beta_full = np.zeros(ds.p)
    beta_full[index_map] = fit.beta_hat
    thresholded = hard_threshold(beta_full, lasso.lam)

    report = score_selection(np.flatnonzero(thresholded), threshold=lasso.lam)
    logger.info(f"Pipeline kept {len(report.selected)} of {reduced.p} screened columns at lambda {lasso.lam:.4g}")
    return PipelineResult(
        beta=thresholded,
        beta_unthresholded=beta_full,
        index_map=np.asarray(index_map),
        threshold=lasso.lam,
        fit=fit,
        curve=curve,
        lasso=lasso,
    )
