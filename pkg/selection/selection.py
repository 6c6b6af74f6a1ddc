"""
Post-estimation variable selection
"""
from dataclasses import dataclass, field
from typing import Any, Dict, Iterable, Optional, Tuple, Union
import json
import logging

import numpy as np

from config.solver_config import ADAPTIVE_FLOOR, THRESHOLD_C_HI, THRESHOLD_C_LO
from design.dataset import Dataset, GroundTruth
from design.screening import screen_by_correlation
from solver.hadamard_gd import FitResult, min_l2_solution
from utils.errors import ConfigurationError
from utils.helpers import to_jsonable

logger = logging.getLogger(__name__)


def hard_threshold(beta: np.ndarray, lam: float) -> np.ndarray:
    """beta_j * 1{|beta_j| >= lam}; ties are kept"""
    if lam < 0:
        raise ConfigurationError(f"threshold must be non-negative, got {lam}")
    beta = np.asarray(beta, dtype=float)
    return np.where(np.abs(beta) >= lam, beta, 0.0)


def select_support(beta: np.ndarray, lam: float) -> Tuple[int, ...]:
    """Indices of the nonzeros left by hard_threshold"""
    return tuple(int(j) for j in np.flatnonzero(hard_threshold(beta, lam)))


@dataclass(frozen=True)
class ThresholdWindow:
    """Data-driven range (c_lo / p, c_hi sigma_hat sqrt(log p / n)) of admissible thresholds"""
    lo: float
    hi: float
    c_lo: float = THRESHOLD_C_LO
    c_hi: float = THRESHOLD_C_HI
    stability: Optional[Dict[str, Any]] = None

    @property
    def empty(self) -> bool:
        return self.lo > self.hi

    @property
    def mid(self) -> float:
        return (self.lo + self.hi) / 2.0

    def probes(self) -> Dict[str, float]:
        return {"lo": self.lo, "mid": self.mid, "hi": self.hi}

    def to_dict(self) -> Dict[str, Any]:
        return {
            "lo": self.lo,
            "hi": self.hi,
            "empty": self.empty,
            "c_lo": self.c_lo,
            "c_hi": self.c_hi,
            "stability": self.stability,
        }


def selection_stability(beta: np.ndarray, window: ThresholdWindow) -> Dict[str, Any]:
    """
    Selected sets at the lo, mid and hi probes of the window

    Returns:
        {"stable": bool, "selected": {probe: indices}}
    """
    selected = {name: list(select_support(beta, lam)) for name, lam in window.probes().items()}
    stable = not window.empty and selected["lo"] == selected["mid"] == selected["hi"]
    return {"stable": stable, "selected": selected}


def window_bounds(n: int, p: int, sigma_hat: float,
                  c_lo: float = THRESHOLD_C_LO, c_hi: float = THRESHOLD_C_HI) -> ThresholdWindow:
    """(c_lo / p, c_hi sigma_hat sqrt(log p / n)) for a problem of size n x p"""
    if sigma_hat < 0:
        raise ConfigurationError(f"sigma_hat must be non-negative, got {sigma_hat}")
    if n < 1 or p < 1:
        raise ConfigurationError(f"n and p must be positive, got n={n}, p={p}")
    lo = c_lo / p
    hi = c_hi * sigma_hat * np.sqrt(np.log(p) / n)
    window = ThresholdWindow(lo=float(lo), hi=float(hi), c_lo=c_lo, c_hi=c_hi)
    if window.empty:
        logger.warning(f"Threshold window is empty ({lo:.4g} > {hi:.4g}); "
                       f"the selection guarantee does not apply at n={n}, p={p}")
    return window


def threshold_window(gd_result: Union[FitResult, np.ndarray, None], ds: Dataset, sigma_hat: float,
                     c_lo: float = THRESHOLD_C_LO, c_hi: float = THRESHOLD_C_HI) -> ThresholdWindow:
    """
    Threshold window for hard-threshold selection

    Args:
        gd_result: Fit (or coefficient vector) whose stability is checked; None skips the check
        ds: Data the fit came from (supplies n and p)
        sigma_hat: Noise level estimate
        c_lo: Constant of the lower end
        c_hi: Constant of the upper end

    Returns:
        ThresholdWindow; an empty window is reported, not raised
    """
    window = window_bounds(ds.n, ds.p, sigma_hat, c_lo, c_hi)
    if gd_result is not None:
        beta = gd_result.beta_hat if isinstance(gd_result, FitResult) else np.asarray(gd_result, dtype=float)
        window = ThresholdWindow(lo=window.lo, hi=window.hi, c_lo=c_lo, c_hi=c_hi,
                                 stability=selection_stability(beta, window))
    return window


def adaptive_weights(beta_pilot: np.ndarray, power: float = 1.0, floor: float = ADAPTIVE_FLOOR) -> np.ndarray:
    """
    omega_j = max(|pilot_j|, floor) ** power, scaled so that max omega = 1

    Args:
        beta_pilot: Pilot estimate
        power: Exponent (> 0)
        floor: Lower clip of |pilot_j| (> 0)

    Returns:
        Strictly positive weights
    """
    if power <= 0:
        raise ConfigurationError(f"power must be positive, got {power}")
    if floor <= 0:
        raise ConfigurationError(f"floor must be positive, got {floor}")
    weights = np.maximum(np.abs(np.asarray(beta_pilot, dtype=float)), floor) ** power
    return weights / weights.max()


def pilot_estimate(ds: Dataset, keep: Optional[int] = None) -> np.ndarray:
    """
    Minimal-norm least squares pilot, optionally on the `keep` screened columns
    (unscreened coordinates get zero)
    """
    if keep is None:
        return min_l2_solution(ds)
    reduced, index_map = screen_by_correlation(ds, keep)
    pilot = np.zeros(ds.p)
    pilot[index_map] = min_l2_solution(reduced)
    return pilot


@dataclass(frozen=True)
class SelectionReport:
    selected: Tuple[int, ...]
    false_positives: Optional[int] = None
    true_negatives_missed: Optional[int] = None
    threshold: Optional[float] = None
    details: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "selected": list(self.selected),
            "false_positives": self.false_positives,
            "true_negatives_missed": self.true_negatives_missed,
            "threshold": self.threshold,
            **self.details,
        }

    def to_json(self) -> str:
        return json.dumps(to_jsonable(self.to_dict()), sort_keys=True, indent=2)


def score_selection(selected: Iterable[int], truth: Optional[GroundTruth] = None,
                    threshold: Optional[float] = None) -> SelectionReport:
    """
    fp = |selected minus S|, tn = |S minus selected|

    Args:
        selected: Selected indices
        truth: Ground truth (counts are None without it)
        threshold: Threshold that produced the selection

    Returns:
        SelectionReport
    """
    chosen = tuple(sorted(set(int(j) for j in selected)))
    if truth is None:
        return SelectionReport(selected=chosen, threshold=threshold)
    if chosen and (chosen[0] < 0 or chosen[-1] >= truth.p):
        raise ConfigurationError(f"selected indices must lie in [0, {truth.p})")
    support = set(truth.support)
    return SelectionReport(
        selected=chosen,
        false_positives=len(set(chosen) - support),
        true_negatives_missed=len(support - set(chosen)),
        threshold=threshold,
    )
