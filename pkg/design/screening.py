"""
Marginal correlation screening
"""
from typing import Tuple
import logging

import numpy as np

from design.dataset import Dataset
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)


def marginal_correlations(ds: Dataset) -> np.ndarray:
    """
    |corr(X_j, y)| per column; constant columns (and a constant y) score -inf
    """
    y = ds.require_response()
    Xc = ds.X - ds.X.mean(axis=0)
    yc = y - y.mean()
    column_scale = np.linalg.norm(Xc, axis=0)
    response_scale = np.linalg.norm(yc)

    scores = np.full(ds.p, -np.inf)
    usable = column_scale > 0
    if response_scale > 0:
        scores[usable] = np.abs(Xc[:, usable].T @ yc) / (column_scale[usable] * response_scale)
    return scores


def screen_by_correlation(ds: Dataset, keep: int) -> Tuple[Dataset, np.ndarray]:
    """
    Keep the `keep` columns with the largest marginal |correlation| with y

    Ties are broken by the lower original index; constant columns rank last.

    Args:
        ds: Dataset with response
        keep: Number of columns to retain (1 <= keep <= p)

    Returns:
        (reduced dataset, index map) where index_map[j] is the original index of
        reduced column j; kept columns stay in ascending original order
    """
    if not 1 <= keep <= ds.p:
        raise ConfigurationError(f"keep must lie in [1, {ds.p}], got {keep}")

    scores = marginal_correlations(ds)
    # lexsort: last key is primary -> descending score, then ascending index
    order = np.lexsort((np.arange(ds.p), -scores))
    index_map = np.sort(order[:keep])

    logger.info(f"Screening kept {keep}/{ds.p} columns "
                f"(min kept |corr| = {scores[order[keep - 1]]:.4f})")
    return ds.columns(index_map), index_map
