"""
Restricted isometry constant estimation
"""
from dataclasses import dataclass
from itertools import combinations
from typing import Iterator, Sequence, Tuple
import logging

import numpy as np
from scipy.special import comb

from design.dataset import Dataset
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RipEstimate:
    """Lower bound on the (s, delta) restricted isometry constant"""
    sparsity: int
    delta_lower: float
    supports_tested: int
    exact: bool
    worst_support: Tuple[int, ...]

    def to_dict(self):
        return {
            "sparsity": self.sparsity,
            "delta_lower": self.delta_lower,
            "supports_tested": self.supports_tested,
            "exact": self.exact,
            "worst_support": list(self.worst_support),
        }


def isometry_defect(ds: Dataset, support: Sequence[int]) -> float:
    """
    Largest |eigenvalue| of X_T^T X_T / n - I for one support T
    """
    columns = ds.X[:, list(support)]
    gram = columns.T @ columns / ds.n
    eigenvalues = np.linalg.eigvalsh(gram - np.eye(len(support)))
    return float(np.max(np.abs(eigenvalues)))


def _sampled_supports(p: int, s: int, budget: int, seed: int) -> Iterator[Tuple[int, ...]]:
    # Sequential draws: a smaller budget tests a prefix of a larger one
    rng = np.random.default_rng(seed)
    for _ in range(budget):
        yield tuple(sorted(int(j) for j in rng.choice(p, size=s, replace=False)))


def estimate_rip(ds: Dataset, s: int, budget: int, seed: int = 0) -> RipEstimate:
    """
    Certified lower bound on the RIP constant of order s

    All C(p, s) supports are enumerated when that count is within budget (the
    bound is then exact); otherwise `budget` random supports are tested.

    Args:
        ds: Dataset
        s: Sparsity level (1 <= s <= p)
        budget: Maximum number of supports to test
        seed: Sampling seed

    Returns:
        RipEstimate
    """
    if not 1 <= s <= ds.p:
        raise ConfigurationError(f"s must lie in [1, {ds.p}], got {s}")
    if budget < 1:
        raise ConfigurationError(f"budget must be positive, got {budget}")

    total = comb(ds.p, s, exact=True)
    exact = total <= budget
    supports = combinations(range(ds.p), s) if exact else _sampled_supports(ds.p, s, budget, seed)

    delta, worst, tested = 0.0, (), 0
    for support in supports:
        defect = isometry_defect(ds, support)
        tested += 1
        if defect > delta:
            delta, worst = defect, tuple(support)

    logger.info(f"RIP(s={s}): delta >= {min(delta, 1.0):.4f} over {tested} supports"
                f"{' (exhaustive)' if exact else ''}")
    return RipEstimate(
        sparsity=s,
        delta_lower=min(delta, 1.0),
        supports_tested=tested,
        exact=exact,
        worst_support=worst,
    )
