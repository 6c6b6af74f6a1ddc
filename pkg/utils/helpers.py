"""
Utility functions for the Hadamard sparse regression toolkit
"""
import hashlib
import json
import logging
from typing import Any, List, Optional

import numpy as np

from config.solver_config import LOG_GRID_RATIO, POWER_ITERATION_STEPS

logger = logging.getLogger(__name__)

_MASK64 = (1 << 64) - 1


def splitmix64(state: int) -> int:
    """One splitmix64 output for a 64-bit state"""
    z = (state + 0x9E3779B97F4A7C15) & _MASK64
    z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK64
    return z ^ (z >> 31)


def derive_seed(master_seed: int, index: int, stream: int = 0) -> int:
    """
    Derive an independent 64-bit seed for sub-task `index` of `stream`

    Args:
        master_seed: Unsigned 64-bit master seed
        index: Replication / fold index
        stream: Stream tag separating unrelated uses of the same index

    Returns:
        Derived seed
    """
    state = splitmix64((master_seed & _MASK64) ^ splitmix64(stream & _MASK64))
    return splitmix64(state ^ (index & _MASK64))


def to_jsonable(value: Any) -> Any:
    """Convert numpy containers and scalars into plain JSON types"""
    if isinstance(value, dict):
        return {str(k): to_jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [to_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [to_jsonable(v) for v in value.tolist()]
    if isinstance(value, np.generic):
        return to_jsonable(value.item())
    if isinstance(value, float) and not np.isfinite(value):
        return None
    return value


def canonical_json(payload: Any) -> str:
    """Deterministic JSON text (sorted keys, fixed indentation)"""
    return json.dumps(to_jsonable(payload), sort_keys=True, indent=2)


def hash_config(payload: Any) -> str:
    """
    SHA-256 of the canonical JSON of a configuration, for provenance

    Args:
        payload: JSON-compatible configuration

    Returns:
        Hex digest (first 16 characters)
    """
    text = json.dumps(to_jsonable(payload), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(text.encode('utf-8')).hexdigest()[:16]


def gram_lambda_max(X: np.ndarray, steps: int = POWER_ITERATION_STEPS,
                    tol: float = 0.0, seed: int = 0) -> float:
    """
    Largest eigenvalue of X^T X / n by power iteration

    Args:
        X: Design matrix (n x p)
        steps: Maximum number of iterations
        tol: Stop early once the relative change falls below tol
        seed: Seed of the random start vector

    Returns:
        Estimated lambda_max (0.0 for an all-zero design)
    """
    n, p = X.shape
    v = np.random.default_rng(seed).standard_normal(p)
    v /= np.linalg.norm(v)
    estimate = 0.0
    for _ in range(steps):
        w = X.T @ (X @ v) / n
        norm = np.linalg.norm(w)
        if norm == 0.0:
            return 0.0
        previous, estimate = estimate, float(v @ w)
        v = w / norm
        if tol > 0 and abs(estimate - previous) <= tol * abs(estimate):
            break
    return estimate


def theta_k(values: np.ndarray, k: int) -> float:
    """k-th largest absolute component (1-based k)"""
    if k <= 0 or len(values) == 0:
        return 0.0
    magnitudes = np.sort(np.abs(values))[::-1]
    return float(magnitudes[min(k, len(magnitudes)) - 1])


def log_spaced_times(t_max: int, ratio: float = LOG_GRID_RATIO) -> List[int]:
    """
    Iteration indices {0} U {round(ratio**k)} U {t_max}, sorted and unique

    Args:
        t_max: Last iteration
        ratio: Geometric spacing ratio (> 1)

    Returns:
        Sorted list of iteration indices
    """
    times = {0, t_max}
    value = 1.0
    while value <= t_max:
        times.add(int(round(value)))
        value *= ratio
    return sorted(t for t in times if 0 <= t <= t_max)


def make_folds(n: int, k: int, seed: int) -> List[np.ndarray]:
    """
    Contiguous-block folds after a seeded shuffle

    Args:
        n: Number of samples
        k: Number of folds (2 <= k <= n)
        seed: Shuffle seed

    Returns:
        List of k index arrays partitioning range(n)
    """
    permutation = np.random.default_rng(seed).permutation(n)
    return [np.sort(block) for block in np.array_split(permutation, k)]


def relative_error(estimate: np.ndarray, truth: np.ndarray) -> float:
    """Standardized estimation error ||estimate - truth||^2 / ||truth||^2"""
    denominator = float(truth @ truth)
    diff = estimate - truth
    if denominator == 0.0:
        return float(diff @ diff)
    return float(diff @ diff) / denominator


def optional_float(value: Optional[float]) -> Optional[float]:
    return None if value is None else float(value)
