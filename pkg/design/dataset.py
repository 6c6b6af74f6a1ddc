"""
Regression problems: datasets, ground truth, synthetic Gaussian designs
"""
from dataclasses import dataclass, field, replace
from typing import Optional, Sequence, Tuple
import logging

import numpy as np

from utils.errors import ConfigurationError, DegenerateInputError, DimensionMismatchError

logger = logging.getLogger(__name__)

COVARIANCE_KINDS = ("identity", "equicorrelated", "toeplitz")

NORMALIZATION_RTOL = 1e-8


def _frozen(array: np.ndarray) -> np.ndarray:
    out = np.array(array, dtype=float, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Dataset:
    """
    Design matrix and (optional) response

    A dataset without a response is what generate_design returns; attach_response
    completes it. Arrays are copied and made read-only on construction.
    """
    X: np.ndarray
    y: Optional[np.ndarray] = None
    column_norms: Optional[np.ndarray] = None
    normalized: bool = False
    names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        X = np.asarray(self.X, dtype=float)
        if X.ndim != 2 or X.shape[0] < 1 or X.shape[1] < 1:
            raise DimensionMismatchError(f"X must be a non-empty 2-D array, got shape {X.shape}")
        if not np.all(np.isfinite(X)):
            raise DegenerateInputError("X contains non-finite entries")
        object.__setattr__(self, "X", _frozen(X))

        if self.y is not None:
            y = np.asarray(self.y, dtype=float).reshape(-1)
            if y.shape[0] != X.shape[0]:
                raise DimensionMismatchError(f"y has length {y.shape[0]}, expected {X.shape[0]}")
            if not np.all(np.isfinite(y)):
                raise DegenerateInputError("y contains non-finite entries")
            object.__setattr__(self, "y", _frozen(y))

        norms = np.linalg.norm(X, axis=0) if self.column_norms is None else self.column_norms
        norms = np.asarray(norms, dtype=float).reshape(-1)
        if norms.shape[0] != X.shape[1]:
            raise DimensionMismatchError("column_norms must have one entry per column")
        object.__setattr__(self, "column_norms", _frozen(norms))

        if self.names is not None:
            if len(self.names) != X.shape[1]:
                raise DimensionMismatchError("names must have one entry per column")
            object.__setattr__(self, "names", tuple(str(name) for name in self.names))

    @property
    def n(self) -> int:
        return self.X.shape[0]

    @property
    def p(self) -> int:
        return self.X.shape[1]

    @property
    def has_response(self) -> bool:
        return self.y is not None

    def require_response(self) -> np.ndarray:
        if self.y is None:
            raise DegenerateInputError("dataset has no response; call attach_response first")
        return self.y

    def rows(self, index: Sequence[int]) -> "Dataset":
        """Row subset (column metadata is kept)"""
        index = np.asarray(index, dtype=int)
        if index.size == 0:
            raise DegenerateInputError("row subset is empty")
        y = None if self.y is None else self.y[index]
        norms = self.column_norms if self.normalized else None
        return replace(self, X=self.X[index], y=y, column_norms=norms)

    def columns(self, index: Sequence[int]) -> "Dataset":
        """Column subset"""
        index = np.asarray(index, dtype=int)
        names = None if self.names is None else tuple(self.names[i] for i in index)
        return replace(self, X=self.X[:, index], column_norms=self.column_norms[index], names=names)

    def with_response(self, y: np.ndarray) -> "Dataset":
        return replace(self, y=y)


@dataclass(frozen=True)
class CovarianceSpec:
    """Population covariance of the Gaussian rows"""
    kind: str
    p: int
    rho: float = 0.0

    def __post_init__(self):
        if self.kind not in COVARIANCE_KINDS:
            raise ConfigurationError(f"unknown covariance kind {self.kind!r}; expected one of {COVARIANCE_KINDS}")
        if self.p < 1:
            raise ConfigurationError(f"p must be positive, got {self.p}")
        if not 0.0 <= self.rho < 1.0:
            raise ConfigurationError(f"rho must lie in [0, 1), got {self.rho}")

    def matrix(self) -> np.ndarray:
        """Dense covariance (p x p)"""
        if self.kind == "identity":
            return np.eye(self.p)
        if self.kind == "equicorrelated":
            return self.rho + (1.0 - self.rho) * np.eye(self.p)
        lags = np.abs(np.subtract.outer(np.arange(self.p), np.arange(self.p)))
        return self.rho ** lags


@dataclass(frozen=True, eq=False)
class GroundTruth:
    """
    True coefficients with the strong / weak support partition

    Strong support S1 and weak support S2 partition the support S.
    """
    beta_star: np.ndarray
    sigma: float
    strong_support: Tuple[int, ...]
    weak_support: Tuple[int, ...] = field(default_factory=tuple)

    def __post_init__(self):
        beta = _frozen(np.asarray(self.beta_star, dtype=float).reshape(-1))
        object.__setattr__(self, "beta_star", beta)
        if self.sigma < 0:
            raise ConfigurationError(f"sigma must be non-negative, got {self.sigma}")
        strong = tuple(sorted(int(j) for j in self.strong_support))
        weak = tuple(sorted(int(j) for j in self.weak_support))
        object.__setattr__(self, "strong_support", strong)
        object.__setattr__(self, "weak_support", weak)
        if set(strong) & set(weak):
            raise ConfigurationError("strong and weak supports overlap")
        if set(strong) | set(weak) != set(self.support):
            raise ConfigurationError("strong and weak supports must partition the nonzeros of beta_star")

    @classmethod
    def from_beta(cls, beta_star: np.ndarray, sigma: float, n: int) -> "GroundTruth":
        """
        Classify the support: weak if |beta_j| <= 2 sigma sqrt(log p / n), else strong

        Args:
            beta_star: True coefficients
            sigma: Noise standard deviation
            n: Sample size used for the weak-signal level
        """
        beta = np.asarray(beta_star, dtype=float).reshape(-1)
        support = np.flatnonzero(beta)
        level = 2.0 * sigma * np.sqrt(np.log(max(beta.shape[0], 2)) / n)
        weak = [int(j) for j in support if abs(beta[j]) <= level]
        strong = [int(j) for j in support if abs(beta[j]) > level]
        return cls(beta_star=beta, sigma=float(sigma), strong_support=tuple(strong), weak_support=tuple(weak))

    @property
    def p(self) -> int:
        return self.beta_star.shape[0]

    @property
    def support(self) -> Tuple[int, ...]:
        return tuple(int(j) for j in np.flatnonzero(self.beta_star))

    @property
    def s(self) -> int:
        return len(self.support)

    @property
    def s1(self) -> int:
        return len(self.strong_support)

    @property
    def m(self) -> float:
        """s1-th largest |beta*| over the strong support"""
        if not self.strong_support:
            return 0.0
        return float(np.min(np.abs(self.beta_star[list(self.strong_support)])))

    @property
    def kappa(self) -> float:
        if not self.strong_support:
            return 1.0
        strong = np.abs(self.beta_star[list(self.strong_support)])
        return float(strong.max() / strong.min())


def generate_design(n: int, spec: CovarianceSpec, seed: int) -> Dataset:
    """
    Gaussian design with i.i.d. rows N(0, Sigma)

    Args:
        n: Number of rows
        spec: Covariance specification
        seed: RNG seed

    Returns:
        Dataset without response
    """
    if n < 1:
        raise ConfigurationError(f"n must be positive, got {n}")
    rng = np.random.default_rng(seed)
    Z = rng.standard_normal((n, spec.p))

    if spec.kind == "identity":
        X = Z
    elif spec.kind == "equicorrelated":
        # Shared factor: cov = rho * 11^T + (1 - rho) I
        shared = rng.standard_normal((n, 1))
        X = np.sqrt(1.0 - spec.rho) * Z + np.sqrt(spec.rho) * shared
    else:
        # Stationary AR(1) across columns: cov_jk = rho^|j-k|
        X = np.empty_like(Z)
        X[:, 0] = Z[:, 0]
        innovation = np.sqrt(1.0 - spec.rho ** 2)
        for j in range(1, spec.p):
            X[:, j] = spec.rho * X[:, j - 1] + innovation * Z[:, j]

    logger.debug(f"Generated {n}x{spec.p} {spec.kind} design (rho={spec.rho}, seed={seed})")
    return Dataset(X=X)


def attach_response(design: Dataset, truth: GroundTruth, seed: int) -> Dataset:
    """
    y = X beta* + w with w ~ N(0, sigma^2 I)

    Args:
        design: Dataset (any existing response is replaced)
        truth: Ground truth supplying beta* and sigma
        seed: Noise seed

    Returns:
        Dataset with response
    """
    if truth.p != design.p:
        raise DimensionMismatchError(f"beta_star has length {truth.p}, design has {design.p} columns")
    y = design.X @ truth.beta_star
    if truth.sigma > 0:
        y = y + truth.sigma * np.random.default_rng(seed).standard_normal(design.n)
    return design.with_response(y)


def normalize_columns(ds: Dataset) -> Dataset:
    """
    Rescale every column to l2 norm sqrt(n)

    Original norms stay in column_norms, so coefficients can be mapped back with
    to_original_scale. Already-normalized datasets are returned unchanged.
    """
    if ds.normalized:
        return ds
    norms = np.linalg.norm(ds.X, axis=0)
    zero = np.flatnonzero(norms == 0.0)
    if zero.size:
        raise DegenerateInputError(f"column {int(zero[0])} has zero norm and cannot be normalized", index=int(zero[0]))
    X = ds.X * (np.sqrt(ds.n) / norms)
    return replace(ds, X=X, column_norms=norms, normalized=True)


def denormalize_columns(ds: Dataset) -> Dataset:
    """Inverse of normalize_columns"""
    if not ds.normalized:
        return ds
    X = ds.X * (ds.column_norms / np.sqrt(ds.n))
    return replace(ds, X=X, column_norms=None, normalized=False)


def to_original_scale(beta: np.ndarray, ds: Dataset) -> np.ndarray:
    """Map coefficients fitted on a normalized design back to raw columns"""
    if not ds.normalized:
        return np.asarray(beta, dtype=float)
    return np.asarray(beta, dtype=float) * np.sqrt(ds.n) / ds.column_norms


def is_normalized(ds: Dataset, rtol: float = NORMALIZATION_RTOL) -> bool:
    """True if every column norm equals sqrt(n) within rtol"""
    norms = np.linalg.norm(ds.X, axis=0)
    return bool(np.allclose(norms, np.sqrt(ds.n), rtol=rtol, atol=0.0))


def split_rows(ds: Dataset, fractions: Sequence[float]) -> Tuple[Dataset, ...]:
    """
    Contiguous row split by fractions (rows are i.i.d., so order carries no signal)

    Args:
        ds: Dataset
        fractions: Fractions summing to 1

    Returns:
        One dataset per fraction
    """
    if not np.isclose(sum(fractions), 1.0):
        raise ConfigurationError(f"split fractions must sum to 1, got {sum(fractions)}")
    bounds = np.round(np.cumsum([0.0] + list(fractions)) * ds.n).astype(int)
    return tuple(ds.rows(np.arange(lo, hi)) for lo, hi in zip(bounds[:-1], bounds[1:]))


def fixed_signal(p: int, values: Sequence[float], positions: Optional[Sequence[int]] = None) -> np.ndarray:
    """beta* with the given values at positions (default: the first len(values) indices)"""
    positions = list(range(len(values))) if positions is None else list(positions)
    if len(positions) != len(values):
        raise ConfigurationError("values and positions must have the same length")
    if positions and (min(positions) < 0 or max(positions) >= p):
        raise ConfigurationError(f"signal positions must lie in [0, {p})")
    beta = np.zeros(p)
    beta[positions] = values
    return beta
