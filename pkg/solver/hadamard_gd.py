"""
Gradient descent on the Hadamard product parametrization beta = g * l

Loss f(g, l) = (2n)^-1 ||X (g * l) - y||^2, plus the non-negative variant
f(u) = (2n)^-1 ||X u^2 - y||^2.
"""
from dataclasses import dataclass, field, replace
from typing import Any, Dict, List, Optional, Protocol, Tuple
import logging

import numpy as np

from config.solver_config import (
    DEFAULT_ALPHA,
    DEFAULT_STOP_TOL,
    DEFAULT_T_MAX,
    DIVERGENCE_FACTOR,
    ETA_SAFETY,
    LOG_GRID_RATIO,
    POWER_ITERATION_STEPS,
)
from design.dataset import Dataset, GroundTruth
from utils.errors import ConfigurationError, DimensionMismatchError, DivergenceError
from utils.helpers import gram_lambda_max, log_spaced_times

logger = logging.getLogger(__name__)

INIT_MODES = ("uniform_pm_alpha", "deterministic_theory")
STOP_REASONS = ("tolerance", "t_max", "rule")
RECORD_MODES = ("every", "every_k", "log")


@dataclass(frozen=True, eq=False)
class HyperParams:
    """Solver hyper-parameters; eta=None means 0.5 / lambda_max(X^T X / n)"""
    alpha: float = DEFAULT_ALPHA
    eta: Optional[float] = None
    stop_tol: float = DEFAULT_STOP_TOL
    t_max: int = DEFAULT_T_MAX
    init_mode: str = "uniform_pm_alpha"
    weights: Optional[np.ndarray] = None

    def __post_init__(self):
        if not self.alpha > 0:
            raise ConfigurationError(f"alpha must be positive, got {self.alpha}")
        if self.eta is not None and not self.eta > 0:
            raise ConfigurationError(f"eta must be positive, got {self.eta}")
        if self.stop_tol < 0:
            raise ConfigurationError(f"stop_tol must be non-negative, got {self.stop_tol}")
        if self.t_max < 0:
            raise ConfigurationError(f"t_max must be non-negative, got {self.t_max}")
        if self.init_mode not in INIT_MODES:
            raise ConfigurationError(f"unknown init_mode {self.init_mode!r}; expected one of {INIT_MODES}")
        if self.weights is not None:
            weights = np.asarray(self.weights, dtype=float).reshape(-1)
            if not np.all(weights > 0) or not np.all(np.isfinite(weights)):
                raise ConfigurationError("weights must be strictly positive and finite")
            weights.setflags(write=False)
            object.__setattr__(self, "weights", weights)

    def evolve(self, **changes: Any) -> "HyperParams":
        return replace(self, **changes)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "eta": self.eta,
            "stop_tol": self.stop_tol,
            "t_max": self.t_max,
            "init_mode": self.init_mode,
            "weighted": self.weights is not None,
        }


@dataclass(frozen=True, eq=False)
class IterateState:
    """Iterate (g_t, l_t) with its residual X (g_t * l_t) - y"""
    g: np.ndarray
    l: np.ndarray
    t: int = 0
    residual: Optional[np.ndarray] = None

    @property
    def beta(self) -> np.ndarray:
        return self.g * self.l

    @property
    def a(self) -> np.ndarray:
        return (self.g + self.l) / 2.0

    @property
    def b(self) -> np.ndarray:
        return (self.g - self.l) / 2.0


@dataclass(frozen=True, eq=False)
class NonnegState:
    """Iterate u_t of the non-negative parametrization beta = u * u"""
    u: np.ndarray
    t: int = 0
    residual: Optional[np.ndarray] = None

    @property
    def beta(self) -> np.ndarray:
        return self.u * self.u


@dataclass(frozen=True)
class TrajectorySample:
    t: int
    train_rmse: float
    l1_norm: float
    beta_snapshot: Optional[np.ndarray] = None
    theta_s1: Optional[float] = None
    offsupport_maxabs: Optional[float] = None

    def to_row(self) -> Dict[str, Any]:
        return {
            "t": self.t,
            "train_rmse": self.train_rmse,
            "l1_norm": self.l1_norm,
            "theta_s1": self.theta_s1,
            "offsupport_maxabs": self.offsupport_maxabs,
        }


@dataclass(frozen=True)
class RecordingPolicy:
    """Which iterations are recorded: every step, every k-th step, or log-spaced"""
    mode: str = "log"
    k: int = 1
    ratio: float = LOG_GRID_RATIO
    keep_beta: bool = False

    def __post_init__(self):
        if self.mode not in RECORD_MODES:
            raise ConfigurationError(f"unknown recording mode {self.mode!r}; expected one of {RECORD_MODES}")
        if self.k < 1:
            raise ConfigurationError(f"k must be positive, got {self.k}")
        if self.ratio <= 1.0:
            raise ConfigurationError(f"ratio must exceed 1, got {self.ratio}")

    def times(self, t_max: int) -> List[int]:
        if self.mode == "every":
            return list(range(t_max + 1))
        if self.mode == "every_k":
            return sorted(set(range(0, t_max + 1, self.k)) | {t_max})
        return log_spaced_times(t_max, self.ratio)


@dataclass(frozen=True, eq=False)
class FitResult:
    beta_hat: np.ndarray
    stopped_at: int
    stop_reason: str
    trajectory: Tuple[TrajectorySample, ...] = ()
    diagnostics: Dict[str, float] = field(default_factory=dict)

    def snapshot_at(self, t: int) -> np.ndarray:
        """Recorded beta at iteration t"""
        for sample in self.trajectory:
            if sample.t == t and sample.beta_snapshot is not None:
                return sample.beta_snapshot
        raise KeyError(f"no beta snapshot recorded at t={t}")

    @property
    def times(self) -> List[int]:
        return [sample.t for sample in self.trajectory]

    def to_dict(self) -> Dict[str, Any]:
        return {
            "beta_hat": self.beta_hat,
            "stopped_at": self.stopped_at,
            "stop_reason": self.stop_reason,
            "diagnostics": dict(self.diagnostics),
        }


class IterateObserver(Protocol):
    """Anything that watches a run; returning True from observe halts it"""

    def update(self, t: int, beta: np.ndarray, ds: Dataset, eta: float) -> None: ...

    def observe(self, t: int, beta: np.ndarray) -> bool: ...


# =============================================================================
# STEP SIZE
# =============================================================================

def default_step_size(ds: Dataset) -> float:
    """ETA_SAFETY / lambda_max(X^T X / n), lambda_max by power iteration"""
    lam = gram_lambda_max(ds.X, steps=POWER_ITERATION_STEPS)
    if lam <= 0.0:
        # An all-zero design never moves the iterate
        return 1.0
    return ETA_SAFETY / lam


def resolve_step_size(ds: Dataset, hp: HyperParams) -> HyperParams:
    """Fill in the default step size; a user-set eta always wins"""
    if hp.eta is not None:
        return hp
    eta = default_step_size(ds)
    logger.debug(f"Default step size eta = {eta:.4g}")
    return hp.evolve(eta=eta)


def _require_eta(hp: HyperParams) -> float:
    if hp.eta is None:
        raise ConfigurationError("eta is unset; call resolve_step_size first")
    return hp.eta


def _check_weights(hp: HyperParams, p: int) -> None:
    if hp.weights is not None and hp.weights.shape[0] != p:
        raise DimensionMismatchError(f"weights have length {hp.weights.shape[0]}, expected {p}")


# =============================================================================
# GENERAL SIGNALS: beta = g * l
# =============================================================================

def init_iterate(p: int, hp: HyperParams, seed: int = 0) -> IterateState:
    """
    Initial (g_0, l_0)

    uniform_pm_alpha draws both i.i.d. Unif(-alpha, alpha); deterministic_theory
    sets g_0 = alpha * 1 and l_0 = 0.
    """
    if p < 1:
        raise ConfigurationError(f"p must be positive, got {p}")
    if hp.init_mode == "deterministic_theory":
        return IterateState(g=np.full(p, hp.alpha), l=np.zeros(p))
    rng = np.random.default_rng(seed)
    g = rng.uniform(-hp.alpha, hp.alpha, size=p)
    l = rng.uniform(-hp.alpha, hp.alpha, size=p)
    return IterateState(g=g, l=l)


def attach_residual(state: IterateState, ds: Dataset) -> IterateState:
    if state.g.shape[0] != ds.p:
        raise DimensionMismatchError(f"iterate has length {state.g.shape[0]}, design has {ds.p} columns")
    return replace(state, residual=ds.X @ state.beta - ds.require_response())


def gradient_bracket(residual: np.ndarray, ds: Dataset, hp: HyperParams) -> np.ndarray:
    """Common bracket omega * [n^-1 X^T r]"""
    bracket = ds.X.T @ residual / ds.n
    if hp.weights is not None:
        bracket = hp.weights * bracket
    return bracket


def gradient_step(state: IterateState, ds: Dataset, hp: HyperParams) -> IterateState:
    """
    One simultaneous update of (g, l); both halves use the time-t residual

    Raises:
        DivergenceError: if the new iterate has a non-finite component
    """
    eta = _require_eta(hp)
    _check_weights(hp, ds.p)
    if state.residual is None:
        state = attach_residual(state, ds)

    bracket = gradient_bracket(state.residual, ds, hp)
    g = state.g - eta * state.l * bracket
    l = state.l - eta * state.g * bracket

    if not (np.all(np.isfinite(g)) and np.all(np.isfinite(l))):
        magnitude = np.nanmax(np.abs(np.concatenate([g, l])))
        raise DivergenceError(state.t + 1, float(magnitude), last_beta=state.beta.copy())

    residual = ds.X @ (g * l) - ds.require_response()
    return IterateState(g=g, l=l, t=state.t + 1, residual=residual)


# =============================================================================
# NON-NEGATIVE SIGNALS: beta = u * u
# =============================================================================

def init_nonneg(p: int, hp: HyperParams) -> NonnegState:
    """u_0 = alpha * 1"""
    if p < 1:
        raise ConfigurationError(f"p must be positive, got {p}")
    return NonnegState(u=np.full(p, hp.alpha))


def gradient_step_nonneg(state: NonnegState, ds: Dataset, hp: HyperParams) -> NonnegState:
    """u_{t+1} = u_t - 2 eta u_t * [n^-1 X^T (X u_t^2 - y)]"""
    eta = _require_eta(hp)
    _check_weights(hp, ds.p)
    residual = state.residual
    if residual is None:
        residual = ds.X @ state.beta - ds.require_response()

    u = state.u - 2.0 * eta * state.u * gradient_bracket(residual, ds, hp)
    if not np.all(np.isfinite(u)):
        raise DivergenceError(state.t + 1, float(np.nanmax(np.abs(u))), last_beta=state.beta.copy())

    return NonnegState(u=u, t=state.t + 1, residual=ds.X @ (u * u) - ds.require_response())


# =============================================================================
# DRIVER
# =============================================================================

def _sample(t: int, beta: np.ndarray, residual: np.ndarray, n: int,
            truth: Optional[GroundTruth], keep_beta: bool) -> TrajectorySample:
    theta_s1 = offsupport = None
    if truth is not None:
        if truth.strong_support:
            theta_s1 = float(np.min(np.abs(beta[list(truth.strong_support)])))
        off = np.ones(beta.shape[0], dtype=bool)
        off[list(truth.support)] = False
        offsupport = float(np.max(np.abs(beta[off]))) if off.any() else 0.0
    return TrajectorySample(
        t=t,
        train_rmse=float(np.linalg.norm(residual) / np.sqrt(n)),
        l1_norm=float(np.sum(np.abs(beta))),
        beta_snapshot=beta.copy() if keep_beta else None,
        theta_s1=theta_s1,
        offsupport_maxabs=offsupport,
    )


def _drive(state, step, ds: Dataset, hp: HyperParams, stop: Optional[IterateObserver],
           record: RecordingPolicy, truth: Optional[GroundTruth]) -> FitResult:
    """Shared loop of run and run_nonneg"""
    grid = set(record.times(hp.t_max))
    trajectory: List[TrajectorySample] = []
    eta = hp.eta

    initial_rmse = float(np.linalg.norm(state.residual) / np.sqrt(ds.n))
    rmse = initial_rmse
    reason = "t_max"
    last_beta = state.beta.copy()

    def visit(current) -> bool:
        beta = current.beta
        if current.t in grid:
            trajectory.append(_sample(current.t, beta, current.residual, ds.n, truth, record.keep_beta))
        if stop is None:
            return False
        stop.update(current.t, beta, ds, eta)
        if current.t in grid:
            return bool(stop.observe(current.t, beta))
        return False

    halted = visit(state)
    while not halted:
        if hp.stop_tol > 0 and rmse <= hp.stop_tol:
            reason = "tolerance"
            break
        if state.t >= hp.t_max:
            break
        try:
            state = step(state, ds, hp)
        except DivergenceError as exc:
            exc.last_beta = last_beta
            logger.error(f"Run diverged at t={exc.t}")
            raise
        rmse = float(np.linalg.norm(state.residual) / np.sqrt(ds.n))
        if initial_rmse > 0 and rmse > DIVERGENCE_FACTOR * initial_rmse:
            raise DivergenceError(state.t, float(np.max(np.abs(state.beta))), last_beta=last_beta)
        last_beta = state.beta.copy()
        halted = visit(state)

    if halted:
        reason = "rule"

    # The final iterate is always part of the trajectory
    if not trajectory or trajectory[-1].t != state.t:
        trajectory.append(_sample(state.t, state.beta, state.residual, ds.n, truth, record.keep_beta))

    logger.info(f"GD stopped at t={state.t} ({reason}), train rmse {rmse:.3e}")
    return FitResult(
        beta_hat=state.beta.copy(),
        stopped_at=state.t,
        stop_reason=reason,
        trajectory=tuple(trajectory),
        diagnostics={
            "eta": float(eta),
            "alpha": hp.alpha,
            "n": ds.n,
            "p": ds.p,
            "initial_rmse": initial_rmse,
            "final_rmse": rmse,
            "l1_norm": float(np.sum(np.abs(state.beta))),
        },
    )


def run(ds: Dataset, hp: HyperParams, stop: Optional[IterateObserver] = None,
        record: Optional[RecordingPolicy] = None, seed: int = 0,
        truth: Optional[GroundTruth] = None) -> FitResult:
    """
    Gradient descent until the tolerance, a stopping rule, or t_max

    Args:
        ds: Training data
        hp: Hyper-parameters (eta resolved here when unset)
        stop: Observer that may halt the run at recorded iterations
        record: Recording policy (default: log-spaced)
        seed: Initialization seed
        truth: Ground truth for theta_s1 / off-support diagnostics

    Returns:
        FitResult whose beta_hat is the last iterate
    """
    record = record or RecordingPolicy()
    hp = resolve_step_size(ds, hp)
    _check_weights(hp, ds.p)
    state = attach_residual(init_iterate(ds.p, hp, seed), ds)
    return _drive(state, gradient_step, ds, hp, stop, record, truth)


def run_nonneg(ds: Dataset, hp: HyperParams, record: Optional[RecordingPolicy] = None,
               stop: Optional[IterateObserver] = None,
               truth: Optional[GroundTruth] = None) -> FitResult:
    """Gradient descent on the u * u parametrization from u_0 = alpha * 1"""
    record = record or RecordingPolicy()
    hp = resolve_step_size(ds, hp)
    _check_weights(hp, ds.p)
    state = init_nonneg(ds.p, hp)
    state = replace(state, residual=ds.X @ state.beta - ds.require_response())
    return _drive(state, gradient_step_nonneg, ds, hp, stop, record, truth)


def min_l2_solution(ds: Dataset) -> np.ndarray:
    """Moore-Penrose solution X^+ y (SVD-based least squares)"""
    from scipy.linalg import lstsq

    solution, _, _, _ = lstsq(ds.X, ds.require_response(), lapack_driver="gelsd")
    return solution
