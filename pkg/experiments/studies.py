"""
Noiseless and dynamics studies of the Hadamard GD solver
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List, Optional, Sequence, Tuple
import logging

import numpy as np
import pandas as pd

from baselines.lasso import lambda_grid, lasso_cv, lasso_path
from config.solver_config import (
    BOOTSTRAP_RESAMPLES,
    EXPERIMENT_LASSO_TOL,
    SIGNALS,
    SWEEP_STEP_SIZES,
    TOLERANCE_FACTOR,
)
from design.dataset import CovarianceSpec, Dataset, GroundTruth, attach_response, fixed_signal, generate_design
from experiments.harness import bootstrap_se, make_replication, run_setting
from experiments.settings import SettingSpec, get_setting
from selection.selection import score_selection, select_support
from solver.hadamard_gd import (
    HyperParams,
    RecordingPolicy,
    attach_residual,
    gradient_step,
    gradient_step_nonneg,
    init_iterate,
    init_nonneg,
    resolve_step_size,
    run,
)
from stopping.rules import holdout_stop
from storage.models import SummaryTable
from utils.errors import ConfigurationError, DivergenceError
from utils.helpers import derive_seed, relative_error

logger = logging.getLogger(__name__)

NULL_SPACE_X = np.array([[0.2, 1.0, 0.0], [0.2, 0.0, -1.0]])
NULL_SPACE_Y = np.array([1.0, 1.0])

DESIGN_KINDS = {
    "independent": ("identity", 0.0),
    "correlated": ("equicorrelated", 0.5),
}


def null_space_dataset() -> Dataset:
    """2 x 3 instance whose minimal-l1 solution (0, 1, -1) is not the sparsest (5, 0, 0)"""
    return Dataset(X=NULL_SPACE_X, y=NULL_SPACE_Y)


def _noiseless_problem(design_kind: str, n: int, p: int, seed: int) -> Tuple[Dataset, GroundTruth]:
    if design_kind not in DESIGN_KINDS:
        raise ConfigurationError(f"unknown design kind {design_kind!r}; expected one of {sorted(DESIGN_KINDS)}")
    kind, rho = DESIGN_KINDS[design_kind]
    truth = GroundTruth.from_beta(fixed_signal(p, SIGNALS), 0.0, n)
    design = generate_design(n, CovarianceSpec(kind=kind, p=p, rho=rho), derive_seed(seed, 0))
    return attach_response(design, truth, derive_seed(seed, 1)), truth


# =============================================================================
# INITIALIZATION SWEEP
# =============================================================================

@dataclass
class SweepCurve:
    design_kind: str
    alphas: List[float]
    errors: List[float]
    iterations: List[int]
    eta: float

    @property
    def slope(self) -> float:
        """Fitted slope of log10(error) against log10(alpha) over finite points"""
        alphas, errors = np.asarray(self.alphas), np.asarray(self.errors)
        ok = np.isfinite(errors) & (errors > 0)
        if ok.sum() < 2:
            return float("nan")
        return float(np.polyfit(np.log10(alphas[ok]), np.log10(errors[ok]), 1)[0])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"alpha": self.alphas, "l2_error": self.errors, "iterations": self.iterations})

    def to_dict(self) -> Dict[str, Any]:
        return {"design_kind": self.design_kind, "eta": self.eta, "slope": self.slope,
                "points": self.to_frame().to_dict(orient="records")}


def init_sweep(design_kind: str, alphas: Sequence[float], seed: int = 0, n: int = 200, p: int = 500,
               t_max: int = 20000, eta: Optional[float] = None) -> SweepCurve:
    """
    Final l2 error against the initialization scale on a noiseless problem

    Each run starts from Unif(-alpha, alpha) factors and stops once the train
    rmse is below TOLERANCE_FACTOR * alpha (or at t_max).

    Args:
        design_kind: independent or correlated (equicorrelated 0.5)
        alphas: Initialization scales
        seed: Data and initialization seed
        n: Sample size
        p: Dimension
        t_max: Iteration cap per run
        eta: Step size (default per design kind: 0.2 / 0.1)

    Returns:
        SweepCurve (diverged runs have error nan)
    """
    ds, truth = _noiseless_problem(design_kind, n, p, seed)
    eta = SWEEP_STEP_SIZES[design_kind] if eta is None else eta
    errors, iterations = [], []

    for alpha in alphas:
        hp = HyperParams(alpha=alpha, eta=eta, t_max=t_max, stop_tol=TOLERANCE_FACTOR * alpha)
        try:
            fit = run(ds, hp, record=RecordingPolicy(mode="log"), seed=derive_seed(seed, 2))
            errors.append(float(np.linalg.norm(fit.beta_hat - truth.beta_star)))
            iterations.append(fit.stopped_at)
        except DivergenceError as e:
            logger.warning(f"Sweep run at alpha={alpha:g} diverged: {e}")
            errors.append(float("nan"))
            iterations.append(e.t)
        logger.info(f"{design_kind} sweep: alpha={alpha:g} error={errors[-1]:.3e}")

    return SweepCurve(design_kind=design_kind, alphas=list(alphas), errors=errors, iterations=iterations, eta=eta)


# =============================================================================
# NULL-SPACE EXAMPLE
# =============================================================================

@dataclass
class NullSpaceRow:
    alpha: float
    beta: np.ndarray
    iterations: int

    def to_dict(self) -> Dict[str, Any]:
        return {
            "alpha": self.alpha,
            "beta1": float(self.beta[0]),
            "one_minus_beta2": float(1.0 - self.beta[1]),
            "one_plus_beta3": float(1.0 + self.beta[2]),
            "iterations": self.iterations,
        }


def null_space_example(alphas: Sequence[float], eta: float = SWEEP_STEP_SIZES["independent"],
                       t_max: int = 20000, stop_tol: float = 1e-14) -> List[NullSpaceRow]:
    """
    GD limits on the null-space instance for a grid of initialization scales

    Runs start from the deterministic (alpha 1, 0) initialization, which keeps
    the instance's symmetry 1 - beta2 = 1 + beta3, and use the step size of
    the independent-design sweep.
    """
    ds = null_space_dataset()
    rows = []
    for alpha in alphas:
        hp = HyperParams(alpha=alpha, eta=eta, t_max=t_max, stop_tol=stop_tol, init_mode="deterministic_theory")
        fit = run(ds, hp)
        rows.append(NullSpaceRow(alpha=alpha, beta=fit.beta_hat, iterations=fit.stopped_at))
        logger.info(f"Null-space example: alpha={alpha:g} beta={np.array2string(fit.beta_hat, precision=6)}")
    return rows


# =============================================================================
# STAGE DYNAMICS
# =============================================================================

@dataclass
class StageReport:
    """Measured two-stage behaviour of one run"""
    variant: str
    eta: float
    m: float
    stage_one_end: Optional[int]
    growth_factors: List[float] = field(default_factory=list)
    offsupport_max: float = 0.0
    contraction_factor: Optional[float] = None
    error_floor: float = 0.0
    errors: List[float] = field(default_factory=list)

    @property
    def min_growth(self) -> float:
        return min(self.growth_factors) if self.growth_factors else float("nan")

    def growth_holds(self, fraction: float = 0.125) -> bool:
        """Every stage-one step grows theta by at least 1 + fraction * eta * m"""
        return bool(self.growth_factors) and self.min_growth >= 1.0 + fraction * self.eta * self.m

    def offsupport_holds(self, p: int, constant: float = 100.0) -> bool:
        return self.offsupport_max <= constant / p

    def contraction_holds(self, fraction: float = 0.25) -> bool:
        return self.contraction_factor is not None and self.contraction_factor <= 1.0 - fraction * self.eta * self.m

    def to_dict(self) -> Dict[str, Any]:
        return {
            "variant": self.variant,
            "eta": self.eta,
            "m": self.m,
            "stage_one_end": self.stage_one_end,
            "min_growth": self.min_growth,
            "offsupport_max": self.offsupport_max,
            "contraction_factor": self.contraction_factor,
            "error_floor": self.error_floor,
        }


def stage_problem(variant: str = "general", seed: int = 0, n: int = 200, p: int = 500,
                  sigma: float = 0.0) -> Tuple[GroundTruth, Dataset]:
    """
    Isotropic design with strong-only signals (their absolute values for nonneg)
    """
    values = np.abs(SIGNALS) if variant == "nonneg" else np.asarray(SIGNALS)
    truth = GroundTruth.from_beta(fixed_signal(p, values), sigma, n)
    design = generate_design(n, CovarianceSpec(kind="identity", p=p), derive_seed(seed, 0))
    return truth, attach_response(design, truth, derive_seed(seed, 1))


def _contraction(errors: np.ndarray, start: int) -> Tuple[Optional[float], float]:
    """Fitted per-step factor of (error - floor) from `start` until the floor is reached"""
    floor = float(np.min(errors))
    excess = errors[start:] - floor
    threshold = max(floor, 1e-12 * excess[0]) if excess.size else 0.0
    below = np.flatnonzero(excess <= threshold)
    end = int(below[0]) if below.size else excess.size
    window = excess[:end]
    if window.size < 3 or np.any(window <= 0):
        return None, floor
    slope = np.polyfit(np.arange(window.size), np.log(window), 1)[0]
    return float(np.exp(slope)), floor


def stage_dynamics_probe(truth: GroundTruth, ds: Dataset, hp: HyperParams,
                         variant: str = "general", seed: int = 0) -> StageReport:
    """
    Stage-one growth, off-support size and stage-two contraction of one run

    general: theta is the smallest growing factor (a_j for beta*_j > 0, b_j
    otherwise) over the strong support; stage one lasts while some strong
    sign(beta*_j) beta_j < m / 2. nonneg: theta is the smallest strong u_j and
    stage one lasts while theta < sqrt(m) / 2. Off-support size is the largest
    |a|, |b| (or |u|) outside the strong support during stage one.

    Args:
        truth: Ground truth (only strong signals are tracked)
        ds: Data
        hp: Hyper-parameters (deterministic_theory init expected for general)
        variant: general or nonneg
        seed: Initialization seed (uniform init only)

    Returns:
        StageReport
    """
    if variant not in ("general", "nonneg"):
        raise ConfigurationError(f"unknown variant {variant!r}")
    if not truth.strong_support:
        raise ConfigurationError("stage dynamics need at least one strong signal")
    hp = resolve_step_size(ds, hp)
    strong = np.array(truth.strong_support)
    signs = np.sign(truth.beta_star[strong])
    off = np.ones(ds.p, dtype=bool)
    off[strong] = False
    m = truth.m

    if variant == "general":
        state = attach_residual(init_iterate(ds.p, hp, seed), ds)
        step = gradient_step
    else:
        state = init_nonneg(ds.p, hp)
        step = gradient_step_nonneg

    def theta(current) -> float:
        if variant == "nonneg":
            return float(np.min(current.u[strong]))
        growing = np.where(signs > 0, np.abs(current.a[strong]), np.abs(current.b[strong]))
        return float(np.min(growing))

    def in_stage_one(current) -> bool:
        if variant == "nonneg":
            return theta(current) < np.sqrt(m) / 2.0
        return bool(np.min(signs * current.beta[strong]) < m / 2.0)

    def off_size(current) -> float:
        if not off.any():
            return 0.0
        if variant == "nonneg":
            return float(np.max(np.abs(current.u[off])))
        return float(max(np.max(np.abs(current.a[off])), np.max(np.abs(current.b[off]))))

    report = StageReport(variant=variant, eta=float(hp.eta), m=m, stage_one_end=None)
    errors = [float(np.sum((state.beta - truth.beta_star) ** 2))]
    stage_one = in_stage_one(state)
    report.offsupport_max = off_size(state)

    while state.t < hp.t_max:
        previous = theta(state)
        state = step(state, ds, hp)
        errors.append(float(np.sum((state.beta - truth.beta_star) ** 2)))
        if stage_one:
            if previous > 0:
                report.growth_factors.append(theta(state) / previous)
            report.offsupport_max = max(report.offsupport_max, off_size(state))
            if not in_stage_one(state):
                stage_one = False
                report.stage_one_end = state.t

    report.errors = errors
    if report.stage_one_end is not None:
        report.contraction_factor, report.error_floor = _contraction(np.asarray(errors), report.stage_one_end)
    logger.info(f"Stage probe ({variant}): stage one ends at t={report.stage_one_end}, "
                f"min growth {report.min_growth:.4f}, contraction {report.contraction_factor}")
    return report


# =============================================================================
# L1 PATH, SATURATION, TRAJECTORIES
# =============================================================================

def l1_path_study(ds: Dataset, truth: Optional[GroundTruth], hp: HyperParams,
                  record: Optional[RecordingPolicy] = None, seed: int = 0) -> pd.DataFrame:
    """
    (t, ||beta_t||_1, ||beta_t - beta*||_2) along one run

    Returns:
        DataFrame with columns t, l1_norm and (when truth is given) est_error
    """
    record = record or RecordingPolicy(mode="log", keep_beta=truth is not None)
    fit = run(ds, hp, record=record, seed=seed, truth=truth)
    frame = pd.DataFrame({
        "t": [sample.t for sample in fit.trajectory],
        "l1_norm": [sample.l1_norm for sample in fit.trajectory],
    })
    if truth is not None:
        frame["est_error"] = [float(np.linalg.norm(sample.beta_snapshot - truth.beta_star))
                              for sample in fit.trajectory]
    return frame


@dataclass
class SaturationResult:
    gd_curve: pd.DataFrame
    lasso_curve: pd.DataFrame

    @property
    def gd_best(self) -> float:
        return float(self.gd_curve["std_est_error"].min())

    @property
    def lasso_best(self) -> float:
        return float(self.lasso_curve["std_est_error"].min())

    def to_dict(self) -> Dict[str, Any]:
        return {"gd_best": self.gd_best, "lasso_best": self.lasso_best}


def saturation_study(setting: SettingSpec, seed: int = 0, grid_size: int = 50) -> SaturationResult:
    """
    Best standardized error along the GD iteration path and along the Lasso path

    Both curves use the training part of replication 0. The GD curve carries
    the l1 norm too, so the error can be read against ||beta_t||_1.
    """
    rep = make_replication(setting, 0, seed)
    beta_star = rep.truth.beta_star
    fit = run(rep.train, setting.hyper_params(), record=RecordingPolicy(mode="log", keep_beta=True),
              seed=derive_seed(seed, 1))
    gd_curve = pd.DataFrame({
        "t": [sample.t for sample in fit.trajectory],
        "l1_norm": [sample.l1_norm for sample in fit.trajectory],
        "std_est_error": [relative_error(sample.beta_snapshot, beta_star) for sample in fit.trajectory],
    })

    path = lasso_path(rep.train, lambda_grid(rep.train, size=grid_size), tol=EXPERIMENT_LASSO_TOL)
    lasso_curve = pd.DataFrame({
        "lambda": path.lambdas,
        "l1_norm": path.l1_norms,
        "std_est_error": [relative_error(beta, beta_star) for beta in path.betas],
    })
    result = SaturationResult(gd_curve=gd_curve, lasso_curve=lasso_curve)
    logger.info(f"Saturation ({setting.name}): GD best {result.gd_best:.3e}, Lasso best {result.lasso_best:.3e}")
    return result


def signal_trajectories(design_kind: str, seed: int = 0, n: int = 200, p: int = 500,
                        t_max: int = 2000, alpha: float = 1e-5) -> pd.DataFrame:
    """
    Per-iterate values of the true-support coefficients on a noiseless problem

    Returns:
        DataFrame with column t and one column beta_j per support index j
    """
    ds, truth = _noiseless_problem(design_kind, n, p, seed)
    hp = HyperParams(alpha=alpha, eta=SWEEP_STEP_SIZES[design_kind], t_max=t_max)
    fit = run(ds, hp, record=RecordingPolicy(mode="every", keep_beta=True), seed=derive_seed(seed, 2))
    frame = pd.DataFrame({"t": [sample.t for sample in fit.trajectory]})
    for j in truth.support:
        frame[f"beta_{j}"] = [float(sample.beta_snapshot[j]) for sample in fit.trajectory]
    return frame


# =============================================================================
# STOPPING RULES AND SELECTION
# =============================================================================

STOPPING_METHODS = ["gd_holdout", "gd_kfold", "gd_sure", "gd_oracle"]


def compare_stopping_rules(settings: Sequence[str] = ("S1", "S2", "S3", "S4"), sigma: float = 0.1,
                           replications: Optional[int] = None, seed: int = 0,
                           workers: int = 1) -> Dict[str, SummaryTable]:
    """Hold-out, k-fold, SURE and oracle stopping side by side at a fixed noise level"""
    tables = {}
    for name in settings:
        overrides = {"sigma": sigma}
        if replications is not None:
            overrides["replications"] = replications
        table, _ = run_setting(get_setting(name, **overrides), STOPPING_METHODS, master_seed=seed, workers=workers)
        tables[name] = table
    return tables


@dataclass
class WeakSignalSummary:
    rows: List[Dict[str, Any]]
    resamples: int = BOOTSTRAP_RESAMPLES

    def medians(self) -> Dict[str, Dict[str, float]]:
        frame = pd.DataFrame(self.rows)
        out = {}
        for method, group in frame.groupby("method", sort=True):
            out[method] = {
                "fp": float(group["fp"].median()),
                "tn": float(group["tn"].median()),
                "se_fp": bootstrap_se(group["fp"].to_numpy(float), self.resamples),
                "se_tn": bootstrap_se(group["tn"].to_numpy(float), self.resamples),
            }
        return out

    def to_dict(self) -> Dict[str, Any]:
        return {"medians": self.medians(), "replications": len(self.rows) // 2}


def weak_signal_study(replications: int = 20, seed: int = 0,
                      setting: Optional[SettingSpec] = None) -> WeakSignalSummary:
    """
    Selection with weak signals present: Lasso CV against GD + hard thresholding

    GD stops by hold-out validation; its estimate is hard-thresholded at the
    lambda chosen by the Lasso's cross-validation.
    """
    setting = setting or get_setting("W", replications=replications)
    rows = []
    for index in range(setting.replications):
        rep = make_replication(setting, index, seed)
        cv = lasso_cv(rep.pooled, k=setting.folds, seed=derive_seed(rep.seed, 0), tol=EXPERIMENT_LASSO_TOL)
        fit, _ = holdout_stop(rep.train, rep.valid, setting.hyper_params(), mode=setting.stop_mode,
                              seed=derive_seed(rep.seed, 1))

        lasso_report = score_selection(np.flatnonzero(cv.beta), rep.truth)
        gd_report = score_selection(select_support(fit.beta_hat, cv.lam), rep.truth, threshold=cv.lam)
        for method, report in (("lasso_cv", lasso_report), ("gd_hard_threshold", gd_report)):
            rows.append({
                "replication": index,
                "method": method,
                "fp": report.false_positives,
                "tn": report.true_negatives_missed,
                "lambda": cv.lam,
            })
        logger.info(f"Weak-signal rep {index}: lasso fp/tn={lasso_report.false_positives}/"
                    f"{lasso_report.true_negatives_missed}, GD fp/tn={gd_report.false_positives}/"
                    f"{gd_report.true_negatives_missed}")
    return WeakSignalSummary(rows=rows)
