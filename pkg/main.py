"""
Hadamard Sparse Regression Toolkit - CLI Entry Point
"""
import argparse
import json
import logging
import os
import sys
from typing import Any, Dict, List, Optional

# Add current directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.abspath(__file__)))

import numpy as np
from pydantic import BaseModel, ValidationError

from config.run_config import STUDIES, FitConfig, LassoConfig, SelectConfig, SimulateConfig, StudyConfig
from config.solver_config import LOG_LEVEL
from utils.errors import ConfigurationError, HadamardError

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_USAGE = 2


class UsageError(Exception):
    """Bad flags or flag combinations; exits with code 2"""


class JsonArgumentParser(argparse.ArgumentParser):
    """ArgumentParser whose errors are JSON objects on stderr"""

    def error(self, message):
        _emit_error({"error": "UsageError", "message": message})
        sys.exit(EXIT_USAGE)


def _emit_error(payload: Dict[str, Any]) -> None:
    print(json.dumps(payload, sort_keys=True), file=sys.stderr)


def setup_logging(verbose: bool = False) -> None:
    """Logs go to stderr; stdout stays free for results"""
    logging.basicConfig(
        level=logging.DEBUG if verbose else getattr(logging, LOG_LEVEL.upper(), logging.INFO),
        format='%(asctime)s - %(name)s - %(levelname)s - %(message)s',
        handlers=[
            logging.StreamHandler(sys.stderr),
        ],
        force=True,
    )


def _validate(model: type, args: argparse.Namespace, fields: List[str]) -> BaseModel:
    """Build a flag model from the parsed arguments; unset flags keep the model default"""
    values = {name: getattr(args, name) for name in fields if getattr(args, name, None) is not None}
    try:
        return model(**values)
    except ValidationError as e:
        problems = "; ".join(f"{'.'.join(str(p) for p in err['loc']) or 'flags'}: {err['msg']}" for err in e.errors())
        raise UsageError(problems) from None


def _store(cfg):
    from storage.artifacts import ArtifactStore

    return ArtifactStore(cfg.output_dir)


# =============================================================================
# FIT
# =============================================================================

def cmd_fit(cfg: FitConfig) -> Dict[str, Any]:
    """Gradient descent on one dataset, optionally screened and early-stopped"""
    from design.csv_io import load_csv, load_vector
    from experiments.pipeline import screened_pipeline
    from solver.hadamard_gd import HyperParams, RecordingPolicy, run_nonneg
    from stopping.rules import StoppingRule, apply_rule

    ds = load_csv(str(cfg.x), str(cfg.y), header=cfg.header)
    valid = load_csv(str(cfg.valid_x), str(cfg.valid_y), header=cfg.header) if cfg.valid_x is not None else None
    weights = load_vector(str(cfg.weights), header=cfg.header) if cfg.weights is not None else None
    hp = HyperParams(alpha=cfg.alpha, eta=cfg.eta, stop_tol=cfg.stop_tol, t_max=cfg.t_max,
                     init_mode=cfg.init_mode, weights=weights)
    record = RecordingPolicy(mode=cfg.record)
    store = _store(cfg)

    payload: Dict[str, Any] = {"command": "fit", "hyper_params": hp.to_dict(), "seed": cfg.seed}
    if cfg.screen is not None:
        outcome = screened_pipeline(ds, cfg.screen, hp, k=cfg.k, seed=cfg.seed, workers=cfg.workers)
        fit, curve = outcome.fit, outcome.curve
        payload.update(fit.to_dict())
        payload["beta_hat"] = outcome.beta
        payload["diagnostics"]["n"] = ds.n
        payload["diagnostics"]["p"] = ds.p
        payload["screening"] = outcome.to_dict()
    elif cfg.nonneg:
        fit, curve = run_nonneg(ds, hp, record=record), None
        payload.update(fit.to_dict())
    else:
        rule = StoppingRule(kind=cfg.stop, mode=cfg.selection_mode, k=cfg.k, sigma=cfg.sigma)
        fit, curve = apply_rule(rule, ds, hp, valid=valid, record=record, seed=cfg.seed, workers=cfg.workers)
        payload.update(fit.to_dict())
        payload["rule"] = rule.to_dict()

    store.write_json("result.json", payload)
    store.export_to_csv("trajectory.csv", [sample.to_row() for sample in fit.trajectory])
    if curve is not None:
        curve.export_to_csv(store.path("risk.csv"))
    store.write_metadata("fit")
    return {"stopped_at": fit.stopped_at, "stop_reason": fit.stop_reason, "output_dir": store.output_dir}


# =============================================================================
# LASSO
# =============================================================================

def cmd_lasso(cfg: LassoConfig) -> Dict[str, Any]:
    """Lasso at one lambda, along a path, or tuned by cross-validation"""
    from baselines.lasso import LassoProblem, fista, ista, lambda_grid, lasso_cv, lasso_path
    from design.csv_io import load_csv

    ds = load_csv(str(cfg.x), str(cfg.y), header=cfg.header)
    store = _store(cfg)
    payload: Dict[str, Any] = {"command": "lasso", "solver": cfg.solver, "tol": cfg.tol}

    if cfg.lam is not None:
        prob = LassoProblem(ds, cfg.lam)
        if cfg.solver == "fista":
            solution = fista(prob, tol=cfg.tol, max_iter=cfg.max_iter, restart=cfg.restart)
        else:
            solution = ista(prob, tol=cfg.tol, max_iter=cfg.max_iter)
        payload.update({
            "lambda": cfg.lam,
            "beta": solution.beta,
            "iters": solution.iters,
            "converged": solution.converged,
            "kkt_violation": solution.kkt_violation,
            "objective": solution.objective,
        })
    else:
        lambdas = lambda_grid(ds, size=cfg.grid, ratio=cfg.ratio)
        if cfg.path:
            path = lasso_path(ds, lambdas, tol=cfg.tol, max_iter=cfg.max_iter)
            store.export_to_csv("path.csv", path.to_frame())
            payload["path"] = {"lambdas": path.lambdas, "converged": list(path.converged),
                               "kkt_residuals": list(path.kkt_residuals)}
        if cfg.cv is not None:
            result = lasso_cv(ds, k=cfg.cv, lambdas=lambdas, seed=cfg.seed, tol=cfg.tol,
                              max_iter=cfg.max_iter, workers=cfg.workers)
            store.export_to_csv("cv.csv", ({"lambda": lam, "cv_error": err}
                                 for lam, err in zip(result.lambdas, result.cv_error)))
            payload.update({"lambda": result.lam, "beta": result.beta, "converged": result.converged,
                            "cv": {"k": cfg.cv, "best_index": result.best_index, "seed": cfg.seed}})

    store.write_json("result.json", payload)
    store.write_metadata("lasso")
    return {"lambda": payload.get("lambda"), "output_dir": store.output_dir}


# =============================================================================
# SIMULATE
# =============================================================================

def cmd_simulate(cfg: SimulateConfig) -> Dict[str, Any]:
    """All replications of one setting"""
    from experiments.harness import run_setting
    from experiments.settings import get_setting, load_setting, parse_setting

    overrides: Dict[str, Any] = {}
    if cfg.reps is not None:
        overrides["replications"] = cfg.reps
    if cfg.setting is not None:
        if cfg.sigma is not None:
            overrides["sigma"] = cfg.sigma
        spec = get_setting(cfg.setting, **overrides)
    else:
        spec = load_setting(str(cfg.config))
        if cfg.sigma is not None:
            overrides["sigma_rule"] = {"kind": "absolute", "value": cfg.sigma}
        if overrides:
            spec = parse_setting({**spec.to_config(), **overrides})

    table, rows = run_setting(spec, cfg.methods, master_seed=cfg.seed, workers=cfg.workers)
    store = _store(cfg)
    store.write_json("summary.json", table.to_dict())
    store.export_to_csv("rows.csv", [row.to_dict() for row in rows])
    store.write_metadata("simulate", {"workers": cfg.workers})
    return {"setting": spec.name, "config_hash": table.config_hash, "output_dir": store.output_dir}


# =============================================================================
# SELECT
# =============================================================================

def _load_result(path: str) -> Dict[str, Any]:
    with open(path, encoding='utf-8') as f:
        result = json.load(f)
    if "beta_hat" not in result and "beta" not in result:
        raise ConfigurationError(f"{path} holds neither beta_hat nor beta")
    return result


def cmd_select(cfg: SelectConfig) -> Dict[str, Any]:
    """Hard-threshold selection on a saved fit"""
    from design.csv_io import load_vector
    from design.dataset import GroundTruth
    from selection.selection import score_selection, select_support, selection_stability, window_bounds

    result = _load_result(str(cfg.result))
    beta = np.asarray(result.get("beta_hat", result.get("beta")), dtype=float)
    n = result.get("diagnostics", {}).get("n")

    truth = None
    if cfg.truth is not None:
        beta_star = load_vector(str(cfg.truth), header=cfg.header)
        if beta_star.shape != beta.shape:
            raise ConfigurationError(f"truth has length {beta_star.shape[0]}, the fit has {beta.shape[0]}")
        truth = GroundTruth.from_beta(beta_star, 0.0, n or 1)

    details: Dict[str, Any] = {}
    if cfg.window:
        if n is None:
            raise ConfigurationError("the result file carries no sample size (diagnostics.n) for the window")
        window = window_bounds(int(n), beta.shape[0], cfg.sigma, cfg.c_lo, cfg.c_hi)
        details["window"] = window.to_dict()
        details["window"]["stability"] = selection_stability(beta, window)
        threshold = window.mid
    else:
        threshold = cfg.threshold

    report = score_selection(select_support(beta, threshold), truth, threshold=threshold)
    store = _store(cfg)
    store.write_json("selection.json", {**report.to_dict(), **details})
    store.write_metadata("select")
    return {"selected": len(report.selected), "output_dir": store.output_dir}


# =============================================================================
# STUDY
# =============================================================================

DEFAULT_NULL_SPACE_ALPHAS = [1e-3, 1e-5, 1e-10]
DEFAULT_SWEEP_ALPHAS = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7, 1e-8]


def cmd_study(cfg: StudyConfig) -> Dict[str, Any]:
    """Noiseless and dynamics studies; each writes study.json plus its curves"""
    from experiments import studies
    from experiments.harness import make_replication
    from experiments.settings import get_setting
    from solver.hadamard_gd import HyperParams

    store = _store(cfg)
    t_max = {"t_max": cfg.t_max} if cfg.t_max is not None else {}
    summary: Dict[str, Any] = {"study": cfg.name, "seed": cfg.seed}

    if cfg.name == "null-space":
        rows = [row.to_dict() for row in studies.null_space_example(cfg.alphas or DEFAULT_NULL_SPACE_ALPHAS, **t_max)]
        store.export_to_csv("null_space.csv", rows)
        summary["rows"] = rows
    elif cfg.name == "init-sweep":
        curve = studies.init_sweep(cfg.design, cfg.alphas or DEFAULT_SWEEP_ALPHAS, seed=cfg.seed, **t_max)
        store.export_to_csv("init_sweep.csv", curve.to_frame())
        summary.update(curve.to_dict())
    elif cfg.name == "stages":
        truth, ds = studies.stage_problem(cfg.variant, cfg.seed)
        hp = HyperParams(init_mode="deterministic_theory", t_max=cfg.t_max if cfg.t_max is not None else 2000)
        report = studies.stage_dynamics_probe(truth, ds, hp, variant=cfg.variant, seed=cfg.seed)
        store.export_to_csv("stage_errors.csv", ({"t": t, "sq_error": e} for t, e in enumerate(report.errors)))
        summary.update(report.to_dict())
    elif cfg.name == "l1-path":
        spec = get_setting(cfg.setting)
        rep = make_replication(spec, 0, cfg.seed)
        frame = studies.l1_path_study(rep.train, rep.truth, spec.hyper_params().evolve(**t_max), seed=cfg.seed)
        store.export_to_csv("l1_path.csv", frame)
        summary["points"] = len(frame)
    elif cfg.name == "weak-signal":
        result = studies.weak_signal_study(replications=cfg.reps or 20, seed=cfg.seed)
        store.export_to_csv("rows.csv", result.rows)
        summary.update(result.to_dict())
    elif cfg.name == "saturation":
        result = studies.saturation_study(get_setting(cfg.setting), seed=cfg.seed)
        store.export_to_csv("gd_curve.csv", result.gd_curve)
        store.export_to_csv("lasso_curve.csv", result.lasso_curve)
        summary.update(result.to_dict())
    elif cfg.name == "stopping":
        tables = studies.compare_stopping_rules([cfg.setting], sigma=cfg.sigma, replications=cfg.reps,
                                                seed=cfg.seed, workers=cfg.workers)
        summary["tables"] = {name: table.to_dict() for name, table in tables.items()}
    else:
        frame = studies.signal_trajectories(cfg.design, seed=cfg.seed, **t_max)
        store.export_to_csv("trajectories.csv", frame)
        summary["points"] = len(frame)

    store.write_json("study.json", summary)
    store.write_metadata("study")
    return {"study": cfg.name, "output_dir": store.output_dir}


# =============================================================================
# ARGUMENTS
# =============================================================================

def _add_common(sub: argparse.ArgumentParser, seed_required: bool = False) -> None:
    sub.add_argument('--seed', type=int, required=seed_required, help='Master seed (unsigned 64-bit)')
    sub.add_argument('--output-dir', '-o', dest='output_dir', help='Output directory (default: HADAMARD_OUTPUT_DIR)')
    sub.add_argument('--verbose', '-v', action='store_true', help='Enable verbose logging')


def _float_list(text: str) -> List[float]:
    try:
        return [float(part) for part in text.split(',') if part.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _name_list(text: str) -> List[str]:
    return [part.strip() for part in text.split(',') if part.strip()]


def build_parser() -> JsonArgumentParser:
    parser = JsonArgumentParser(
        description="Hadamard Sparse Regression Toolkit",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  python main.py fit X.csv y.csv --stop none                 Plain gradient descent
  python main.py fit X.csv y.csv --stop holdout --valid-x Xv.csv --valid-y yv.csv
  python main.py fit X.csv y.csv --screen 100 --k 5          Screen, k-fold GD, threshold
  python main.py lasso X.csv y.csv --path --grid 50          Lasso regularization path
  python main.py simulate --setting S1 --reps 20 --seed 7    Replicated simulation
  python main.py select output/result.json --threshold 0.1   Hard-threshold selection
  python main.py study null-space                            Minimal-l1 vs sparsest example
        """
    )
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True

    fit = commands.add_parser('fit', help='Gradient descent on the Hadamard parametrization')
    fit.add_argument('x', help='Design matrix CSV')
    fit.add_argument('y', help='Response CSV')
    fit.add_argument('--header', action='store_true', default=None, help='CSV files start with a header row')
    fit.add_argument('--alpha', type=float, help='Initialization scale')
    fit.add_argument('--eta', type=float, help='Step size (default 0.5 / lambda_max)')
    fit.add_argument('--tmax', dest='t_max', type=int, help='Iteration cap')
    fit.add_argument('--stop-tol', dest='stop_tol', type=float, help='Stop once the train rmse is below this')
    fit.add_argument('--init', dest='init_mode', choices=['uniform_pm_alpha', 'deterministic_theory'])
    fit.add_argument('--stop', choices=['none', 'holdout', 'kfold', 'sure'], help='Early-stopping rule')
    fit.add_argument('--mode', choices=['first_rise', 'global_min'], help='Stopping-time selection on the risk curve')
    fit.add_argument('--valid-x', dest='valid_x', help='Validation design CSV')
    fit.add_argument('--valid-y', dest='valid_y', help='Validation response CSV')
    fit.add_argument('--k', type=int, help='Folds of k-fold stopping')
    fit.add_argument('--sigma', type=float, help='Noise level for SURE (estimated when absent)')
    fit.add_argument('--weights', help='Per-coordinate step-size weights CSV')
    fit.add_argument('--screen', type=int, metavar='K', help='Keep the K columns most correlated with y first')
    fit.add_argument('--nonneg', action='store_true', default=None, help='Non-negative u * u parametrization')
    fit.add_argument('--record', choices=['every', 'log'], help='Trajectory recording grid')
    fit.add_argument('--workers', type=int, help='Fold worker threads')
    _add_common(fit)

    lasso = commands.add_parser('lasso', help='Lasso baseline (ISTA / FISTA)')
    lasso.add_argument('x', help='Design matrix CSV')
    lasso.add_argument('y', help='Response CSV')
    lasso.add_argument('--header', action='store_true', default=None, help='CSV files start with a header row')
    lasso.add_argument('--lambda', dest='lam', type=float, help='Single penalty level')
    lasso.add_argument('--path', action='store_true', default=None, help='Solve along a log-spaced grid')
    lasso.add_argument('--grid', type=int, help='Grid size')
    lasso.add_argument('--ratio', type=float, help='Smallest lambda as a fraction of lambda_max')
    lasso.add_argument('--cv', type=int, metavar='K', help='Pick lambda by K-fold cross-validation')
    lasso.add_argument('--solver', choices=['fista', 'ista'])
    lasso.add_argument('--restart', action='store_true', default=None, help='FISTA function-value restart')
    lasso.add_argument('--tol', type=float)
    lasso.add_argument('--max-iter', dest='max_iter', type=int)
    lasso.add_argument('--workers', type=int, help='Fold worker threads')
    _add_common(lasso)

    simulate = commands.add_parser('simulate', help='Replicated simulation of a setting')
    simulate.add_argument('--setting', help='Named setting S1..S8 or W')
    simulate.add_argument('--config', help='Setting JSON file')
    simulate.add_argument('--reps', type=int, help='Replications')
    simulate.add_argument('--methods', type=_name_list, help='Comma-separated methods')
    simulate.add_argument('--sigma', type=float, help='Absolute noise level override')
    simulate.add_argument('--workers', type=int, help='Replication worker threads')
    _add_common(simulate, seed_required=True)

    select = commands.add_parser('select', help='Hard-threshold selection on a saved fit')
    select.add_argument('result', help='result.json of fit or lasso')
    select.add_argument('--threshold', type=float, help='Threshold lambda')
    select.add_argument('--window', action='store_true', default=None, help='Use the data-driven threshold window')
    select.add_argument('--sigma', type=float, help='Noise level estimate for the window')
    select.add_argument('--truth', help='True coefficients CSV for fp / tn counts')
    select.add_argument('--header', action='store_true', default=None, help='The truth CSV starts with a header row')
    select.add_argument('--c-lo', dest='c_lo', type=float)
    select.add_argument('--c-hi', dest='c_hi', type=float)
    _add_common(select)

    study = commands.add_parser('study', help='Noiseless and dynamics studies')
    study.add_argument('name', choices=list(STUDIES))
    study.add_argument('--design', choices=['independent', 'correlated'])
    study.add_argument('--alphas', type=_float_list, help='Comma-separated initialization scales')
    study.add_argument('--setting', help='Setting for l1-path, saturation and stopping')
    study.add_argument('--reps', type=int)
    study.add_argument('--sigma', type=float, help='Noise level of the stopping comparison')
    study.add_argument('--variant', choices=['general', 'nonneg'])
    study.add_argument('--tmax', dest='t_max', type=int)
    study.add_argument('--workers', type=int)
    _add_common(study)
    return parser


COMMANDS = {
    'fit': (cmd_fit, FitConfig),
    'lasso': (cmd_lasso, LassoConfig),
    'simulate': (cmd_simulate, SimulateConfig),
    'select': (cmd_select, SelectConfig),
    'study': (cmd_study, StudyConfig),
}


def main(argv: Optional[List[str]] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    setup_logging(args.verbose)

    handler, model = COMMANDS[args.command]
    try:
        cfg = _validate(model, args, list(model.model_fields))
        summary = handler(cfg)
    except UsageError as e:
        _emit_error({"error": "UsageError", "message": str(e)})
        return EXIT_USAGE
    except HadamardError as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        _emit_error(e.to_dict())
        return EXIT_FAILURE
    except Exception as e:
        logger.error(f"{args.command} failed: {e}", exc_info=True)
        _emit_error({"error": type(e).__name__, "message": str(e)})
        return EXIT_FAILURE

    print(json.dumps(summary, sort_keys=True, default=str))
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
