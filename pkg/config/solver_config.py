"""
Configuration for the Hadamard sparse regression toolkit
"""
import os
from dotenv import load_dotenv

# Load environment variables from the repository root
load_dotenv(os.path.join(os.path.dirname(__file__), '..', '.env'))


def _env_float(name: str, default: float) -> float:
    return float(os.getenv(name, default))


def _env_int(name: str, default: int) -> int:
    return int(os.getenv(name, default))


# =============================================================================
# SOLVER DEFAULTS
# =============================================================================
DEFAULT_ALPHA = _env_float("HADAMARD_ALPHA", 1e-5)
DEFAULT_T_MAX = _env_int("HADAMARD_T_MAX", 5000)
DEFAULT_STOP_TOL = _env_float("HADAMARD_STOP_TOL", 0.0)

# Default step size is ETA_SAFETY / lambda_max(X^T X / n)
ETA_SAFETY = 0.5
POWER_ITERATION_STEPS = 30

# A run is aborted once train_rmse exceeds this multiple of its initial value
DIVERGENCE_FACTOR = 1e6

# Log-spaced trajectory recording keeps t = round(ratio ** k)
LOG_GRID_RATIO = 1.2

# =============================================================================
# SIZE GUARDS
# =============================================================================
LANDSCAPE_MAX_P = _env_int("HADAMARD_LANDSCAPE_MAX_P", 2000)
SURE_MAX_N = _env_int("HADAMARD_SURE_MAX_N", 4000)

# =============================================================================
# LASSO BASELINES
# =============================================================================
LASSO_TOL = 1e-8
LASSO_MAX_ITER = _env_int("HADAMARD_LASSO_MAX_ITER", 20000)
LASSO_GRID_SIZE = 50
LASSO_GRID_RATIO = 1e-3
CV_FOLDS = 5

# =============================================================================
# SELECTION
# =============================================================================
THRESHOLD_C_LO = 10.0
THRESHOLD_C_HI = 1.0
ADAPTIVE_FLOOR = 1e-4

# =============================================================================
# EXPERIMENTS
# =============================================================================
DEFAULT_REPLICATIONS = _env_int("HADAMARD_REPLICATIONS", 20)
BOOTSTRAP_RESAMPLES = _env_int("HADAMARD_BOOTSTRAP", 1000)
MAX_FAILURE_FRACTION = 0.10
EXPERIMENT_T_MAX = _env_int("HADAMARD_EXPERIMENT_T_MAX", 3000)
EXPERIMENT_ALPHA = 1e-5
EXPERIMENT_LASSO_TOL = 1e-6
EXPERIMENT_WORKERS = _env_int("HADAMARD_WORKERS", 1)
DEFAULT_METHODS = ["gd_holdout", "gd_kfold", "gd_oracle", "lasso_cv"]

# Noise level of the noisy settings, relative to ||beta*||
RELATIVE_SIGMA = 0.15

# Noiseless studies run to ||X beta - y|| / sqrt(n) <= TOLERANCE_FACTOR * alpha
TOLERANCE_FACTOR = 0.01

# Step sizes of the noiseless initialization study, by design kind
SWEEP_STEP_SIZES = {
    "independent": 0.2,
    "correlated": 0.1,
}

SIGNALS = [-1.0, 2.0, 2.0, 3.0]

# Simulation settings; n is the training size, 3n samples are drawn and split evenly
SETTINGS = {
    "S1": {"n": 200, "p": 500, "covariance": {"kind": "identity"}},
    "S2": {"n": 200, "p": 500, "covariance": {"kind": "toeplitz", "rho": 0.1}},
    "S3": {"n": 200, "p": 500, "covariance": {"kind": "toeplitz", "rho": 0.2}},
    "S4": {"n": 200, "p": 500, "covariance": {"kind": "toeplitz", "rho": 0.5}},
    "S5": {"n": 200, "p": 2000, "covariance": {"kind": "identity"}},
    "S6": {"n": 200, "p": 2000, "covariance": {"kind": "toeplitz", "rho": 0.1}},
    "S7": {"n": 200, "p": 2000, "covariance": {"kind": "toeplitz", "rho": 0.2}},
    "S8": {"n": 200, "p": 2000, "covariance": {"kind": "toeplitz", "rho": 0.5}},
}

# Four weak signals at 0.5 and sixteen strong at 5, in units of sigma * sqrt(log p / n)
WEAK_SIGNAL_SETTING = {
    "n": 200,
    "p": 500,
    "covariance": {"kind": "toeplitz", "rho": 0.2},
    "s_weak": 4,
    "s_strong": 16,
    "weak_level": 0.5,
    "strong_level": 5.0,
    "sigma": 1.0,
}

# =============================================================================
# OUTPUT SETTINGS
# =============================================================================
OUTPUT_DIR = os.getenv(
    "HADAMARD_OUTPUT_DIR",
    os.path.join(os.path.dirname(__file__), '..', 'output'),
)
LOG_LEVEL = os.getenv("HADAMARD_LOG_LEVEL", "INFO")
