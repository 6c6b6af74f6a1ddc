# Utils module
from .errors import (
    HadamardError,
    ConfigurationError,
    DegenerateInputError,
    DimensionMismatchError,
    DivergenceError,
    SizeGuardError,
)
from .helpers import (
    derive_seed,
    gram_lambda_max,
    hash_config,
    log_spaced_times,
    make_folds,
    theta_k,
)
from .workers import JobPool

__all__ = [
    "HadamardError",
    "ConfigurationError",
    "DegenerateInputError",
    "DimensionMismatchError",
    "DivergenceError",
    "SizeGuardError",
    "derive_seed",
    "gram_lambda_max",
    "hash_config",
    "log_spaced_times",
    "make_folds",
    "theta_k",
    "JobPool",
]
