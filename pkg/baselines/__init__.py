# Baselines module
from .lasso import (
    soft_threshold,
    lipschitz_constant,
    lambda_max,
    lambda_grid,
    LassoProblem,
    LassoSolution,
    KKTReport,
    PathResult,
    LassoCVResult,
    ista,
    fista,
    check_kkt,
    lasso_path,
    lasso_cv,
)

__all__ = [
    "soft_threshold",
    "lipschitz_constant",
    "lambda_max",
    "lambda_grid",
    "LassoProblem",
    "LassoSolution",
    "KKTReport",
    "PathResult",
    "LassoCVResult",
    "ista",
    "fista",
    "check_kkt",
    "lasso_path",
    "lasso_cv",
]
