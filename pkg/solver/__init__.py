# Solver module
from .hadamard_gd import (
    HyperParams,
    IterateState,
    NonnegState,
    RecordingPolicy,
    TrajectorySample,
    FitResult,
    init_iterate,
    init_nonneg,
    gradient_step,
    gradient_step_nonneg,
    resolve_step_size,
    run,
    run_nonneg,
    min_l2_solution,
)
from .landscape import LandscapeReport, landscape_probe
from .assumptions import AssumptionReport, check_assumptions

__all__ = [
    "HyperParams",
    "IterateState",
    "NonnegState",
    "RecordingPolicy",
    "TrajectorySample",
    "FitResult",
    "init_iterate",
    "init_nonneg",
    "gradient_step",
    "gradient_step_nonneg",
    "resolve_step_size",
    "run",
    "run_nonneg",
    "min_l2_solution",
    "LandscapeReport",
    "landscape_probe",
    "AssumptionReport",
    "check_assumptions",
]
