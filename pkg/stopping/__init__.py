# Stopping module
from .base_rule import RiskCurve, RiskMonitor
from .rules import (
    StoppingRule,
    SureState,
    HoldoutMonitor,
    SureMonitor,
    OracleMonitor,
    holdout_stop,
    kfold_stop,
    sure_stop,
    oracle_stop,
    estimate_sigma,
    apply_rule,
)

__all__ = [
    "RiskCurve",
    "RiskMonitor",
    "StoppingRule",
    "SureState",
    "HoldoutMonitor",
    "SureMonitor",
    "OracleMonitor",
    "holdout_stop",
    "kfold_stop",
    "sure_stop",
    "oracle_stop",
    "estimate_sigma",
    "apply_rule",
]
