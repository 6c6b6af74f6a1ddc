# Selection module
from .selection import (
    hard_threshold,
    select_support,
    ThresholdWindow,
    threshold_window,
    window_bounds,
    selection_stability,
    adaptive_weights,
    pilot_estimate,
    SelectionReport,
    score_selection,
)

__all__ = [
    "hard_threshold",
    "select_support",
    "ThresholdWindow",
    "threshold_window",
    "window_bounds",
    "selection_stability",
    "adaptive_weights",
    "pilot_estimate",
    "SelectionReport",
    "score_selection",
]
