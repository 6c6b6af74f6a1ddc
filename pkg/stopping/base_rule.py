"""
Base class for risk monitors that score a GD trajectory while it runs
"""
from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Any, Dict, List, Optional
import logging

import numpy as np
import pandas as pd

from design.dataset import Dataset
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)

SELECTION_MODES = ("first_rise", "global_min")


def first_rise_index(risk: np.ndarray) -> Optional[int]:
    """Index k of the first strict rise risk[k + 1] > risk[k], or None"""
    rises = np.flatnonzero(np.diff(risk) > 0)
    return int(rises[0]) if rises.size else None


@dataclass(frozen=True, eq=False)
class RiskCurve:
    """Risk R(t) on the recorded grid"""
    t_grid: np.ndarray
    risk: np.ndarray
    argmin_t: int
    first_rise_t: Optional[int]

    @classmethod
    def from_values(cls, t_grid, risk) -> "RiskCurve":
        t_grid = np.asarray(t_grid, dtype=int)
        risk = np.asarray(risk, dtype=float)
        if t_grid.shape != risk.shape or t_grid.size == 0:
            raise ConfigurationError("t_grid and risk must be non-empty and of equal length")
        if np.any(np.diff(t_grid) <= 0):
            raise ConfigurationError("t_grid must be strictly increasing")
        rise = first_rise_index(risk)
        return cls(
            t_grid=t_grid,
            risk=risk,
            # argmin returns the earliest minimizer
            argmin_t=int(t_grid[int(np.argmin(risk))]),
            first_rise_t=None if rise is None else int(t_grid[rise]),
        )

    def selected(self, mode: str) -> int:
        """T~ under the given mode; without any rise first_rise runs to the last grid point"""
        if mode not in SELECTION_MODES:
            raise ConfigurationError(f"unknown selection mode {mode!r}; expected one of {SELECTION_MODES}")
        if mode == "global_min":
            return self.argmin_t
        return self.first_rise_t if self.first_rise_t is not None else int(self.t_grid[-1])

    def risk_at(self, t: int) -> float:
        index = np.flatnonzero(self.t_grid == t)
        if not index.size:
            raise KeyError(f"t={t} is not on the risk grid")
        return float(self.risk[index[0]])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame({"t": self.t_grid, "risk": self.risk})

    def export_to_csv(self, filepath: str) -> int:
        """Write (t, risk) rows; returns the row count"""
        self.to_frame().to_csv(filepath, index=False)
        return len(self.t_grid)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "argmin_t": self.argmin_t,
            "first_rise_t": self.first_rise_t,
            "grid_points": int(self.t_grid.size),
        }


class RiskMonitor(ABC):
    """
    Abstract base class for trajectory risk monitors

    Subclasses implement:
    - score(): Risk of the iterate at a recorded time
    - update(): Optional per-iteration bookkeeping (default: nothing)

    observe() is the template the solver calls at every recorded time: it
    scores the iterate, keeps the candidate betas, and tells the solver whether
    to halt (only in first_rise mode with halt_on_rise set).
    """

    def __init__(self, name: str, mode: str = "global_min", halt_on_rise: bool = False):
        """
        Initialize monitor

        Args:
            name: Monitor name for logging
            mode: Selection mode (first_rise or global_min)
            halt_on_rise: Stop the run at the first strict rise
        """
        if mode not in SELECTION_MODES:
            raise ConfigurationError(f"unknown selection mode {mode!r}; expected one of {SELECTION_MODES}")
        self.name = name
        self.mode = mode
        self.halt_on_rise = halt_on_rise and mode == "first_rise"
        self.logger = logging.getLogger(f"{__name__}.{name}")
        self.times: List[int] = []
        self.values: List[float] = []
        self._kept: Dict[int, np.ndarray] = {}
        self._best_t: Optional[int] = None
        self._rise_t: Optional[int] = None
        self.halted_at: Optional[int] = None

    def update(self, t: int, beta: np.ndarray, ds: Dataset, eta: float) -> None:
        """Per-iteration hook, called before observe at every t"""

    @abstractmethod
    def score(self, t: int, beta: np.ndarray) -> float:
        """
        Risk of beta_t

        Args:
            t: Iteration
            beta: Iterate

        Returns:
            Risk value
        """
        pass

    def observe(self, t: int, beta: np.ndarray) -> bool:
        """
        Score a recorded iterate

        Returns:
            True when the run should halt
        """
        value = float(self.score(t, beta))
        rising = bool(self.values) and value > self.values[-1]
        previous_t = self.times[-1] if self.times else None

        self.times.append(t)
        self.values.append(value)
        self.logger.debug(f"{self.name}: R({t}) = {value:.6g}")

        if self._best_t is None or value < self.values[self.times.index(self._best_t)]:
            self._best_t = t

        if rising and self._rise_t is None:
            self._rise_t = previous_t

        # Keep only the iterates a selection can still return
        keep = {t, self._best_t, self._rise_t, previous_t}
        self._kept = {k: v for k, v in self._kept.items() if k in keep}
        self._kept[t] = beta.copy()

        if rising and self.halt_on_rise:
            self.halted_at = t
            self.logger.info(f"{self.name}: risk rose at t={t}, halting")
            return True
        return False

    def curve(self) -> RiskCurve:
        return RiskCurve.from_values(self.times, self.values)

    def beta_at(self, t: int) -> np.ndarray:
        if t not in self._kept:
            raise KeyError(f"iterate at t={t} was not retained")
        return self._kept[t]

    def selected(self) -> int:
        """T~ for this monitor's mode, from the grid observed so far"""
        return self.curve().selected(self.mode)

    def get_stats(self) -> Dict[str, Any]:
        """Get monitor statistics"""
        return {
            "name": self.name,
            "mode": self.mode,
            "grid_points": len(self.times),
            "halted_at": self.halted_at,
        }
