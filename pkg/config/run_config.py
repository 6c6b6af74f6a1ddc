"""
Validated flag sets of the command-line subcommands
"""
from typing import List, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, FilePath, field_validator, model_validator

from config.solver_config import (
    CV_FOLDS,
    DEFAULT_ALPHA,
    DEFAULT_METHODS,
    DEFAULT_STOP_TOL,
    DEFAULT_T_MAX,
    EXPERIMENT_WORKERS,
    LASSO_GRID_RATIO,
    LASSO_GRID_SIZE,
    LASSO_MAX_ITER,
    LASSO_TOL,
    SETTINGS,
    THRESHOLD_C_HI,
    THRESHOLD_C_LO,
)

SEED_MAX = 2 ** 64 - 1
STUDIES = ("null-space", "init-sweep", "stages", "l1-path", "weak-signal", "saturation", "stopping", "trajectories")


class CommandConfig(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    output_dir: Optional[str] = None
    seed: int = Field(0, ge=0, le=SEED_MAX)


class FitConfig(CommandConfig):
    x: FilePath
    y: FilePath
    header: bool = False
    alpha: float = Field(DEFAULT_ALPHA, gt=0)
    eta: Optional[float] = Field(None, gt=0)
    t_max: int = Field(DEFAULT_T_MAX, ge=0)
    stop_tol: float = Field(DEFAULT_STOP_TOL, ge=0)
    init_mode: Literal["uniform_pm_alpha", "deterministic_theory"] = "uniform_pm_alpha"
    stop: Literal["none", "holdout", "kfold", "sure"] = "none"
    mode: Optional[Literal["first_rise", "global_min"]] = None
    valid_x: Optional[FilePath] = None
    valid_y: Optional[FilePath] = None
    k: int = Field(CV_FOLDS, ge=2)
    sigma: Optional[float] = Field(None, ge=0)
    weights: Optional[FilePath] = None
    screen: Optional[int] = Field(None, ge=1)
    nonneg: bool = False
    record: Literal["every", "log"] = "log"
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _coherent(self):
        if (self.valid_x is None) != (self.valid_y is None):
            raise ValueError("--valid-x and --valid-y go together")
        if self.stop == "holdout" and self.valid_x is None:
            raise ValueError("--stop holdout requires --valid-x and --valid-y")
        if self.stop == "sure" and self.sigma is not None and self.sigma == 0:
            raise ValueError("--stop sure needs a positive --sigma; leave it unset to estimate it")
        if self.screen is not None and self.stop in ("holdout", "sure"):
            raise ValueError("--screen runs k-fold stopping; use --stop kfold or leave --stop unset")
        if self.nonneg and (self.stop != "none" or self.screen is not None or self.weights is not None):
            raise ValueError("--nonneg supports neither stopping rules, screening nor weights")
        return self

    @property
    def selection_mode(self) -> str:
        if self.mode is not None:
            return self.mode
        return "global_min" if self.stop == "sure" else "first_rise"


class LassoConfig(CommandConfig):
    x: FilePath
    y: FilePath
    header: bool = False
    lam: Optional[float] = Field(None, ge=0)
    path: bool = False
    grid: int = Field(LASSO_GRID_SIZE, ge=2)
    ratio: float = Field(LASSO_GRID_RATIO, gt=0, lt=1)
    cv: Optional[int] = Field(None, ge=2)
    solver: Literal["fista", "ista"] = "fista"
    restart: bool = False
    tol: float = Field(LASSO_TOL, gt=0)
    max_iter: int = Field(LASSO_MAX_ITER, ge=1)
    workers: int = Field(1, ge=1)

    @model_validator(mode="after")
    def _one_mode(self):
        if self.lam is None and not self.path and self.cv is None:
            raise ValueError("give --lambda, --path or --cv")
        if self.lam is not None and (self.path or self.cv is not None):
            raise ValueError("--lambda excludes --path and --cv")
        return self


class SimulateConfig(CommandConfig):
    setting: Optional[str] = None
    config: Optional[FilePath] = None
    reps: Optional[int] = Field(None, ge=1)
    methods: List[str] = Field(default_factory=lambda: list(DEFAULT_METHODS))
    sigma: Optional[float] = Field(None, ge=0)
    workers: int = Field(EXPERIMENT_WORKERS, ge=1)

    @field_validator("setting")
    @classmethod
    def _known_setting(cls, value):
        if value is not None and value not in SETTINGS and value != "W":
            raise ValueError(f"unknown setting {value!r}; expected one of {sorted(SETTINGS) + ['W']}")
        return value

    @model_validator(mode="after")
    def _one_source(self):
        if (self.setting is None) == (self.config is None):
            raise ValueError("give exactly one of --setting and --config")
        if not self.methods:
            raise ValueError("--methods must name at least one method")
        return self


class SelectConfig(CommandConfig):
    result: FilePath
    threshold: Optional[float] = Field(None, ge=0)
    window: bool = False
    sigma: Optional[float] = Field(None, ge=0)
    truth: Optional[FilePath] = None
    header: bool = False
    c_lo: float = Field(THRESHOLD_C_LO, gt=0)
    c_hi: float = Field(THRESHOLD_C_HI, gt=0)

    @model_validator(mode="after")
    def _one_rule(self):
        if (self.threshold is None) == (not self.window):
            raise ValueError("give exactly one of --threshold and --window")
        if self.window and self.sigma is None:
            raise ValueError("--window requires --sigma")
        return self


class StudyConfig(CommandConfig):
    name: Literal[STUDIES]
    design: Literal["independent", "correlated"] = "independent"
    alphas: Optional[List[float]] = None
    setting: str = "S1"
    reps: Optional[int] = Field(None, ge=1)
    sigma: float = Field(0.1, ge=0)
    variant: Literal["general", "nonneg"] = "general"
    t_max: Optional[int] = Field(None, ge=0)
    workers: int = Field(EXPERIMENT_WORKERS, ge=1)

    @field_validator("alphas")
    @classmethod
    def _positive_alphas(cls, value):
        if value is not None and (not value or any(a <= 0 for a in value)):
            raise ValueError("alphas must be a non-empty list of positive values")
        return value

    @field_validator("setting")
    @classmethod
    def _known_setting(cls, value):
        if value not in SETTINGS and value != "W":
            raise ValueError(f"unknown setting {value!r}")
        return value
