"""
Simulation settings and their JSON configuration schema
"""
from typing import Any, Dict, List, Literal, Optional, Tuple, Union
import logging

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config.solver_config import (
    CV_FOLDS,
    DEFAULT_REPLICATIONS,
    EXPERIMENT_ALPHA,
    EXPERIMENT_T_MAX,
    RELATIVE_SIGMA,
    SETTINGS,
    SIGNALS,
    WEAK_SIGNAL_SETTING,
)
from design.dataset import CovarianceSpec, GroundTruth, fixed_signal
from solver.hadamard_gd import INIT_MODES, HyperParams
from utils.errors import ConfigurationError

logger = logging.getLogger(__name__)


class CovarianceModel(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["identity", "equicorrelated", "toeplitz"] = "identity"
    rho: float = Field(0.0, ge=0.0, lt=1.0)

    def build(self, p: int) -> CovarianceSpec:
        return CovarianceSpec(kind=self.kind, p=p, rho=self.rho)


class FixedValues(BaseModel):
    """Given values at given positions (default: the first indices)"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["fixed_values"] = "fixed_values"
    values: List[float]
    positions: Optional[List[int]] = None

    @model_validator(mode="after")
    def _lengths(self):
        if self.positions is not None and len(self.positions) != len(self.values):
            raise ValueError("values and positions must have the same length")
        return self


class StrongWeak(BaseModel):
    """s2 weak then s1 strong signals; levels are multiples of sigma sqrt(log p / n)"""
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["strong_weak"] = "strong_weak"
    s1: int = Field(ge=0)
    s2: int = Field(ge=0)
    strong_level: float = Field(gt=0)
    weak_level: float = Field(gt=0)


class SigmaRule(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["absolute", "relative"] = "relative"
    value: float = Field(RELATIVE_SIGMA, ge=0.0)

    def resolve(self, beta_star: np.ndarray) -> float:
        if self.kind == "absolute":
            return self.value
        return self.value * float(np.linalg.norm(beta_star))


class SettingSpec(BaseModel):
    """
    One simulation setting

    n is the training size; n / split[0] samples are drawn and split into
    train, validation and test parts in order.
    """
    model_config = ConfigDict(frozen=True, extra="forbid")

    name: str
    n: int = Field(gt=0)
    p: int = Field(gt=0)
    covariance: CovarianceModel = CovarianceModel()
    beta_star_spec: Union[FixedValues, StrongWeak] = Field(
        default_factory=lambda: FixedValues(values=SIGNALS), discriminator="kind")
    sigma_rule: SigmaRule = SigmaRule()
    replications: int = Field(DEFAULT_REPLICATIONS, ge=1)
    split: Tuple[float, float, float] = (1 / 3, 1 / 3, 1 / 3)
    alpha: float = Field(EXPERIMENT_ALPHA, gt=0)
    eta: Optional[float] = Field(None, gt=0)
    t_max: int = Field(EXPERIMENT_T_MAX, ge=0)
    init_mode: str = "deterministic_theory"
    stop_mode: Literal["first_rise", "global_min"] = "first_rise"
    folds: int = Field(CV_FOLDS, ge=2)
    normalize: bool = False

    @field_validator("split")
    @classmethod
    def _split_fractions(cls, value):
        if any(part <= 0 for part in value) or not np.isclose(sum(value), 1.0):
            raise ValueError("split fractions must be positive and sum to 1")
        return value

    @field_validator("init_mode")
    @classmethod
    def _init_mode(cls, value):
        if value not in INIT_MODES:
            raise ValueError(f"init_mode must be one of {INIT_MODES}")
        return value

    @model_validator(mode="after")
    def _signal_fits(self):
        spec = self.beta_star_spec
        if isinstance(spec, FixedValues):
            positions = spec.positions or list(range(len(spec.values)))
            if positions and max(positions) >= self.p:
                raise ValueError("signal positions exceed p")
        else:
            if spec.s1 + spec.s2 > self.p:
                raise ValueError("s1 + s2 exceeds p")
            if self.sigma_rule.kind != "absolute":
                raise ValueError("strong_weak signals need an absolute sigma rule")
        return self

    @property
    def total_samples(self) -> int:
        return int(round(self.n / self.split[0]))

    def covariance_spec(self) -> CovarianceSpec:
        return self.covariance.build(self.p)

    def build_truth(self) -> GroundTruth:
        """beta*, sigma and the strong / weak partition"""
        spec = self.beta_star_spec
        if isinstance(spec, FixedValues):
            beta = fixed_signal(self.p, spec.values, spec.positions)
            sigma = self.sigma_rule.resolve(beta)
            return GroundTruth.from_beta(beta, sigma, self.n)

        sigma = self.sigma_rule.value
        unit = sigma * np.sqrt(np.log(self.p) / self.n)
        beta = np.zeros(self.p)
        beta[:spec.s2] = spec.weak_level * unit
        beta[spec.s2:spec.s2 + spec.s1] = spec.strong_level * unit
        return GroundTruth(
            beta_star=beta,
            sigma=sigma,
            strong_support=tuple(range(spec.s2, spec.s2 + spec.s1)),
            weak_support=tuple(range(spec.s2)),
        )

    def hyper_params(self) -> HyperParams:
        return HyperParams(alpha=self.alpha, eta=self.eta, t_max=self.t_max, init_mode=self.init_mode)

    def to_config(self) -> Dict[str, Any]:
        return self.model_dump(mode="json")


def get_setting(name: str, **overrides: Any) -> SettingSpec:
    """
    Named setting S1..S8 (or W for the weak-signal study) with field overrides

    `sigma=<value>` is shorthand for an absolute sigma rule.

    Raises:
        ConfigurationError: unknown name or invalid override
    """
    sigma = overrides.pop("sigma", None)
    if name == "W":
        base = dict(WEAK_SIGNAL_SETTING)
        fields = {
            "name": "W",
            "n": base["n"],
            "p": base["p"],
            "covariance": base["covariance"],
            "beta_star_spec": {
                "kind": "strong_weak",
                "s1": base["s_strong"],
                "s2": base["s_weak"],
                "strong_level": base["strong_level"],
                "weak_level": base["weak_level"],
            },
            "sigma_rule": {"kind": "absolute", "value": base["sigma"]},
        }
    elif name in SETTINGS:
        fields = {"name": name, **SETTINGS[name]}
    else:
        raise ConfigurationError(f"unknown setting {name!r}; expected one of {sorted(SETTINGS) + ['W']}")

    if sigma is not None:
        fields["sigma_rule"] = {"kind": "absolute", "value": float(sigma)}
    fields.update(overrides)
    return parse_setting(fields)


def parse_setting(payload: Union[Dict[str, Any], str]) -> SettingSpec:
    """Validate a dict or a JSON document into a SettingSpec"""
    try:
        if isinstance(payload, str):
            return SettingSpec.model_validate_json(payload)
        return SettingSpec.model_validate(payload)
    except ValidationError as e:
        raise ConfigurationError(f"invalid setting: {e}") from None


def load_setting(path: str) -> SettingSpec:
    with open(path, encoding='utf-8') as f:
        return parse_setting(f.read())
