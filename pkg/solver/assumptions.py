"""
Checks of the sufficient conditions behind the recovery guarantees

Each condition is an order-of-magnitude bound; `constant` stands in for the
hidden constant of "<~". Failing checks are logged, never raised.
"""
from dataclasses import dataclass, field
from typing import Any, Dict, List
import logging

import numpy as np

from design.dataset import Dataset, GroundTruth
from design.rip import estimate_rip
from solver.hadamard_gd import HyperParams, resolve_step_size

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AssumptionCheck:
    name: str
    holds: bool
    value: float
    bound: float
    detail: str = ""

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "holds": self.holds,
            "value": self.value,
            "bound": self.bound,
            "detail": self.detail,
        }


@dataclass
class AssumptionReport:
    checks: List[AssumptionCheck] = field(default_factory=list)

    @property
    def all_hold(self) -> bool:
        return all(check.holds for check in self.checks)

    def get(self, name: str) -> AssumptionCheck:
        for check in self.checks:
            if check.name == name:
                return check
        raise KeyError(name)

    def to_dict(self) -> Dict[str, Any]:
        return {"all_hold": self.all_hold, "checks": [check.to_dict() for check in self.checks]}


def _log_factor(p: int, alpha: float) -> float:
    return float(np.log(p / alpha))


def check_assumptions(truth: GroundTruth, ds: Dataset, hp: HyperParams,
                      constant: float = 1.0, rip_budget: int = 200,
                      seed: int = 0) -> AssumptionReport:
    """
    Evaluate the signal, design and tuning conditions

    signal:        kappa * m <= constant
    design:        (s+1)-RIP lower bound <= constant / (kappa sqrt(s) log(p / alpha))
    initialization: alpha <= constant / p
    step_size:     eta <= constant / (kappa log(p / alpha))

    The design check can only refute the condition: a lower bound above the
    limit proves a violation, one below it is inconclusive but reported as holding.

    Args:
        truth: Ground truth
        ds: Design (response not needed)
        hp: Hyper-parameters (eta resolved from the design when unset)
        constant: Constant replacing "<~"
        rip_budget: Support budget of the RIP estimate
        seed: Seed of the RIP support sampling

    Returns:
        AssumptionReport
    """
    hp = resolve_step_size(ds, hp)
    p, s = ds.p, truth.s
    kappa, m = truth.kappa, truth.m
    log_factor = _log_factor(p, hp.alpha)
    report = AssumptionReport()

    report.checks.append(AssumptionCheck(
        name="signal",
        holds=kappa * m <= constant,
        value=kappa * m,
        bound=constant,
        detail=f"s1={truth.s1}, s2={len(truth.weak_support)}",
    ))

    order = min(s + 1, p)
    rip = estimate_rip(ds, order, rip_budget, seed=seed)
    rip_limit = constant / (kappa * np.sqrt(max(s, 1)) * log_factor)
    report.checks.append(AssumptionCheck(
        name="design",
        holds=rip.delta_lower <= rip_limit,
        value=rip.delta_lower,
        bound=float(rip_limit),
        detail=f"RIP order {order}, {rip.supports_tested} supports{' (exact)' if rip.exact else ''}",
    ))

    report.checks.append(AssumptionCheck(
        name="initialization",
        holds=hp.alpha <= constant / p,
        value=hp.alpha,
        bound=constant / p,
    ))

    eta_limit = constant / (kappa * log_factor)
    report.checks.append(AssumptionCheck(
        name="step_size",
        holds=hp.eta <= eta_limit,
        value=float(hp.eta),
        bound=float(eta_limit),
    ))

    for check in report.checks:
        if not check.holds:
            logger.warning(f"Assumption '{check.name}' fails: {check.value:.4g} > {check.bound:.4g}")
    return report
