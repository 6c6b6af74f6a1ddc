"""
Result records for experiment artifacts
"""
from dataclasses import dataclass, asdict, field
from typing import Any, Dict, List, Optional


@dataclass
class MetricsRow:
    """One method fitted on one replication"""
    method: str = ""
    replication: int = 0
    seed: int = 0
    std_est_error: Optional[float] = None  # ||b - b*||^2 / ||b*||^2
    mean_pred_error: Optional[float] = None  # sqrt(||y - yhat||^2 / n) on test data
    stopped_at: Optional[int] = None
    error: Optional[str] = None
    extra: Dict[str, Any] = field(default_factory=dict)

    @property
    def failed(self) -> bool:
        return self.error is not None

    def to_dict(self) -> Dict[str, Any]:
        """Convert to a flat dictionary (extra keys are inlined)"""
        d = asdict(self)
        extra = d.pop('extra')
        d.update(extra)
        return d


@dataclass
class MethodSummary:
    """Medians and bootstrap standard errors of one method"""
    method: str = ""
    median_std_est_error: Optional[float] = None
    se_std_est_error: float = 0.0
    median_mean_pred_error: Optional[float] = None
    se_mean_pred_error: float = 0.0
    median_stopped_at: Optional[float] = None
    succeeded: int = 0
    failed: int = 0

    def to_dict(self) -> Dict[str, Any]:
        return asdict(self)


@dataclass
class SummaryTable:
    """Per-method summaries of an experiment plus provenance"""
    name: str = ""
    config_hash: str = ""
    master_seed: int = 0
    replications: int = 0
    rows: List[MethodSummary] = field(default_factory=list)
    config: Dict[str, Any] = field(default_factory=dict)

    def get(self, method: str) -> MethodSummary:
        for row in self.rows:
            if row.method == method:
                return row
        raise KeyError(method)

    def to_dict(self) -> Dict[str, Any]:
        return {
            "name": self.name,
            "config_hash": self.config_hash,
            "master_seed": self.master_seed,
            "replications": self.replications,
            "config": self.config,
            "rows": {row.method: row.to_dict() for row in self.rows},
        }
