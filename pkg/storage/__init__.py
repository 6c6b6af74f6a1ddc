# Storage module
from .models import MetricsRow, MethodSummary, SummaryTable
from .artifacts import ArtifactStore

__all__ = ["MetricsRow", "MethodSummary", "SummaryTable", "ArtifactStore"]
