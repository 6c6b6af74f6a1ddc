# Design module
from .dataset import (
    Dataset,
    CovarianceSpec,
    GroundTruth,
    generate_design,
    attach_response,
    normalize_columns,
    denormalize_columns,
    split_rows,
    fixed_signal,
)
from .rip import RipEstimate, estimate_rip
from .screening import screen_by_correlation
from .csv_io import load_csv, save_csv

__all__ = [
    "Dataset",
    "CovarianceSpec",
    "GroundTruth",
    "generate_design",
    "attach_response",
    "normalize_columns",
    "denormalize_columns",
    "split_rows",
    "fixed_signal",
    "RipEstimate",
    "estimate_rip",
    "screen_by_correlation",
    "load_csv",
    "save_csv",
]
