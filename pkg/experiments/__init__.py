# Experiments module
from .settings import SettingSpec, get_setting, parse_setting, load_setting
from .harness import METHODS, Replication, make_replication, run_replication, run_setting, bootstrap_se
from .pipeline import PipelineResult, screened_pipeline
from .studies import (
    init_sweep,
    null_space_example,
    null_space_dataset,
    stage_dynamics_probe,
    stage_problem,
    l1_path_study,
    saturation_study,
    compare_stopping_rules,
    weak_signal_study,
    signal_trajectories,
)

__all__ = [
    "SettingSpec",
    "get_setting",
    "parse_setting",
    "load_setting",
    "METHODS",
    "Replication",
    "make_replication",
    "run_replication",
    "run_setting",
    "bootstrap_se",
    "PipelineResult",
    "screened_pipeline",
    "init_sweep",
    "null_space_example",
    "null_space_dataset",
    "stage_dynamics_probe",
    "stage_problem",
    "l1_path_study",
    "saturation_study",
    "compare_stopping_rules",
    "weak_signal_study",
    "signal_trajectories",
]
