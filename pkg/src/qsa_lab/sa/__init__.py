from .base import BaseSystem, SaSystem, Schedule, eval_schedule
from .bounds import (
    BoundSpec,
    BoundTerms,
    RateReport,
    RecursionCheck,
    bound_g,
    convergence_rate,
    derived_constants,
    identify_bound_spec,
    recursion_bound_check,
    with_derived,
)
from .conditions import ConditionExtras, ConditionReport, ConditionResult, check_conditions, check_n0
from .diagnostics import AveragedProcess, NoiseDecomposition, averaged_process, chi, noise_decomposition
from .engine import TRAJECTORY_COLUMNS, RecordingOptions, SaTrajectory, geometric_grid, run_sa
from .systems import ConstantSystem, IidSystem, TwoStateSystem

__all__ = [
    "AveragedProcess",
    "BaseSystem",
    "BoundSpec",
    "BoundTerms",
    "ConditionExtras",
    "ConditionReport",
    "ConditionResult",
    "ConstantSystem",
    "IidSystem",
    "NoiseDecomposition",
    "RateReport",
    "RecordingOptions",
    "RecursionCheck",
    "SaSystem",
    "SaTrajectory",
    "TRAJECTORY_COLUMNS",
    "Schedule",
    "TwoStateSystem",
    "averaged_process",
    "bound_g",
    "check_conditions",
    "check_n0",
    "chi",
    "convergence_rate",
    "derived_constants",
    "eval_schedule",
    "geometric_grid",
    "identify_bound_spec",
    "noise_decomposition",
    "recursion_bound_check",
    "run_sa",
    "with_derived",
]
