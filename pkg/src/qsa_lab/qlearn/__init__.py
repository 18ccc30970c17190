from .runner import (
    BoltzmannTuning,
    CheckpointSnapshot,
    RunResult,
    auto_beta,
    boltzmann_optimal_exponent,
    bound_spec_for,
    build_system,
    condition_extras,
    enforce_conditions,
    error_series,
    resolve_schedules,
    resume,
    run_boltzmann,
    run_qlearning,
    run_seg,
    sample_complexity_exponent,
    temperature_coefficient,
)
from .system import QLearningSystem, Schedules, embedded_trajectory, initial_action
from .update import f_map, f_table, martingale_noise, q_update, stationary_average_map

__all__ = [
    "BoltzmannTuning",
    "CheckpointSnapshot",
    "QLearningSystem",
    "RunResult",
    "Schedules",
    "auto_beta",
    "boltzmann_optimal_exponent",
    "bound_spec_for",
    "build_system",
    "condition_extras",
    "embedded_trajectory",
    "enforce_conditions",
    "error_series",
    "f_map",
    "f_table",
    "initial_action",
    "martingale_noise",
    "q_update",
    "resolve_schedules",
    "resume",
    "run_boltzmann",
    "run_qlearning",
    "run_seg",
    "sample_complexity_exponent",
    "stationary_average_map",
    "temperature_coefficient",
]
