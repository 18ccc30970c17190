from .chains import (
    Kernel,
    PoissonSolution,
    StationaryDistribution,
    StationarySensitivity,
    empirical_occupancy,
    expected_hitting_times,
    inf_norm,
    is_irreducible,
    multistep_kernel_deviation,
    simulate_hitting_time,
    solve_poisson,
    stationary_distribution,
    stationary_sensitivity_check,
)
from .diameter import mdp_diameter

__all__ = [
    "Kernel",
    "PoissonSolution",
    "StationaryDistribution",
    "StationarySensitivity",
    "empirical_occupancy",
    "expected_hitting_times",
    "inf_norm",
    "is_irreducible",
    "mdp_diameter",
    "multistep_kernel_deviation",
    "simulate_hitting_time",
    "solve_poisson",
    "stationary_distribution",
    "stationary_sensitivity_check",
]
