from .model import Mdp, MdpFile, QTable, load_mdp, mdp_to_dict, save_mdp, validate_mdp
from .solve import (
    SolveResult,
    bellman_update,
    greedy_policy,
    policy_value,
    solve_optimal,
    state_kernel,
    value_sensitivity_check,
)

__all__ = [
    "Mdp",
    "MdpFile",
    "QTable",
    "SolveResult",
    "bellman_update",
    "greedy_policy",
    "load_mdp",
    "mdp_to_dict",
    "policy_value",
    "save_mdp",
    "solve_optimal",
    "state_kernel",
    "validate_mdp",
    "value_sensitivity_check",
]
