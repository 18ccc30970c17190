from .estimators import (
    INTERPOLATION,
    REGRET_RATIO,
    McTerm,
    RegretEstimate,
    accumulate,
    cumulative_regret,
    default_tol,
    frozen_policy_regret_term,
    mc_continuation_regret,
    regret_grid,
    rollout_horizon,
)
from .exponents import FrozenTrend, PowerLawFit, RegretExponent, fit_power_law, frozen_trend, theoretical_regret_exponent

__all__ = [
    "INTERPOLATION",
    "REGRET_RATIO",
    "FrozenTrend",
    "McTerm",
    "PowerLawFit",
    "RegretEstimate",
    "RegretExponent",
    "accumulate",
    "cumulative_regret",
    "default_tol",
    "fit_power_law",
    "frozen_policy_regret_term",
    "frozen_trend",
    "mc_continuation_regret",
    "regret_grid",
    "rollout_horizon",
    "theoretical_regret_exponent",
]
