from .kernels import (
    ContractionFactor,
    calibrate_c10,
    contraction_factor,
    induced_kernel,
    mu_min_s,
    pair_index,
    split_index,
    state_marginal,
    uniform_policy,
)
from .softmax import (
    ControlValue,
    PolicyDistance,
    SensitivityGrid,
    SoftmaxGradients,
    action_prob_lower_bound,
    behaviour_row,
    policy_distance_bound,
    policy_matrix,
    seg_policy,
    sensitivity_grid,
    softmax_gradients,
    softmax_lambda_derivative_full,
    softmax_policy,
)

__all__ = [
    "ContractionFactor",
    "ControlValue",
    "PolicyDistance",
    "SensitivityGrid",
    "SoftmaxGradients",
    "action_prob_lower_bound",
    "behaviour_row",
    "calibrate_c10",
    "contraction_factor",
    "induced_kernel",
    "mu_min_s",
    "pair_index",
    "policy_distance_bound",
    "policy_matrix",
    "seg_policy",
    "sensitivity_grid",
    "softmax_gradients",
    "softmax_lambda_derivative_full",
    "softmax_policy",
    "split_index",
    "state_marginal",
    "uniform_policy",
]
