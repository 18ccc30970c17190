from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.special import expit

from ..errors import LambdaUnderflow, NegativeLambda, ValidationError


GREEDY_LAMBDA = 1e-12
TIE_TOL = 1e-9


@dataclass(frozen=True)
class ControlValue:
    """Exploration control: epsilon mixing weight and softmax temperature."""

    epsilon: float = 0.0
    lam: float = 1.0

    def __post_init__(self) -> None:
        if not (0.0 <= self.epsilon <= 1.0):
            raise ValidationError(f"epsilon={self.epsilon!r} outside [0, 1]", epsilon=self.epsilon)
        if self.lam < 0.0:
            raise NegativeLambda(self.lam)


def softmax_policy(q_row: np.ndarray, lam: float, tie_tol: float = TIE_TOL) -> np.ndarray:
    q = np.asarray(q_row, dtype=float)
    if lam < 0.0:
        raise NegativeLambda(lam)
    if lam < GREEDY_LAMBDA:
        mask = q >= q.max() - tie_tol
        return mask / mask.sum()
    w = np.exp((q - q.max()) / lam)
    return w / w.sum()


def seg_policy(q_row: np.ndarray, ctrl: ControlValue, tie_tol: float = TIE_TOL) -> np.ndarray:
    """epsilon/|A| + (1 - epsilon) * softmax(q / lambda)."""
    sigma = softmax_policy(q_row, ctrl.lam, tie_tol)
    return ctrl.epsilon / sigma.size + (1.0 - ctrl.epsilon) * sigma


def behaviour_row(q_row: np.ndarray, ctrl: ControlValue) -> np.ndarray:
    # epsilon == 0 reduces to the plain softmax bit for bit
    if ctrl.epsilon == 0.0:
        return softmax_policy(q_row, ctrl.lam)
    return seg_policy(q_row, ctrl)


def policy_matrix(q: np.ndarray, ctrl: ControlValue) -> np.ndarray:
    return np.vstack([behaviour_row(row, ctrl) for row in np.asarray(q, dtype=float)])


@dataclass(frozen=True, eq=False)
class SoftmaxGradients:
    dq: np.ndarray  # dq[a, b] = d sigma(a) / d q(b)
    dlam: np.ndarray  # sum over b != a only
    dlam_full: np.ndarray


def _check_lambda(lam: float) -> None:
    if lam < 0.0:
        raise NegativeLambda(lam)
    if lam < GREEDY_LAMBDA:
        raise LambdaUnderflow(lam)


def softmax_lambda_derivative_full(q_row: np.ndarray, lam: float) -> np.ndarray:
    """d sigma(a)/d lambda = sigma(a) * sum_b sigma(b) (q(b) - q(a)) / lambda^2."""
    _check_lambda(lam)
    q = np.asarray(q_row, dtype=float)
    s = softmax_policy(q, lam)
    return s * (s @ q - q) / lam**2


def softmax_gradients(q_row: np.ndarray, lam: float) -> SoftmaxGradients:
    _check_lambda(lam)
    q = np.asarray(q_row, dtype=float)
    s = softmax_policy(q, lam)
    dq = (np.diag(s) - np.outer(s, s)) / lam
    # dlam leaves out the b == a term of the full derivative
    dlam = s * (s @ q - s * q) / lam**2
    return SoftmaxGradients(dq=dq, dlam=dlam, dlam_full=s * (s @ q - q) / lam**2)


def action_prob_lower_bound(ctrl: ControlValue, rmax: float, gamma: float, num_actions: int) -> float:
    """Smallest action probability over all Q in [0, rmax/(1-gamma)]."""
    floor = ctrl.epsilon / num_actions
    if ctrl.lam < GREEDY_LAMBDA:
        return floor
    exponent = rmax / (ctrl.lam * (1.0 - gamma))
    soft = 0.0 if exponent > 700.0 else 1.0 / (num_actions * math.exp(exponent))
    return floor + (1.0 - ctrl.epsilon) * soft


@dataclass(frozen=True)
class PolicyDistance:
    actual: float
    bound: float


def policy_distance_bound(
    q_row: np.ndarray,
    q_star_row: np.ndarray,
    ctrl: ControlValue,
    gap: float,
    tie_tol: float = TIE_TOL,
) -> PolicyDistance:
    """Sup-distance of the exploration row from the greedy-optimal row.

    Bounded by epsilon + |Q - Q*|_inf / lambda + |A| exp(-gap / lambda).
    """
    row = seg_policy(q_row, ctrl, tie_tol)
    greedy = softmax_policy(q_star_row, 0.0, tie_tol)
    actual = float(np.max(np.abs(row - greedy)))
    if ctrl.lam < GREEDY_LAMBDA:
        return PolicyDistance(actual, math.inf)
    err = float(np.max(np.abs(np.asarray(q_row) - np.asarray(q_star_row))))
    tail = 0.0 if math.isinf(gap) else len(row) * math.exp(-gap / ctrl.lam)
    return PolicyDistance(actual, ctrl.epsilon + err / ctrl.lam + tail)


@dataclass(frozen=True, eq=False)
class SensitivityGrid:
    x: np.ndarray
    lam: np.ndarray
    dp_dx_abs: np.ndarray
    dp_dlam_abs: np.ndarray

    def rows(self):
        return zip(self.x, self.lam, self.dp_dx_abs, self.dp_dlam_abs)


def _axis(lo: float, hi: float, resolution: int) -> np.ndarray:
    axis = np.linspace(lo, hi, resolution)
    axis[np.abs(axis) < 1e-12 * max(abs(lo), abs(hi), 1.0)] = 0.0
    return axis


def sensitivity_grid(
    x_range: tuple[float, float],
    lambda_range: tuple[float, float],
    resolution: int,
) -> SensitivityGrid:
    """|dP/dx| and |dP/dlambda| of P(x, lambda) = 1/(1 + exp(-x/lambda)) on a grid."""
    if min(lambda_range) <= 0.0:
        raise NegativeLambda(min(lambda_range))
    if resolution < 1:
        raise ValidationError("resolution must be positive")
    xs = _axis(x_range[0], x_range[1], resolution)
    lams = np.linspace(lambda_range[0], lambda_range[1], resolution)
    x, lam = (a.ravel() for a in np.meshgrid(xs, lams, indexing="ij"))
    p = expit(x / lam)
    slope = p * (1.0 - p)
    return SensitivityGrid(x=x, lam=lam, dp_dx_abs=slope / lam, dp_dlam_abs=np.abs(x) * slope / lam**2)
