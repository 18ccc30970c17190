from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
import scipy.linalg

from ..errors import DimensionMismatch, NonConvergence, PolicyRowNotStochastic, SingularSystem, ValidationError
from .model import Mdp, QTable


DEFAULT_TOL = 1e-10
DEFAULT_TIE_TOL = 1e-9
POLICY_ROW_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class SolveResult:
    q_star: QTable
    v_star: np.ndarray
    optimal_actions: tuple[frozenset[int], ...]
    gap: float  # math.inf when every action is optimal everywhere
    residual: float
    iterations: int


def _values(q: QTable | np.ndarray, mdp: Mdp) -> np.ndarray:
    v = q.values if isinstance(q, QTable) else np.asarray(q, dtype=float)
    if v.shape != (mdp.num_states, mdp.num_actions):
        raise DimensionMismatch(f"Q shape {v.shape} != {(mdp.num_states, mdp.num_actions)}")
    return v


def bellman_update(q: QTable | np.ndarray, mdp: Mdp) -> np.ndarray:
    """(TQ)(s,a) = r(s,a) + gamma * sum_s' p(s,a,s') max_a' Q(s',a')."""
    v = _values(q, mdp).max(axis=1)
    return mdp.rewards + mdp.gamma * (mdp.transitions @ v)


def optimal_action_sets(q: np.ndarray, tie_tol: float) -> tuple[frozenset[int], ...]:
    v = q.max(axis=1)
    return tuple(frozenset(int(a) for a in np.flatnonzero(q[s] >= v[s] - tie_tol)) for s in range(q.shape[0]))


def suboptimality_gap(q: np.ndarray, tie_tol: float = DEFAULT_TIE_TOL) -> float:
    v = q.max(axis=1, keepdims=True)
    margin = v - q
    sub = margin[q < v - tie_tol]
    return float(sub.min()) if sub.size else math.inf


def solve_optimal(
    mdp: Mdp,
    tol: float = DEFAULT_TOL,
    tie_tol: float = DEFAULT_TIE_TOL,
    max_iters: int = 1_000_000,
) -> SolveResult:
    """Value iteration to within `tol` of Q* in sup norm."""
    if tol <= 0 or tie_tol < 0:
        raise ValidationError(f"tol must be > 0 and tie_tol >= 0, got tol={tol} tie_tol={tie_tol}")

    q = np.zeros((mdp.num_states, mdp.num_actions))
    iterations = 0
    if mdp.gamma == 0.0:
        q = np.array(mdp.rewards, dtype=float)
        iterations = 1
    else:
        # ||TQ - Q|| <= tol(1-g)/g  =>  ||TQ - Q*|| <= tol, and the residual of TQ is <= tol(1-g)
        stop = tol * (1.0 - mdp.gamma) / mdp.gamma
        diff = math.inf
        while iterations < max_iters:
            nxt = bellman_update(q, mdp)
            diff = float(np.max(np.abs(nxt - q)))
            q = nxt
            iterations += 1
            if diff <= stop:
                break
        else:
            raise NonConvergence(max_iters, diff)

    residual = float(np.max(np.abs(bellman_update(q, mdp) - q)))
    return SolveResult(
        q_star=QTable.of(q, mdp),
        v_star=q.max(axis=1),
        optimal_actions=optimal_action_sets(q, tie_tol),
        gap=suboptimality_gap(q, tie_tol),
        residual=residual,
        iterations=iterations,
    )


def greedy_policy(q: QTable | np.ndarray, tie_tol: float = DEFAULT_TIE_TOL) -> np.ndarray:
    """Uniform mass over the near-argmax actions of each row."""
    v = q.values if isinstance(q, QTable) else np.asarray(q, dtype=float)
    mask = v >= v.max(axis=1, keepdims=True) - tie_tol
    return mask / mask.sum(axis=1, keepdims=True)


def check_policy(policy: np.ndarray, mdp: Mdp) -> np.ndarray:
    pi = np.asarray(policy, dtype=float)
    if pi.shape != (mdp.num_states, mdp.num_actions):
        raise DimensionMismatch(f"policy shape {pi.shape} != {(mdp.num_states, mdp.num_actions)}")
    for s in range(mdp.num_states):
        total = float(pi[s].sum())
        if np.any(pi[s] < 0.0) or abs(total - 1.0) > POLICY_ROW_TOL:
            raise PolicyRowNotStochastic(s, total)
    return pi


def state_kernel(mdp: Mdp, policy: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(P_pi, r_pi) for a stationary policy."""
    p_pi = np.einsum("sa,sat->st", policy, mdp.transitions)
    r_pi = np.einsum("sa,sa->s", policy, mdp.rewards)
    return p_pi, r_pi


def policy_value(mdp: Mdp, policy: np.ndarray) -> np.ndarray:
    """Exact V^pi from (I - gamma P_pi) V = r_pi."""
    pi = check_policy(policy, mdp)
    p_pi, r_pi = state_kernel(mdp, pi)
    lhs = np.eye(mdp.num_states) - mdp.gamma * p_pi
    try:
        v = scipy.linalg.solve(lhs, r_pi)
    except (np.linalg.LinAlgError, scipy.linalg.LinAlgError) as e:
        raise SingularSystem(f"policy evaluation: {e}") from e
    if not np.all(np.isfinite(v)):
        raise SingularSystem("policy evaluation produced non-finite values")
    return v


@dataclass(frozen=True)
class SensitivityReport:
    lhs: float  # (1-gamma) * ||V* - V^pi||
    rhs: float
    holds: bool


def value_sensitivity_check(mdp: Mdp, policy: np.ndarray, solved: SolveResult | None = None) -> SensitivityReport:
    """Compare (1-g)||V* - V^pi|| with g Rmax/(1-g) ||P* - P^pi|| + ||r* - r^pi||."""
    solved = solved or solve_optimal(mdp)
    pi = check_policy(policy, mdp)
    star = greedy_policy(solved.q_star)
    p_star, r_star = state_kernel(mdp, star)
    p_pi, r_pi = state_kernel(mdp, pi)
    v_pi = policy_value(mdp, pi)
    lhs = (1.0 - mdp.gamma) * float(np.max(np.abs(solved.v_star - v_pi)))
    kernel_gap = float(np.max(np.abs(p_star - p_pi).sum(axis=1)))
    rhs = mdp.gamma * mdp.vmax * kernel_gap + float(np.max(np.abs(r_star - r_pi)))
    return SensitivityReport(lhs=lhs, rhs=rhs, holds=lhs <= rhs + 1e-12)
