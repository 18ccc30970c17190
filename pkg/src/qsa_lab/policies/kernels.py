from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from ..errors import DimensionMismatch
from ..markov.chains import Kernel, inf_norm, stationary_distribution
from ..mdp.model import Mdp
from ..mdp.solve import check_policy


def pair_index(s: int, a: int, num_actions: int) -> int:
    """Noise-state index of the pair (s, a)."""
    return s * num_actions + a


def split_index(y: int, num_actions: int) -> tuple[int, int]:
    return divmod(y, num_actions)


def induced_kernel(mdp: Mdp, policy: np.ndarray) -> Kernel:
    """p((s,a),(s',a')) = p(s,a,s') * pi(s',a') on the state-action chain."""
    pi = np.asarray(policy, dtype=float)
    if pi.shape != (mdp.num_states, mdp.num_actions):
        raise DimensionMismatch(f"policy shape {pi.shape} != {(mdp.num_states, mdp.num_actions)}")
    check_policy(pi, mdp)
    size = mdp.num_states * mdp.num_actions
    rows = (mdp.transitions[:, :, :, None] * pi[None, None, :, :]).reshape(size, size)
    # products of stochastic rows drift off 1 by a few ulps
    rows = rows / rows.sum(axis=1, keepdims=True)
    return Kernel(rows)


@dataclass(frozen=True)
class ContractionFactor:
    alpha_tilde: float  # (1 - gamma) * mu_min; the contraction factor is 1 - alpha_tilde
    mu_min: float


def contraction_factor(mdp: Mdp, policy: np.ndarray) -> ContractionFactor:
    mu = stationary_distribution(induced_kernel(mdp, policy))
    return ContractionFactor(alpha_tilde=(1.0 - mdp.gamma) * mu.mu_min, mu_min=mu.mu_min)


def uniform_policy(mdp: Mdp) -> np.ndarray:
    return np.full((mdp.num_states, mdp.num_actions), 1.0 / mdp.num_actions)


def state_marginal(mdp: Mdp, policy: np.ndarray) -> np.ndarray:
    mu = stationary_distribution(induced_kernel(mdp, policy)).probs
    return mu.reshape(mdp.num_states, mdp.num_actions).sum(axis=1)


def mu_min_s(mdp: Mdp) -> float:
    """Smallest stationary state probability under uniform behaviour."""
    return float(state_marginal(mdp, uniform_policy(mdp)).min())


def calibrate_c10(mdp: Mdp, policies: Sequence[np.ndarray]) -> float:
    """Largest observed ||mu - mu'||_inf * mu_min / ||P - P'||_inf over policy pairs.

    Pairs whose kernels coincide carry no information and are skipped.
    """
    kernels = [induced_kernel(mdp, pi) for pi in policies]
    dists = [stationary_distribution(k) for k in kernels]
    ratio = 0.0
    for i, j in itertools.combinations(range(len(kernels)), 2):
        spread = inf_norm(kernels[i].rows - kernels[j].rows)
        if spread <= 1e-14:
            continue
        shift = float(np.max(np.abs(dists[i].probs - dists[j].probs)))
        mu_min = min(dists[i].mu_min, dists[j].mu_min)
        ratio = max(ratio, shift * mu_min / spread)
    return ratio
