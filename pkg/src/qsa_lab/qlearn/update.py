from __future__ import annotations

from typing import Optional

import numpy as np

from ..errors import ValidationError
from ..markov.chains import stationary_distribution
from ..mdp.model import Mdp, QTable, frozen_array
from ..mdp.solve import bellman_update
from ..policies.kernels import induced_kernel


def q_update(
    q: QTable,
    s: int,
    a: int,
    r: float,
    s_next: int,
    beta: float,
    mdp: Optional[Mdp] = None,
    *,
    gamma: Optional[float] = None,
) -> QTable:
    """Asynchronous update of the single entry (s, a).

    The discount comes from `mdp`, or from `gamma` when no model is at hand; give exactly one.
    """
    if (mdp is None) == (gamma is None):
        raise ValidationError("q_update needs exactly one of mdp or gamma")
    discount = mdp.gamma if mdp is not None else gamma
    values = np.array(q.values)
    values[s, a] += beta * (r + discount * values[s_next].max() - values[s, a])
    return QTable(frozen_array(values), q.vmax)


def f_map(q: QTable | np.ndarray, y: tuple[int, int], mdp: Mdp) -> np.ndarray:
    """Q with the (s, a) entry replaced by (TQ)(s, a)."""
    values = q.values if isinstance(q, QTable) else np.asarray(q, dtype=float)
    s, a = y
    out = np.array(values, dtype=float)
    out[s, a] = mdp.rewards[s, a] + mdp.gamma * (mdp.transitions[s, a] @ values.max(axis=1))
    return out


def f_table(values: np.ndarray, mdp: Mdp) -> np.ndarray:
    """Row y = s*|A| + a holds F(Q, (s, a)) flattened."""
    flat = np.asarray(values, dtype=float).reshape(-1)
    table = np.tile(flat, (flat.size, 1))
    np.fill_diagonal(table, bellman_update(values, mdp).reshape(-1))
    return table


def martingale_noise(q: QTable | np.ndarray, s: int, a: int, s_next: int, mdp: Mdp) -> np.ndarray:
    """gamma (max Q(s', .) - E[max Q(S', .)]) at (s, a), zero elsewhere."""
    values = q.values if isinstance(q, QTable) else np.asarray(q, dtype=float)
    v = values.max(axis=1)
    out = np.zeros_like(values, dtype=float)
    out[s, a] = mdp.gamma * (v[s_next] - mdp.transitions[s, a] @ v)
    return out


def stationary_average_map(q: QTable | np.ndarray, mdp: Mdp, policy: np.ndarray) -> np.ndarray:
    """mu(s,a) (TQ)(s,a) + (1 - mu(s,a)) Q(s,a) under the induced chain's stationary law."""
    values = q.values if isinstance(q, QTable) else np.asarray(q, dtype=float)
    mu = stationary_distribution(induced_kernel(mdp, policy)).probs.reshape(values.shape)
    return mu * bellman_update(values, mdp) + (1.0 - mu) * values
