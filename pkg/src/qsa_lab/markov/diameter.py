from __future__ import annotations

import itertools
import math

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import breadth_first_order

from ..errors import InstanceTooLarge, Unreachable
from ..mdp.model import Mdp
from .chains import EDGE_FLOOR, Kernel, expected_hitting_times


ENUMERATION_CAP = 10**6


def _reaches(adjacency: np.ndarray, target: int) -> np.ndarray:
    """Mask of states with a path to `target`."""
    order = breadth_first_order(csr_matrix(adjacency.T), target, directed=True, return_predecessors=False)
    mask = np.zeros(adjacency.shape[0], dtype=bool)
    mask[order] = True
    return mask


def mdp_diameter(mdp: Mdp, cap: int = ENUMERATION_CAP) -> float:
    """sup over deterministic stationary policies of max_{s,s'} E[hitting time of s' from s].

    Returns math.inf when every pair is connected under some policy but a
    particular policy strands a state.
    """
    S, A = mdp.num_states, mdp.num_actions
    if S == 1:
        return 0.0
    if A**S > cap:
        raise InstanceTooLarge(f"{A}^{S} deterministic policies exceed the cap {cap}", policies=A**S, cap=cap)

    union = (mdp.transitions > EDGE_FLOOR).any(axis=1)
    for target in range(S):
        reach = _reaches(union, target)
        if not reach.all():
            raise Unreachable(int(np.flatnonzero(~reach)[0]), target)

    worst = 0.0
    for actions in itertools.product(range(A), repeat=S):
        p_pi = mdp.transitions[np.arange(S), list(actions)]
        adjacency = p_pi > EDGE_FLOOR
        kernel = Kernel(p_pi)
        for target in range(S):
            if not _reaches(adjacency, target).all():
                return math.inf
            h = expected_hitting_times(kernel, target, check=False)
            worst = max(worst, float(h.max()))
    return worst
