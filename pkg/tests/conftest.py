import numpy as np
import pytest

from qsa_lab.markov.chains import Kernel
from qsa_lab.mdp.model import load_mdp, validate_mdp


@pytest.fixture
def two_by_two():
    return load_mdp("bench:two_by_two")


@pytest.fixture
def four_state():
    return load_mdp("bench:four_state")


@pytest.fixture
def gap_large():
    return load_mdp("bench:gap_large")


@pytest.fixture
def random_mdp():
    """Factory for dense random MDPs (every transition positive)."""

    def make(num_states=3, num_actions=2, gamma=0.7, seed=0):
        rng = np.random.default_rng(seed)
        p = rng.uniform(0.05, 1.0, size=(num_states, num_actions, num_states))
        p /= p.sum(axis=2, keepdims=True)
        r = rng.uniform(0.0, 1.0, size=(num_states, num_actions))
        return validate_mdp(
            {
                "num_states": num_states,
                "num_actions": num_actions,
                "gamma": gamma,
                "rmax": 1.0,
                "rewards": r.tolist(),
                "transitions": p.tolist(),
            }
        )

    return make


@pytest.fixture
def random_kernel():
    def make(size=5, seed=0):
        rng = np.random.default_rng(seed)
        rows = rng.uniform(0.05, 1.0, size=(size, size))
        rows /= rows.sum(axis=1, keepdims=True)
        return Kernel(rows)

    return make
