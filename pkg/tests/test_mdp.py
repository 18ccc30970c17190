import itertools
import json
import math

import numpy as np
import pytest

from qsa_lab.errors import (
    DimensionMismatch,
    GammaOutOfRange,
    InputFileNotFound,
    ParseError,
    PolicyRowNotStochastic,
    RewardOutOfRange,
    RowSumViolation,
    ValidationError,
)
from qsa_lab.mdp.model import QTable, load_mdp, mdp_to_dict, save_mdp, validate_mdp
from qsa_lab.mdp.solve import bellman_update, greedy_policy, policy_value, solve_optimal, value_sensitivity_check
from qsa_lab.policies.kernels import uniform_policy


def _single_state(reward=1.0, gamma=0.5):
    return {
        "num_states": 1,
        "num_actions": 1,
        "gamma": gamma,
        "rmax": 1.0,
        "rewards": [[reward]],
        "transitions": [[[1.0]]],
    }


def test_benchmark_shapes(two_by_two, four_state):
    assert two_by_two.transitions.shape == (2, 2, 2)
    assert four_state.rewards.shape == (4, 2)
    assert two_by_two.vmax == pytest.approx(2.0)


def test_arrays_are_read_only(two_by_two):
    with pytest.raises(ValueError):
        two_by_two.rewards[0, 0] = 0.5


def test_single_state_value():
    solved = solve_optimal(validate_mdp(_single_state()))
    assert solved.v_star[0] == pytest.approx(2.0, abs=1e-9)
    assert math.isinf(solved.gap)


def test_row_sum_violation():
    raw = _single_state()
    raw["transitions"] = [[[0.9]]]
    with pytest.raises(RowSumViolation):
        validate_mdp(raw)


def test_reward_out_of_range():
    with pytest.raises(RewardOutOfRange):
        validate_mdp(_single_state(reward=1.5))


@pytest.mark.parametrize("gamma", [0.0, 1.0, -0.1])
def test_gamma_out_of_range(gamma):
    with pytest.raises(GammaOutOfRange):
        validate_mdp(_single_state(gamma=gamma))


def test_zero_discount_when_allowed():
    mdp = validate_mdp(_single_state(reward=0.3, gamma=0.0), allow_zero_discount=True)
    assert solve_optimal(mdp).v_star[0] == pytest.approx(0.3)


def test_wrong_shape():
    raw = _single_state()
    raw["rewards"] = [[1.0, 0.0]]
    with pytest.raises(DimensionMismatch):
        validate_mdp(raw)


def test_missing_file(tmp_path):
    with pytest.raises(InputFileNotFound):
        load_mdp(tmp_path / "nope.json")
    with pytest.raises(InputFileNotFound):
        load_mdp("bench:no_such_benchmark")


def test_bad_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    with pytest.raises(ParseError):
        load_mdp(path)


def test_save_then_load_is_exact(tmp_path, random_mdp):
    mdp = random_mdp(seed=3)
    path = tmp_path / "m.json"
    save_mdp(mdp, path)
    again = load_mdp(path)
    np.testing.assert_array_equal(again.transitions, mdp.transitions)
    np.testing.assert_array_equal(again.rewards, mdp.rewards)
    assert json.loads(path.read_text()) == mdp_to_dict(mdp)


@pytest.mark.parametrize("name", ["two_by_two", "four_state", "three_state", "gap_large", "gap_small", "scaled_gap"])
def test_bellman_residual(name):
    mdp = load_mdp(f"bench:{name}")
    solved = solve_optimal(mdp)
    assert solved.residual <= 1e-10
    assert solved.q_star.in_range()


def test_fixed_point_matches_bellman_update(random_mdp):
    mdp = random_mdp(num_states=4, num_actions=3, seed=1)
    solved = solve_optimal(mdp)
    np.testing.assert_allclose(bellman_update(solved.q_star, mdp), solved.q_star.values, atol=1e-10)


def test_gap_of_identical_dynamics(gap_large):
    solved = solve_optimal(gap_large)
    np.testing.assert_allclose(solved.q_star.values, [[2.0, 1.0], [2.0, 1.0]], atol=1e-9)
    assert solved.gap == pytest.approx(1.0, abs=1e-9)
    assert solved.optimal_actions == (frozenset({0}), frozenset({0}))


def test_policy_value_by_hand(two_by_two):
    pi = uniform_policy(two_by_two)
    p_pi = np.einsum("sa,sat->st", pi, two_by_two.transitions)
    r_pi = (pi * two_by_two.rewards).sum(axis=1)
    expected = np.linalg.solve(np.eye(2) - 0.5 * p_pi, r_pi)
    np.testing.assert_allclose(policy_value(two_by_two, pi), expected, atol=1e-12)


def test_greedy_policy_attains_optimum(four_state):
    solved = solve_optimal(four_state)
    v = policy_value(four_state, greedy_policy(solved.q_star))
    np.testing.assert_allclose(v, solved.v_star, atol=1e-8)


def test_policy_rows_checked(two_by_two):
    with pytest.raises(PolicyRowNotStochastic):
        policy_value(two_by_two, np.array([[1.0, 0.0], [0.6, 0.6]]))


def test_value_sensitivity_holds(random_mdp):
    mdp = random_mdp(seed=5)
    rng = np.random.default_rng(0)
    for _ in range(10):
        pi = rng.dirichlet(np.ones(mdp.num_actions), size=mdp.num_states)
        assert value_sensitivity_check(mdp, pi).holds


def test_qtable_range(two_by_two):
    q = QTable.of(np.full((2, 2), 2.0), two_by_two)
    assert q.in_range()
    assert not QTable.of(np.full((2, 2), 2.5), two_by_two).in_range()
    with pytest.raises(DimensionMismatch):
        QTable.of(np.zeros((3, 2)), two_by_two)


def test_bellman_contracts_and_is_monotone(random_mdp):
    mdp = random_mdp(num_states=4, num_actions=3, gamma=0.8, seed=11)
    rng = np.random.default_rng(12)
    for _ in range(100):
        q1 = rng.uniform(0.0, mdp.vmax, size=(4, 3))
        q2 = rng.uniform(0.0, mdp.vmax, size=(4, 3))
        lhs = np.max(np.abs(bellman_update(q1, mdp) - bellman_update(q2, mdp)))
        assert lhs <= mdp.gamma * np.max(np.abs(q1 - q2)) + 1e-12
        upper = q1 + rng.uniform(0.0, 1.0, size=(4, 3))
        assert np.all(bellman_update(q1, mdp) <= bellman_update(upper, mdp) + 1e-12)


def test_reward_shift_keeps_gap(random_mdp):
    mdp = random_mdp(num_states=3, num_actions=3, gamma=0.6, seed=4)
    raw = mdp_to_dict(mdp)
    shifted = validate_mdp({**raw, "rmax": 2.0, "rewards": (np.asarray(raw["rewards"]) + 0.5).tolist()})
    base, moved = solve_optimal(mdp), solve_optimal(shifted)
    np.testing.assert_allclose(moved.q_star.values, base.q_star.values + 0.5 / (1.0 - 0.6), atol=1e-8)
    assert moved.gap == pytest.approx(base.gap, abs=1e-8)
    assert moved.optimal_actions == base.optimal_actions


@pytest.mark.parametrize("seed", [0, 1, 2])
def test_solve_matches_deterministic_policy_enumeration(random_mdp, seed):
    mdp = random_mdp(num_states=3, num_actions=2, gamma=0.75, seed=seed)
    best = np.full(3, -np.inf)
    for choice in itertools.product(range(2), repeat=3):
        policy = np.eye(2)[list(choice)]
        best = np.maximum(best, policy_value(mdp, policy))
    np.testing.assert_allclose(solve_optimal(mdp).v_star, best, atol=1e-8)


def test_policy_value_matches_simulation(random_mdp):
    mdp = random_mdp(num_states=3, num_actions=2, gamma=0.7, seed=9)
    policy = np.array([[0.3, 0.7], [0.5, 0.5], [0.9, 0.1]])
    rng = np.random.default_rng(10)
    episodes, horizon = 4000, 80
    s = np.zeros(episodes, dtype=int)
    ret = np.zeros(episodes)
    for t in range(horizon):
        a = (rng.random(episodes) > policy[s, 0]).astype(int)
        ret += mdp.gamma**t * mdp.rewards[s, a]
        cdf = np.cumsum(mdp.transitions[s, a], axis=1)
        s = np.minimum((rng.random(episodes)[:, None] > cdf).sum(axis=1), 2)
    stderr = ret.std(ddof=1) / np.sqrt(episodes)
    assert abs(ret.mean() - policy_value(mdp, policy)[0]) <= 4 * stderr + 1e-9


def test_one_state_two_actions():
    mdp = validate_mdp(
        {"num_states": 1, "num_actions": 2, "gamma": 0.5, "rmax": 1.0, "rewards": [[1.0, 0.0]], "transitions": [[[1.0], [1.0]]]}
    )
    solved = solve_optimal(mdp)
    np.testing.assert_allclose(solved.q_star.values, [[2.0, 1.0]], atol=1e-9)
    assert solved.gap == pytest.approx(1.0, abs=1e-9)
    assert solved.optimal_actions == (frozenset({0}),)


@pytest.mark.parametrize("kw", [{"tol": 0.0}, {"tol": -1.0}, {"tie_tol": -1e-3}])
def test_solve_rejects_bad_tolerance(two_by_two, kw):
    with pytest.raises(ValidationError):
        solve_optimal(two_by_two, **kw)
