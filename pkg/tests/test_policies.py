import math

import numpy as np
import pytest

from qsa_lab.errors import LambdaUnderflow, NegativeLambda, ValidationError
from qsa_lab.markov.chains import stationary_distribution
from qsa_lab.mdp.solve import state_kernel
from qsa_lab.policies.kernels import (
    calibrate_c10,
    contraction_factor,
    induced_kernel,
    mu_min_s,
    pair_index,
    split_index,
    state_marginal,
    uniform_policy,
)
from qsa_lab.policies.softmax import (
    ControlValue,
    action_prob_lower_bound,
    behaviour_row,
    policy_distance_bound,
    seg_policy,
    sensitivity_grid,
    softmax_gradients,
    softmax_lambda_derivative_full,
    softmax_policy,
)


def test_softmax_sums_to_one():
    rng = np.random.default_rng(0)
    for lam in (1e-3, 0.1, 1.0, 50.0):
        p = softmax_policy(rng.uniform(0, 2, size=4), lam)
        assert p.sum() == pytest.approx(1.0)
        assert np.all(p >= 0.0)


def test_zero_temperature_is_greedy_with_ties():
    np.testing.assert_array_equal(softmax_policy(np.array([1.0, 3.0, 3.0]), 0.0), [0.0, 0.5, 0.5])


def test_high_temperature_is_nearly_uniform():
    np.testing.assert_allclose(softmax_policy(np.array([0.0, 1.0]), 1e6), [0.5, 0.5], atol=1e-6)


def test_negative_lambda():
    with pytest.raises(NegativeLambda):
        softmax_policy(np.zeros(2), -1.0)
    with pytest.raises(NegativeLambda):
        ControlValue(lam=-0.1)


def test_epsilon_out_of_range():
    with pytest.raises(ValidationError):
        ControlValue(epsilon=1.5)


def test_full_exploration_is_uniform():
    np.testing.assert_allclose(seg_policy(np.array([0.0, 5.0, 1.0]), ControlValue(epsilon=1.0, lam=0.1)), 1 / 3)


def test_zero_epsilon_matches_softmax_exactly():
    q = np.array([0.2, 0.7, 0.1])
    np.testing.assert_array_equal(behaviour_row(q, ControlValue(0.0, 0.3)), softmax_policy(q, 0.3))


def test_gradients_match_finite_differences():
    q = np.array([0.3, 1.1, 0.6])
    lam, h = 0.7, 1e-6
    grads = softmax_gradients(q, lam)
    for b in range(3):
        up, down = q.copy(), q.copy()
        up[b] += h
        down[b] -= h
        numeric = (softmax_policy(up, lam) - softmax_policy(down, lam)) / (2 * h)
        np.testing.assert_allclose(grads.dq[:, b], numeric, rtol=1e-6, atol=1e-9)
    numeric_lam = (softmax_policy(q, lam + h) - softmax_policy(q, lam - h)) / (2 * h)
    np.testing.assert_allclose(grads.dlam_full, numeric_lam, rtol=1e-6, atol=1e-9)


def test_gradients_refuse_tiny_lambda():
    with pytest.raises(LambdaUnderflow):
        softmax_gradients(np.zeros(2), 1e-15)


def test_action_probability_floor():
    rng = np.random.default_rng(4)
    ctrl = ControlValue(epsilon=0.1, lam=0.8)
    floor = action_prob_lower_bound(ctrl, rmax=1.0, gamma=0.5, num_actions=3)
    assert floor > 0.1 / 3
    for _ in range(200):
        q = rng.uniform(0.0, 2.0, size=3)
        assert seg_policy(q, ctrl).min() >= floor - 1e-15


def test_policy_distance_bound_holds():
    rng = np.random.default_rng(5)
    q_star = np.array([1.0, 0.4])
    for _ in range(50):
        q = q_star + rng.normal(scale=0.1, size=2)
        ctrl = ControlValue(epsilon=float(rng.uniform(0, 0.3)), lam=float(rng.uniform(0.05, 1.0)))
        d = policy_distance_bound(q, q_star, ctrl, gap=0.6)
        assert d.actual <= d.bound


def test_sensitivity_grid_peak():
    grid = sensitivity_grid((-1.0, 1.0), (0.05, 1.0), 11)
    assert grid.x.size == 121
    assert grid.dp_dx_abs.max() == pytest.approx(1.0 / (4 * 0.05), rel=1e-12)
    np.testing.assert_array_equal(grid.dp_dlam_abs[grid.x == 0.0], 0.0)


def test_sensitivity_grid_rejects_zero_lambda():
    with pytest.raises(NegativeLambda):
        sensitivity_grid((-1.0, 1.0), (0.0, 1.0), 5)


def test_pair_index_round_trip():
    assert pair_index(2, 1, 3) == 7
    assert split_index(7, 3) == (2, 1)


def test_induced_kernel_rows(two_by_two):
    k = induced_kernel(two_by_two, uniform_policy(two_by_two))
    assert k.size == 4
    np.testing.assert_allclose(k.rows.sum(axis=1), 1.0, atol=1e-12)
    # (s=0, a=1) -> (s'=1, a'=0): p(0,1,1) * 0.5
    assert k.rows[1, 2] == pytest.approx(0.8 * 0.5)


def test_contraction_and_state_floor(two_by_two):
    factor = contraction_factor(two_by_two, uniform_policy(two_by_two))
    assert 0.0 < factor.alpha_tilde < 1.0
    assert factor.alpha_tilde == pytest.approx(0.5 * factor.mu_min)
    assert 0.0 < mu_min_s(two_by_two) <= 0.5


def test_calibrate_c10(two_by_two):
    rng = np.random.default_rng(9)
    policies = [rng.dirichlet(np.ones(2), size=2) for _ in range(4)]
    assert calibrate_c10(two_by_two, policies) > 0.0
    assert calibrate_c10(two_by_two, [uniform_policy(two_by_two)] * 2) == 0.0


def test_full_lambda_derivative_and_short_form():
    q = np.array([0.3, 1.1, 0.6])
    grads = softmax_gradients(q, 0.7)
    np.testing.assert_array_equal(softmax_lambda_derivative_full(q, 0.7), grads.dlam_full)
    # the forms differ by sigma(a) (1 - sigma(a)) q(a) / lambda^2
    s = softmax_policy(q, 0.7)
    np.testing.assert_allclose(grads.dlam - grads.dlam_full, s * (q - s * q) / 0.7**2, atol=1e-12)


def test_two_action_softmax_value():
    p = softmax_policy(np.array([1.0, 0.0]), 1.0)
    assert p[0] == pytest.approx(math.e / (math.e + 1.0))
    assert p[0] == pytest.approx(0.731059, abs=1e-6)


def test_softmax_ignores_constant_shift_and_joint_scaling():
    rng = np.random.default_rng(21)
    for _ in range(50):
        q = rng.uniform(0.0, 2.0, size=4)
        lam = float(rng.uniform(0.05, 2.0))
        base = softmax_policy(q, lam)
        np.testing.assert_allclose(softmax_policy(q + rng.uniform(-5.0, 5.0), lam), base, atol=1e-12)
        c = float(rng.uniform(0.1, 10.0))
        np.testing.assert_allclose(softmax_policy(c * q, c * lam), base, atol=1e-12)


def test_gradients_match_finite_differences_on_random_rows():
    rng = np.random.default_rng(22)
    h = 1e-6
    for _ in range(100):
        size = int(rng.integers(2, 6))
        q = rng.uniform(0.0, 2.0, size=size)
        lam = float(rng.uniform(0.3, 2.0))
        grads = softmax_gradients(q, lam)
        for b in range(size):
            step = np.zeros(size)
            step[b] = h
            numeric = (softmax_policy(q + step, lam) - softmax_policy(q - step, lam)) / (2 * h)
            np.testing.assert_allclose(grads.dq[:, b], numeric, atol=1e-7)
        numeric_lam = (softmax_policy(q, lam + h) - softmax_policy(q, lam - h)) / (2 * h)
        np.testing.assert_allclose(grads.dlam_full, numeric_lam, atol=1e-6)


def test_action_floor_two_actions():
    ctrl = ControlValue(epsilon=0.0, lam=1.0)
    floor = action_prob_lower_bound(ctrl, rmax=1.0, gamma=0.5, num_actions=2)
    assert floor == pytest.approx(1.0 / (2.0 * math.e**2))
    rng = np.random.default_rng(23)
    for _ in range(1000):
        q = rng.uniform(0.0, 2.0, size=2)
        assert softmax_policy(q, 1.0).min() >= floor - 1e-15


def test_action_floor_is_monotone():
    lams = [0.1, 0.3, 1.0, 3.0]
    floors = [action_prob_lower_bound(ControlValue(0.2, lam), 1.0, 0.5, 3) for lam in lams]
    assert floors == sorted(floors)
    by_epsilon = [action_prob_lower_bound(ControlValue(eps, 0.5), 1.0, 0.5, 3) for eps in (0.0, 0.1, 0.5, 1.0)]
    assert by_epsilon == sorted(by_epsilon)
    by_rmax = [action_prob_lower_bound(ControlValue(0.0, 0.5), rmax, 0.5, 3) for rmax in (0.5, 1.0, 2.0)]
    assert by_rmax == sorted(by_rmax, reverse=True)


def test_induced_stationary_law_factorises(four_state):
    rng = np.random.default_rng(24)
    policy = rng.dirichlet(np.ones(2), size=4)
    mu = stationary_distribution(induced_kernel(four_state, policy)).probs.reshape(4, 2)
    marginal = state_marginal(four_state, policy)
    np.testing.assert_allclose(mu, marginal[:, None] * policy, atol=1e-10)
    p_pi, _ = state_kernel(four_state, policy)
    np.testing.assert_allclose(marginal @ p_pi, marginal, atol=1e-10)
