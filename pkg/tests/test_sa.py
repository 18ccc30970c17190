import math

import numpy as np
import pytest

from qsa_lab.errors import LogDomain, PreconditionUnmet, StepsizeTooLarge, ValidationError
from qsa_lab.rng import Streams
from qsa_lab.sa import (
    BoundSpec,
    ConstantSystem,
    IidSystem,
    RecordingOptions,
    Schedule,
    TwoStateSystem,
    averaged_process,
    bound_g,
    chi,
    convergence_rate,
    geometric_grid,
    noise_decomposition,
    recursion_bound_check,
    run_sa,
)


def test_schedule_values():
    assert Schedule.stepsize(2.0, 0.0, 1)(3) == pytest.approx(0.5)
    assert Schedule.power(1.0, 0.5, 1)(3) == pytest.approx(0.5)
    assert Schedule.constant(0.3)(10**6) == 0.3
    assert Schedule.inverse_log(2.0, 1)(math.e**2 - 1) == pytest.approx(0.25)


def test_inverse_log_domain():
    with pytest.raises(LogDomain):
        Schedule.inverse_log(1.0, 1)(0)


def test_zero_scale_inverse_log_is_infinite():
    assert math.isinf(Schedule.inverse_log(0.0, 10)(0))


def test_schedule_validation():
    with pytest.raises(ValidationError):
        Schedule("power", 1.0, 1.5, 1)
    with pytest.raises(ValidationError):
        Schedule("power", -1.0, 0.5, 1)
    with pytest.raises(ValidationError):
        Schedule("power", 1.0, 0.5, 0)


def test_geometric_grid():
    grid = geometric_grid(1000, 1.2)
    assert grid[0] == 0 and grid[-1] == 1000
    assert all(b > a for a, b in zip(grid, grid[1:]))
    assert geometric_grid(10, 2.0) == (0, 1, 2, 4, 8, 10)


def test_constant_system_closed_form():
    # beta_n = 1/(n+2) from x_0 = 0 gives x_n = c (1 - 1/(n+1))
    c = np.array([1.0, -2.0])
    traj = run_sa(ConstantSystem(c), 99, seed=0)
    np.testing.assert_allclose(traj.final_x, c * (1 - 1 / 100), atol=1e-12)


def test_iid_system_reaches_mean():
    system = IidSystem(probs=[0.25, 0.75], theta=[[0.0], [4.0]], noise_scale=0.5)
    traj = run_sa(system, 50_000, seed=3)
    assert traj.final_x[0] == pytest.approx(3.0, abs=0.1)


def test_same_seed_same_trajectory():
    system = TwoStateSystem(noise_scale=0.2, sensitivity=0.5)
    a = run_sa(system, 500, seed=42)
    b = run_sa(system, 500, seed=42)
    np.testing.assert_array_equal(a.y, b.y)
    np.testing.assert_array_equal(a.final_x, b.final_x)
    c = run_sa(system, 500, seed=43)
    assert not np.array_equal(a.y, c.y)


def test_resume_matches_uninterrupted_run():
    system = TwoStateSystem(noise_scale=0.3, sensitivity=0.5)
    full = run_sa(system, 200, seed=9)
    first = run_sa(system, 100, seed=9)
    second = run_sa(
        system,
        100,
        start=100,
        x0=first.final_x,
        y0=first.final_y,
        streams=Streams.from_state(first.rng_state),
    )
    np.testing.assert_array_equal(second.final_x, full.final_x)
    np.testing.assert_array_equal(second.y, full.y[100:])


def test_checkpoints_and_window_recorded():
    traj = run_sa(TwoStateSystem(), 50, seed=1, recording=RecordingOptions(checkpoints=(0, 10, 50), window=(5, 15)))
    np.testing.assert_array_equal(traj.checkpoints, [0, 10, 50])
    np.testing.assert_array_equal(traj.snapshots[1], traj.window_iterates[5])
    np.testing.assert_array_equal(traj.x_at(50), traj.final_x)
    with pytest.raises(KeyError):
        traj.x_at(30)
    with pytest.raises(KeyError):
        traj.noise_at(15)


def test_chi():
    step = Schedule.stepsize(1.0, 0.0, 2)
    assert chi(5, 4, step) == 1.0
    # prod_{j=0}^{2} (1 - 1/(j+2)) = 1/2 * 2/3 * 3/4
    assert chi(0, 2, step) == pytest.approx(0.25)
    with pytest.raises(StepsizeTooLarge):
        chi(0, 3, Schedule.stepsize(1.0, 0.0, 1))


def test_noise_decomposition_identity():
    system = TwoStateSystem(noise_scale=0.2, sensitivity=0.8, rho=0.3, flip=Schedule.power(0.5, 0.2, 2))
    traj = run_sa(system, 200, seed=5, recording=RecordingOptions(checkpoints=(), window=(0, 200)))
    parts = noise_decomposition(traj, system, i_star=0)
    assert parts.residual.max() <= 1e-8
    assert set(parts.norms()) >= {"lhs_inf", "martingale_inf", "residual_inf"}


def test_averaged_process_starts_at_iterate():
    system = TwoStateSystem(x0=0.5)
    traj = run_sa(system, 20, seed=0, recording=RecordingOptions(checkpoints=(), window=(0, 20)))
    avg = averaged_process(traj, system)
    assert avg.z[0, 0] == 0.5
    # symmetric chain: stationary average of the targets is 1/2
    np.testing.assert_allclose(avg.fbar, 0.5, atol=1e-12)


def test_bound_g_worked_example():
    terms = bound_g(10_000, BoundSpec(n0=10, delta=0.01))
    assert terms.g == pytest.approx(0.047961, abs=1e-6)
    assert terms.g2 == pytest.approx(1 / 10_010)


def test_rate_at_zero_exponents():
    rate = convergence_rate(BoundSpec())
    assert rate.headline == pytest.approx(-0.5)
    assert rate.g_term == pytest.approx(-0.5)
    assert rate.g1_term == pytest.approx(-1.0)
    assert rate.dominant == pytest.approx(-0.5)


def test_recursion_bound_part1():
    check = recursion_bound_check(a=2.0, b=1.0, rho=1.0, rho_prime=1.5, n0=1, n=1000)
    assert check.part == 1
    assert check.ok


def test_recursion_bound_part2():
    check = recursion_bound_check(a=1.0, b=1.0, rho=0.5, rho_prime=1.0, n0=1, n=1000)
    assert check.part == 2
    assert check.ok


def test_recursion_bound_preconditions():
    with pytest.raises(PreconditionUnmet):
        recursion_bound_check(a=0.5, b=1.0, rho=1.0, rho_prime=1.5, n0=1, n=10)
    with pytest.raises(PreconditionUnmet):
        recursion_bound_check(a=1.0, b=1.0, rho=0.5, rho_prime=0.4, n0=1, n=10)
