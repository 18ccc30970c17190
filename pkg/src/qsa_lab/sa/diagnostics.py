from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..errors import NotIrreducible, StepsizeTooLarge, ValidationError, WindowTooLarge
from ..markov.chains import PoissonSolution, solve_poisson, stationary_distribution
from .base import SaSystem, Schedule, eval_schedule
from .engine import SaTrajectory


MAX_WINDOW = 5000
MAX_NOISE_STATES = 30


def chi(m: int, n: int, stepsize: Schedule) -> float:
    """prod_{j=m}^{n} (1 - beta_j), accumulated in log space; 1 when m > n."""
    if m > n:
        return 1.0
    total = 0.0
    for j in range(m, n + 1):
        beta = eval_schedule(stepsize, j)
        if beta >= 1.0:
            raise StepsizeTooLarge(j, beta)
        total += math.log1p(-beta)
    return math.exp(total)


def _f_table(system: SaSystem, x: np.ndarray) -> np.ndarray:
    table = getattr(system, "f_table", None)
    if table is not None:
        return table(x)
    return np.vstack([system.update_map(x, y) for y in range(system.noise_states)])


def _stationary(system: SaSystem, ctrl, x: np.ndarray, n: int):
    kernel = system.kernel_at(ctrl, x)
    try:
        return kernel, stationary_distribution(kernel)
    except NotIrreducible as e:
        raise NotIrreducible(n=n, components=e.details.get("components")) from e


def _window(traj: SaTrajectory, window: Optional[tuple[int, int]]) -> tuple[int, int]:
    if traj.window is None:
        raise ValidationError("trajectory has no full-resolution window")
    lo, hi = window if window is not None else traj.window
    if lo < traj.window[0] or hi > traj.window[1] or lo > hi:
        raise ValidationError(f"window {(lo, hi)} not inside the recorded window {traj.window}")
    return lo, hi


@dataclass(eq=False)
class AveragedProcess:
    n: np.ndarray
    z: np.ndarray  # z_n over the window, z_lo = x_lo
    fbar: np.ndarray  # stationary-averaged map at (ctrl_n, x_n), n in [lo, hi)


def averaged_process(
    traj: SaTrajectory, system: SaSystem, window: Optional[tuple[int, int]] = None
) -> AveragedProcess:
    """z_{n+1} = z_n + beta_n (Fbar(x_n) - z_n), started from the iterate at the window start."""
    lo, hi = _window(traj, window)
    z = [np.array(traj.x_at(lo), dtype=float)]
    fbars = []
    for n in range(lo, hi):
        x = traj.x_at(n)
        _, mu = _stationary(system, system.control(n), x, n)
        fbar = mu.probs @ _f_table(system, x)
        fbars.append(fbar)
        z.append(z[-1] + traj.beta_at(n) * (fbar - z[-1]))
    return AveragedProcess(
        n=np.arange(lo, hi + 1),
        z=np.array(z),
        fbar=np.array(fbars).reshape(hi - lo, -1),
    )


@dataclass(eq=False)
class NoiseDecomposition:
    n: np.ndarray
    lhs: np.ndarray  # x_n - z_n
    martingale: np.ndarray  # sum beta_i chi (M_{i+1} + M'_{i+1})
    t1: np.ndarray
    t2: np.ndarray
    t3: np.ndarray
    residual: np.ndarray  # sup norm of lhs minus the four sums

    def norms(self) -> dict[str, np.ndarray]:
        def sup(a: np.ndarray) -> np.ndarray:
            return np.max(np.abs(a), axis=1)

        return {
            "lhs_inf": sup(self.lhs),
            "martingale_inf": sup(self.martingale),
            "t1_inf": sup(self.t1),
            "t2_inf": sup(self.t2),
            "t3_inf": sup(self.t3),
            "residual_inf": self.residual,
        }


def noise_decomposition(
    traj: SaTrajectory,
    system: SaSystem,
    i_star: int = 0,
    window: Optional[tuple[int, int]] = None,
) -> NoiseDecomposition:
    """Split x_n - z_n into martingale and Poisson-telescoping parts over a window.

    With H^{(c,x)} the Poisson solution of the kernel at (c, x) for F(x, .),
    each step contributes beta_i chi(i+1, n-1) times
      M_{i+1} + M'_{i+1}                                     (martingale)
      H^{(c_i,x_i)}(y_i) - H^{(c_{i+1},x_{i+1})}(y_{i+1})     (t1)
      H^{(c_{i+1},x_{i+1})}(y_{i+1}) - H^{(c_{i+1},x_i)}(y_{i+1}) (t2)
      H^{(c_{i+1},x_i)}(y_{i+1}) - H^{(c_i,x_i)}(y_{i+1})     (t3)
    where M'_{i+1} = H^{(c_i,x_i)}(y_{i+1}) - sum_j p(y_i, j) H^{(c_i,x_i)}(j).
    """
    lo, hi = _window(traj, window)
    if hi - lo > MAX_WINDOW or system.noise_states > MAX_NOISE_STATES:
        raise WindowTooLarge(
            f"window of {hi - lo} steps over {system.noise_states} noise states exceeds "
            f"{MAX_WINDOW} steps / {MAX_NOISE_STATES} states",
            steps=hi - lo,
            noise_states=system.noise_states,
        )
    avg = averaged_process(traj, system, (lo, hi))

    def poisson(n: int, ctrl_index: int, x: np.ndarray) -> tuple[np.ndarray, PoissonSolution]:
        kernel, mu = _stationary(system, system.control(ctrl_index), x, n)
        sol = solve_poisson(kernel, _f_table(system, x), mu, i_star=i_star, check=False)
        return kernel.rows, sol

    dim = avg.z.shape[1]
    sums = {k: np.zeros(dim) for k in ("martingale", "t1", "t2", "t3")}
    out = {k: [np.zeros(dim)] for k in sums}
    p_cur, h_cur = poisson(lo, lo, traj.x_at(lo))
    for i in range(lo, hi):
        beta = traj.beta_at(i)
        y, y_next = traj.y_at(i), traj.y_at(i + 1)
        x, x_next = traj.x_at(i), traj.x_at(i + 1)
        _, h_cross = poisson(i, i + 1, x)  # control advanced, iterate held
        p_next, h_next = poisson(i + 1, i + 1, x_next)

        h = h_cur.h
        m_prime = h[y_next] - p_cur[y] @ h
        terms = {
            "martingale": traj.noise_at(i) + m_prime,
            "t1": h[y] - h_next.h[y_next],
            "t2": h_next.h[y_next] - h_cross.h[y_next],
            "t3": h_cross.h[y_next] - h[y_next],
        }
        for k, term in terms.items():
            sums[k] = (1.0 - beta) * sums[k] + beta * term
            out[k].append(sums[k].copy())
        p_cur, h_cur = p_next, h_next

    xs = np.array([traj.x_at(n) for n in range(lo, hi + 1)])
    lhs = xs - avg.z
    parts = {k: np.array(v) for k, v in out.items()}
    total = parts["martingale"] + parts["t1"] + parts["t2"] + parts["t3"]
    return NoiseDecomposition(
        n=avg.n,
        lhs=lhs,
        martingale=parts["martingale"],
        t1=parts["t1"],
        t2=parts["t2"],
        t3=parts["t3"],
        residual=np.max(np.abs(lhs - total), axis=1),
    )
