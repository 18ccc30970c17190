from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from ..markov.chains import Kernel
from ..mdp.model import Mdp
from ..policies.kernels import induced_kernel, pair_index
from ..policies.softmax import ControlValue, behaviour_row, policy_matrix
from ..rng import Streams, draw_from_cdf, sample_index, spawn_streams
from ..sa.base import BaseSystem, Schedule
from ..sa.engine import RecordingOptions, SaTrajectory, run_sa
from .update import f_map, f_table, martingale_noise


@dataclass(frozen=True)
class Schedules:
    stepsize: Schedule
    temperature: Schedule
    epsilon: Optional[Schedule] = None  # None: pure softmax exploration

    def control(self, n: int) -> ControlValue:
        lam = self.temperature(n)
        eps = 0.0 if self.epsilon is None else min(1.0, self.epsilon(n))
        return ControlValue(epsilon=eps, lam=lam)


@dataclass(eq=False)
class QLearningSystem(BaseSystem):
    """Q-learning as SA: x = Q flattened, y = s*|A| + a, kernel induced by the behaviour policy."""

    mdp: Mdp
    schedules: Schedules
    q0: np.ndarray
    initial_state: int = 0

    def __post_init__(self) -> None:
        self.stepsize = self.schedules.stepsize
        self._cdf = np.cumsum(self.mdp.transitions, axis=2)

    @property
    def noise_states(self) -> int:
        return self.mdp.num_states * self.mdp.num_actions

    @property
    def dim(self) -> int:
        return self.noise_states

    def _q(self, x: np.ndarray) -> np.ndarray:
        return x.reshape(self.mdp.num_states, self.mdp.num_actions)

    def initial(self) -> tuple[np.ndarray, int]:
        return np.asarray(self.q0, dtype=float).reshape(-1), pair_index(self.initial_state, 0, self.mdp.num_actions)

    def control(self, n: int) -> ControlValue:
        return self.schedules.control(n)

    def kernel_at(self, ctrl: ControlValue, x: np.ndarray) -> Kernel:
        return induced_kernel(self.mdp, policy_matrix(self._q(x), ctrl))

    def update_map(self, x: np.ndarray, y: int) -> np.ndarray:
        return f_map(self._q(x), divmod(y, self.mdp.num_actions), self.mdp).reshape(-1)

    def f_table(self, x: np.ndarray) -> np.ndarray:
        return f_table(self._q(x), self.mdp)

    def martingale_sample(self, x: np.ndarray, y: int, y_next: int, rng: np.random.Generator) -> np.ndarray:
        s, a = divmod(y, self.mdp.num_actions)
        return martingale_noise(self._q(x), s, a, y_next // self.mdp.num_actions, self.mdp).reshape(-1)

    def sample_next(self, ctrl: ControlValue, x: np.ndarray, y: int, streams: Streams) -> int:
        # state from the transition stream, then action from the action stream under (ctrl_n, Q_n)
        s, a = divmod(y, self.mdp.num_actions)
        s_next = draw_from_cdf(streams.transition, self._cdf[s, a])
        a_next = sample_index(streams.action, behaviour_row(self._q(x)[s_next], ctrl))
        return pair_index(s_next, a_next, self.mdp.num_actions)

    def escape_margin(self, x: np.ndarray) -> float:
        return float(max(0.0, -x.min(), x.max() - self.mdp.vmax))

    def project(self, x: np.ndarray) -> np.ndarray:
        return np.clip(x, 0.0, self.mdp.vmax)


def initial_action(streams: Streams, q0: np.ndarray, state: int, ctrl: ControlValue) -> int:
    return sample_index(streams.action, behaviour_row(np.asarray(q0)[state], ctrl))


def embedded_trajectory(
    system: QLearningSystem, steps: int, seed: int, recording: RecordingOptions = RecordingOptions()
) -> SaTrajectory:
    """Run the SA form of Q-learning with the same stream discipline as the direct loop."""
    streams = spawn_streams(seed)
    x0, _ = system.initial()
    a0 = initial_action(streams, system.q0, system.initial_state, system.control(0))
    y0 = pair_index(system.initial_state, a0, system.mdp.num_actions)
    traj = run_sa(system, steps, recording=recording, x0=x0, y0=y0, streams=streams)
    traj.seed = seed
    return traj
