"""Small synthetic systems with known stationary behaviour, used to exercise the engine."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from ..markov.chains import Kernel
from ..policies.softmax import ControlValue
from .base import BaseSystem, Schedule


@dataclass(eq=False)
class ConstantSystem(BaseSystem):
    """One noise state, F(x) = c, no martingale noise."""

    target: np.ndarray
    stepsize: Schedule = field(default_factory=lambda: Schedule.stepsize(1.0, 0.0, 2))
    x0: np.ndarray | None = None

    def __post_init__(self) -> None:
        self.target = np.atleast_1d(np.asarray(self.target, dtype=float))

    @property
    def noise_states(self) -> int:
        return 1

    @property
    def dim(self) -> int:
        return self.target.size

    def initial(self) -> tuple[np.ndarray, int]:
        x0 = np.zeros(self.dim) if self.x0 is None else np.asarray(self.x0, dtype=float)
        return x0, 0

    def kernel_at(self, ctrl: ControlValue, x: np.ndarray) -> Kernel:
        return Kernel(np.ones((1, 1)))

    def update_map(self, x: np.ndarray, y: int) -> np.ndarray:
        return self.target.copy()


@dataclass(eq=False)
class IidSystem(BaseSystem):
    """Every kernel row equals `probs`; F(x, y) = rho * x + theta[y]."""

    probs: np.ndarray
    theta: np.ndarray
    rho: float = 0.0
    noise_scale: float = 0.0
    stepsize: Schedule = field(default_factory=lambda: Schedule.stepsize(1.0, 0.0, 2))

    def __post_init__(self) -> None:
        self.probs = np.asarray(self.probs, dtype=float)
        self.theta = np.asarray(self.theta, dtype=float).reshape(self.probs.size, -1)
        self._kernel = Kernel(np.tile(self.probs, (self.probs.size, 1)))

    @property
    def noise_states(self) -> int:
        return self.probs.size

    @property
    def dim(self) -> int:
        return self.theta.shape[1]

    def initial(self) -> tuple[np.ndarray, int]:
        return np.zeros(self.dim), 0

    def kernel_at(self, ctrl: ControlValue, x: np.ndarray) -> Kernel:
        return self._kernel

    def update_map(self, x: np.ndarray, y: int) -> np.ndarray:
        return self.rho * x + self.theta[y]

    def martingale_sample(self, x: np.ndarray, y: int, y_next: int, rng: np.random.Generator) -> np.ndarray:
        if self.noise_scale == 0.0:
            return np.zeros(self.dim)
        return self.noise_scale * rng.standard_normal(self.dim)


@dataclass(eq=False)
class TwoStateSystem(BaseSystem):
    """Scalar iterate driven by a symmetric two-state chain.

    The flip probability is the control's epsilon, scaled by
    1 + sensitivity * tanh(x) so the kernel also depends on the iterate.
    """

    targets: tuple[float, float] = (0.0, 1.0)
    flip: Schedule = field(default_factory=lambda: Schedule.constant(0.3))
    sensitivity: float = 0.0
    rho: float = 0.0
    noise_scale: float = 0.0
    stepsize: Schedule = field(default_factory=lambda: Schedule.stepsize(1.0, 0.0, 2))
    x0: float = 0.0

    @property
    def noise_states(self) -> int:
        return 2

    @property
    def dim(self) -> int:
        return 1

    def initial(self) -> tuple[np.ndarray, int]:
        return np.array([self.x0]), 0

    def control(self, n: int) -> ControlValue:
        return ControlValue(epsilon=min(1.0, self.flip(n)), lam=1.0)

    def kernel_at(self, ctrl: ControlValue, x: np.ndarray) -> Kernel:
        q = float(np.clip(ctrl.epsilon * (1.0 + self.sensitivity * np.tanh(x[0])), 0.01, 0.99))
        return Kernel(np.array([[1.0 - q, q], [q, 1.0 - q]]))

    def update_map(self, x: np.ndarray, y: int) -> np.ndarray:
        return self.rho * x + (1.0 - self.rho) * self.targets[y]

    def martingale_sample(self, x: np.ndarray, y: int, y_next: int, rng: np.random.Generator) -> np.ndarray:
        if self.noise_scale == 0.0:
            return np.zeros(1)
        return self.noise_scale * rng.standard_normal(1)
