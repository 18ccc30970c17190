from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Protocol, runtime_checkable

import numpy as np

from ..errors import LogDomain, ValidationError
from ..markov.chains import Kernel
from ..policies.softmax import ControlValue
from ..rng import Streams, sample_index


ScheduleKind = Literal["power", "inverseLog", "constant"]


@dataclass(frozen=True)
class Schedule:
    """scale/(n+n0)^exponent, 1/(scale*ln(n+n0)), or the constant `scale`.

    A zero scale is accepted: it gives the frozen stepsize and the zero
    exploration weight.
    """

    kind: ScheduleKind = "power"
    scale: float = 1.0
    exponent: float = 1.0
    n0: int = 1

    def __post_init__(self) -> None:
        if self.kind not in ("power", "inverseLog", "constant"):
            raise ValidationError(f"unknown schedule kind {self.kind!r}")
        if not (self.scale >= 0.0 and math.isfinite(self.scale)):
            raise ValidationError(f"schedule scale must be finite and >= 0, got {self.scale!r}")
        if not (0.0 <= self.exponent <= 1.0):
            raise ValidationError(f"schedule exponent {self.exponent!r} outside [0, 1]")
        if self.n0 < 1:
            raise ValidationError(f"n0 must be a positive integer, got {self.n0!r}")

    @classmethod
    def stepsize(cls, beta: float, a: float, n0: int) -> "Schedule":
        return cls("power", beta, 1.0 - a, n0)

    @classmethod
    def inverse_log(cls, b: float, n0: int) -> "Schedule":
        return cls("inverseLog", b, 0.0, n0)

    @classmethod
    def power(cls, scale: float, exponent: float, n0: int) -> "Schedule":
        return cls("power", scale, exponent, n0)

    @classmethod
    def constant(cls, level: float) -> "Schedule":
        return cls("constant", level, 0.0, 1)

    def __call__(self, n: int) -> float:
        return eval_schedule(self, n)


def eval_schedule(s: Schedule, n: int) -> float:
    if n < 0:
        raise ValidationError("n must be >= 0")
    if s.kind == "constant":
        return s.scale
    m = n + s.n0
    if s.kind == "power":
        return s.scale / m**s.exponent
    if m < 2:
        raise LogDomain(f"inverse-log schedule needs n + n0 >= 2, got {m}", n=n, n0=s.n0)
    if s.scale == 0.0:
        return math.inf
    return 1.0 / (s.scale * math.log(m))


@runtime_checkable
class SaSystem(Protocol):
    """x_{n+1} = x_n + beta_n (F(x_n, y_n) - x_n + M_{n+1}) with y driven by a controlled chain."""

    stepsize: Schedule

    @property
    def noise_states(self) -> int:
        ...

    @property
    def dim(self) -> int:
        ...

    def initial(self) -> tuple[np.ndarray, int]:
        ...

    def control(self, n: int) -> ControlValue:
        ...

    def kernel_at(self, ctrl: ControlValue, x: np.ndarray) -> Kernel:
        ...

    def update_map(self, x: np.ndarray, y: int) -> np.ndarray:
        ...

    def martingale_sample(self, x: np.ndarray, y: int, y_next: int, rng: np.random.Generator) -> np.ndarray:
        ...

    def sample_next(self, ctrl: ControlValue, x: np.ndarray, y: int, streams: Streams) -> int:
        ...

    def escape_margin(self, x: np.ndarray) -> float:
        ...

    def project(self, x: np.ndarray) -> np.ndarray:
        ...


class BaseSystem:
    """Defaults shared by concrete systems: kernel-row sampling and an unbounded range."""

    stepsize: Schedule

    @property
    def noise_states(self) -> int:
        raise NotImplementedError

    @property
    def dim(self) -> int:
        raise NotImplementedError

    def control(self, n: int) -> ControlValue:
        return ControlValue()

    def sample_next(self, ctrl: ControlValue, x: np.ndarray, y: int, streams: Streams) -> int:
        return sample_index(streams.transition, self.kernel_at(ctrl, x).rows[y])

    def martingale_sample(self, x: np.ndarray, y: int, y_next: int, rng: np.random.Generator) -> np.ndarray:
        return np.zeros(self.dim)

    def escape_margin(self, x: np.ndarray) -> float:
        return 0.0

    def project(self, x: np.ndarray) -> np.ndarray:
        return x

    def f_table(self, x: np.ndarray) -> np.ndarray:
        """F(x, y) for every noise state, shape (noise_states, dim)."""
        return np.vstack([self.update_map(x, y) for y in range(self.noise_states)])

    def kernel_at(self, ctrl: ControlValue, x: np.ndarray) -> Kernel:
        raise NotImplementedError

    def update_map(self, x: np.ndarray, y: int) -> np.ndarray:
        raise NotImplementedError
