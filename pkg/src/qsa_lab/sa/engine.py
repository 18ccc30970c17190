from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Iterable, Iterator, Mapping, Optional

import numpy as np

from ..errors import IterateEscaped, ValidationError
from ..rng import Streams, spawn_streams
from .base import SaSystem, eval_schedule


ESCAPE_TOL = 1e-9
SNAPSHOT_RATIO = 1.2
TRAJECTORY_COLUMNS = ("n", "err_inf", "beta_n", "epsilon_n", "lambda_n", "y_n")


def geometric_grid(limit: int, ratio: float = SNAPSHOT_RATIO, start: int = 0) -> tuple[int, ...]:
    """Sorted {start, floor(ratio^k), limit} restricted to [start, limit]."""
    if ratio <= 1.0:
        raise ValidationError("ratio must exceed 1")
    points = {start, limit}
    k, v = 0, 1.0
    while v <= limit:
        if v >= start:
            points.add(int(v))
        k += 1
        v = ratio**k
    return tuple(sorted(p for p in points if start <= p <= limit))


@dataclass(frozen=True)
class RecordingOptions:
    checkpoints: Optional[tuple[int, ...]] = None  # None: geometric grid over the run
    window: Optional[tuple[int, int]] = None  # inclusive [lo, hi] of full-resolution iterates


@dataclass(eq=False)
class SaTrajectory:
    seed: Optional[int]
    start: int
    steps: int
    y: np.ndarray  # y_n for n in [start, start+steps]
    beta: np.ndarray  # beta_n for n in [start, start+steps)
    epsilon: np.ndarray
    lam: np.ndarray
    checkpoints: np.ndarray
    snapshots: np.ndarray  # x at each checkpoint
    window: Optional[tuple[int, int]] = None
    window_iterates: Optional[np.ndarray] = None  # x_n for n in window
    window_noise: Optional[np.ndarray] = None  # M_{n+1} for n in [lo, hi)
    final_x: np.ndarray = field(default_factory=lambda: np.zeros(0))
    final_y: int = 0
    rng_state: dict[str, Any] = field(default_factory=dict)

    @property
    def end(self) -> int:
        return self.start + self.steps

    def y_at(self, n: int) -> int:
        return int(self.y[n - self.start])

    def beta_at(self, n: int) -> float:
        return float(self.beta[n - self.start])

    def x_at(self, n: int) -> np.ndarray:
        if self.window is not None and self.window[0] <= n <= self.window[1]:
            return self.window_iterates[n - self.window[0]]
        hit = np.flatnonzero(self.checkpoints == n)
        if hit.size:
            return self.snapshots[hit[0]]
        raise KeyError(f"iterate x_{n} was not recorded")

    def noise_at(self, n: int) -> np.ndarray:
        """M_{n+1}."""
        if self.window is None or not (self.window[0] <= n < self.window[1]):
            raise KeyError(f"noise M_{n + 1} was not recorded")
        return self.window_noise[n - self.window[0]]

    def trajectory_rows(
        self, at: Optional[Iterable[int]] = None, err_inf: Optional[Mapping[int, float]] = None
    ) -> Iterator[dict[str, Any]]:
        """Rows of TRAJECTORY_COLUMNS for n in `at` (default every step in [start, end)).

        err_inf is left blank unless the caller supplies it.
        """
        errs = err_inf or {}
        ns = range(self.start, self.end) if at is None else at
        for n in ns:
            if not (self.start <= n < self.end):
                continue
            i = n - self.start
            yield {
                "n": int(n),
                "err_inf": errs.get(int(n), ""),
                "beta_n": float(self.beta[i]),
                "epsilon_n": float(self.epsilon[i]),
                "lambda_n": float(self.lam[i]),
                "y_n": int(self.y[i]),
            }


def run_sa(
    system: SaSystem,
    steps: int,
    seed: Optional[int] = None,
    recording: RecordingOptions = RecordingOptions(),
    *,
    start: int = 0,
    x0: Optional[np.ndarray] = None,
    y0: Optional[int] = None,
    streams: Optional[Streams] = None,
) -> SaTrajectory:
    """Iterate the system from (x0, y0) at index `start` for `steps` steps.

    Either `seed` or an explicit `streams` (for resuming) must be given.
    """
    if steps < 1:
        raise ValidationError("steps must be >= 1")
    if streams is None:
        if seed is None:
            raise ValidationError("run_sa needs a seed or explicit streams")
        streams = spawn_streams(seed)
    if x0 is None or y0 is None:
        init_x, init_y = system.initial()
        x0 = init_x if x0 is None else x0
        y0 = init_y if y0 is None else y0

    end = start + steps
    grid = recording.checkpoints if recording.checkpoints is not None else geometric_grid(end, start=start)
    grid = tuple(n for n in grid if start <= n <= end)
    marks = set(grid)
    lo, hi = recording.window if recording.window is not None else (end + 1, end + 1)
    lo, hi = max(lo, start), min(hi, end)

    ys = np.empty(steps + 1, dtype=np.int64)
    betas = np.empty(steps)
    eps = np.empty(steps)
    lams = np.empty(steps)
    snaps: list[np.ndarray] = []
    win_x: list[np.ndarray] = []
    win_m: list[np.ndarray] = []

    x = np.array(x0, dtype=float)
    y = int(y0)
    ys[0] = y
    for n in range(start, end):
        if n in marks:
            snaps.append(x.copy())
        if lo <= n <= hi:
            win_x.append(x.copy())

        ctrl = system.control(n)
        beta = eval_schedule(system.stepsize, n)
        y_next = system.sample_next(ctrl, x, y, streams)
        m = system.martingale_sample(x, y, y_next, streams.noise)
        x_next = x + beta * (system.update_map(x, y) - x + m)
        margin = system.escape_margin(x_next)
        if margin > ESCAPE_TOL:
            raise IterateEscaped(n + 1, margin)

        if lo <= n < hi:
            win_m.append(m)
        i = n - start
        betas[i], eps[i], lams[i] = beta, ctrl.epsilon, ctrl.lam
        x, y = system.project(x_next), y_next
        ys[i + 1] = y

    if end in marks:
        snaps.append(x.copy())
    if lo <= end <= hi:
        win_x.append(x.copy())

    window = (lo, hi) if lo <= hi else None
    return SaTrajectory(
        seed=seed,
        start=start,
        steps=steps,
        y=ys,
        beta=betas,
        epsilon=eps,
        lam=lams,
        checkpoints=np.array(grid, dtype=np.int64),
        snapshots=np.array(snaps).reshape(len(snaps), -1),
        window=window,
        window_iterates=np.array(win_x) if window else None,
        window_noise=np.array(win_m).reshape(len(win_m), -1) if window else None,
        final_x=x,
        final_y=y,
        rng_state=streams.state(),
    )
