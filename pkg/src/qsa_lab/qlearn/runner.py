from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Callable, Optional

import numpy as np

from ..config import QlearnConfig
from ..errors import ConditionViolated, DimensionMismatch, GapRequired, IterateEscaped, ValidationError
from ..mdp.model import Mdp, QTable
from ..policies.kernels import mu_min_s, pair_index
from ..policies.softmax import ControlValue, behaviour_row
from ..rng import Streams, draw_from_cdf, sample_index, spawn_streams
from ..sa.base import Schedule
from ..sa.bounds import BoundSpec, convergence_rate, identify_bound_spec
from ..sa.conditions import ConditionExtras, ConditionReport, check_conditions
from ..sa.engine import ESCAPE_TOL, SNAPSHOT_RATIO, SaTrajectory, geometric_grid
from ..tui import log, warn
from .system import QLearningSystem, Schedules, initial_action


@dataclass(frozen=True, eq=False)
class CheckpointSnapshot:
    """Everything needed to continue a run from step n exactly."""

    n: int
    q: QTable
    state: int
    action: int  # a_n, already drawn
    ctrl: ControlValue
    schedule_cursor: int
    rng_state: dict[str, Any]
    cumulative_reward: float = 0.0


@dataclass(eq=False)
class RunResult:
    algo: str
    seed: int
    trajectory: SaTrajectory
    checkpoints: list[CheckpointSnapshot]
    config: dict[str, Any] = field(default_factory=dict)

    @property
    def grid(self) -> np.ndarray:
        return np.array([c.n for c in self.checkpoints], dtype=np.int64)

    def snapshot_at(self, n: int) -> CheckpointSnapshot:
        for c in self.checkpoints:
            if c.n == n:
                return c
        raise KeyError(n)


# --- schedules -------------------------------------------------------------


def auto_beta(mdp: Mdp, cfg: QlearnConfig) -> float:
    """Smallest stepsize scale the hyperparameter conditions accept at zero exponents and above."""
    mu = mu_min_s(mdp)
    n_act, g = mdp.num_actions, mdp.gamma
    if cfg.algo == "boltzmann":
        return 2.0 * n_act / ((1.0 - g) * mu)
    a, d, e = cfg.a, cfg.d, cfg.e
    worst = max(1 - (3 * a + 4 * d + 2 * e), 2 - (4 * a + 6 * d + 4 * e), 2 - (2 * a + 6 * d + 4 * e))
    return max(n_act / (2.0 * (1.0 - g) * mu) * worst, 2.0 * (1.0 - 2.0 * d))


def temperature_coefficient(mdp: Mdp, cfg: QlearnConfig) -> float:
    """b, either given or chosen so that b Rmax/(1-gamma) = kappa1."""
    return cfg.b if cfg.b is not None else cfg.kappa1 * (1.0 - mdp.gamma) / mdp.rmax


def resolve_schedules(mdp: Mdp, cfg: QlearnConfig) -> Schedules:
    beta = cfg.beta if cfg.beta is not None else auto_beta(mdp, cfg)
    stepsize = cfg.stepsize.to_schedule() if cfg.stepsize else Schedule.stepsize(beta, cfg.a, cfg.n0)
    if cfg.algo == "boltzmann":
        temperature = (
            cfg.temperature.to_schedule() if cfg.temperature else Schedule.inverse_log(temperature_coefficient(mdp, cfg), cfg.n0)
        )
        return Schedules(stepsize, temperature)
    temperature = cfg.temperature.to_schedule() if cfg.temperature else Schedule.power(1.0, cfg.e, cfg.n0)
    epsilon = cfg.epsilon.to_schedule() if cfg.epsilon else Schedule.power(cfg.epsilon_scale, cfg.d, cfg.n0)
    return Schedules(stepsize, temperature, epsilon)


def initial_q(mdp: Mdp, cfg: QlearnConfig) -> QTable:
    if cfg.q0 is None:
        return QTable.zeros(mdp)
    q0 = QTable.of(np.asarray(cfg.q0, dtype=float), mdp)
    if not q0.in_range():
        raise ValidationError(f"q0 must lie in [0, {mdp.vmax}]")
    return q0


def build_system(mdp: Mdp, cfg: QlearnConfig) -> QLearningSystem:
    if not (0 <= cfg.initial_state < mdp.num_states):
        raise DimensionMismatch(f"initial state {cfg.initial_state} outside [0, {mdp.num_states})")
    return QLearningSystem(mdp, resolve_schedules(mdp, cfg), initial_q(mdp, cfg).values, cfg.initial_state)


# --- conditions ------------------------------------------------------------


def bound_spec_for(mdp: Mdp, cfg: QlearnConfig, overrides: Optional[dict[str, float]] = None, delta: float = 0.01) -> BoundSpec:
    sched = resolve_schedules(mdp, cfg)
    return identify_bound_spec(
        mdp,
        cfg.algo,
        beta=sched.stepsize.scale,
        a=cfg.a,
        n0=cfg.n0,
        b=temperature_coefficient(mdp, cfg),
        d=cfg.d,
        e=cfg.e,
        delta=delta,
        overrides=overrides,
    )


def condition_extras(mdp: Mdp, cfg: QlearnConfig, gap: Optional[float] = None, q_l1_min: Optional[float] = None) -> ConditionExtras:
    return ConditionExtras(
        b=temperature_coefficient(mdp, cfg),
        d=cfg.d,
        e=cfg.e,
        gap=gap,
        rmax=mdp.rmax,
        gamma=mdp.gamma,
        mu_min_s=mu_min_s(mdp),
        num_actions=mdp.num_actions,
        q_l1_min=q_l1_min,
    )


def enforce_conditions(
    mdp: Mdp,
    cfg: QlearnConfig,
    strict: bool,
    purpose: str = "concentration",
    overrides: Optional[dict[str, float]] = None,
    gap: Optional[float] = None,
) -> ConditionReport:
    """Warn about (or, when strict, refuse) hyperparameters the convergence conditions reject."""
    spec = bound_spec_for(mdp, cfg, overrides)
    report = check_conditions(spec, cfg.algo, condition_extras(mdp, cfg, gap=gap), purpose=purpose)  # type: ignore[arg-type]
    if report.failing:
        if strict:
            raise ConditionViolated(report.failing)
        for cid in report.failing:
            r = report.by_id(cid)
            warn(f"condition {cid} fails (lhs={r.lhs:.6g}, rhs={r.rhs:.6g})")
    return report


# --- the online loop --------------------------------------------------------


def _loop(
    mdp: Mdp,
    cfg: QlearnConfig,
    system: QLearningSystem,
    steps: int,
    grid: tuple[int, ...],
    seed: int,
    resume_from: Optional[CheckpointSnapshot] = None,
    streams: Optional[Streams] = None,
    redraw_action: bool = False,
    on_reward: Optional[Callable[[int, float], None]] = None,
) -> RunResult:
    """The online loop shared by fresh runs, resumes and regret rollouts.

    `streams` replaces the snapshot's saved streams; `redraw_action` samples a_n again from them.
    """
    S, A, gamma, vmax = mdp.num_states, mdp.num_actions, mdp.gamma, mdp.vmax
    sched = system.schedules
    cdf = np.cumsum(mdp.transitions, axis=2)
    rewards = mdp.rewards

    if resume_from is None:
        streams = spawn_streams(seed)
        q = np.array(system.q0, dtype=float)
        s = system.initial_state
        a = initial_action(streams, q, s, sched.control(0))
        start, cum = 0, 0.0
    else:
        if streams is None:
            streams = Streams.from_state(resume_from.rng_state)
        q = np.array(resume_from.q.values, dtype=float)
        s, a = resume_from.state, resume_from.action
        start, cum = resume_from.n, resume_from.cumulative_reward
        if redraw_action:
            a = initial_action(streams, q, s, sched.control(start))

    end = start + steps
    marks = {n for n in grid if start <= n <= end}
    ys = np.empty(steps + 1, dtype=np.int64)
    betas, eps, lams = np.empty(steps), np.empty(steps), np.empty(steps)
    snaps: list[CheckpointSnapshot] = []
    ys[0] = pair_index(s, a, A)

    def snap(n: int, ctrl: ControlValue) -> CheckpointSnapshot:
        return CheckpointSnapshot(
            n=n,
            q=QTable.of(q, mdp),
            state=s,
            action=a,
            ctrl=ctrl,
            schedule_cursor=n,
            rng_state=streams.state(),
            cumulative_reward=cum,
        )

    for n in range(start, end):
        ctrl = sched.control(n)
        if n in marks:
            snaps.append(snap(n, ctrl))
        beta = sched.stepsize(n)
        r = rewards[s, a]
        s_next = draw_from_cdf(streams.transition, cdf[s, a])
        a_next = sample_index(streams.action, behaviour_row(q[s_next], ctrl))
        value = q[s, a] + beta * (r + gamma * q[s_next].max() - q[s, a])
        if value < -ESCAPE_TOL or value > vmax + ESCAPE_TOL:
            raise IterateEscaped(n + 1, float(value))
        q[s, a] = min(max(value, 0.0), vmax)
        cum += r
        if on_reward is not None:
            on_reward(n, float(r))

        i = n - start
        betas[i], eps[i], lams[i] = beta, ctrl.epsilon, ctrl.lam
        s, a = s_next, a_next
        ys[i + 1] = pair_index(s, a, A)

    if end in marks:
        snaps.append(snap(end, sched.control(end)))

    trajectory = SaTrajectory(
        seed=seed,
        start=start,
        steps=steps,
        y=ys,
        beta=betas,
        epsilon=eps,
        lam=lams,
        checkpoints=np.array([c.n for c in snaps], dtype=np.int64),
        snapshots=np.array([c.q.values.reshape(-1) for c in snaps]).reshape(len(snaps), S * A),
        final_x=q.reshape(-1).copy(),
        final_y=pair_index(s, a, A),
        rng_state=streams.state(),
    )
    return RunResult(cfg.algo, seed, trajectory, snaps, config=cfg.model_dump(mode="json"))


def _run(
    mdp: Mdp,
    cfg: QlearnConfig,
    expected: str,
    grid: Optional[tuple[int, ...]],
    strict: bool,
    check: bool,
) -> RunResult:
    if cfg.algo != expected:
        raise ValidationError(f"config algo is {cfg.algo!r}, expected {expected!r}")
    if check:
        enforce_conditions(mdp, cfg, strict)
    system = build_system(mdp, cfg)
    beta0 = system.stepsize(0)
    if beta0 >= 1.0:
        warn(f"beta_0 = {beta0:.4g} >= 1; iterates may leave [0, Rmax/(1-gamma)]")
    grid = grid if grid is not None else geometric_grid(cfg.steps, SNAPSHOT_RATIO)
    return _loop(mdp, cfg, system, cfg.steps, grid, cfg.seed)


def run_boltzmann(
    mdp: Mdp,
    cfg: QlearnConfig,
    grid: Optional[tuple[int, ...]] = None,
    strict: bool = False,
    check: bool = True,
) -> RunResult:
    """Boltzmann Q-learning: a_n ~ softmax(Q_n(s_n, .) / lambda_n)."""
    return _run(mdp, cfg, "boltzmann", grid, strict, check)


def run_seg(
    mdp: Mdp,
    cfg: QlearnConfig,
    grid: Optional[tuple[int, ...]] = None,
    strict: bool = False,
    check: bool = True,
) -> RunResult:
    """Smoothed epsilon-greedy Q-learning: a_n ~ eps_n/|A| + (1 - eps_n) softmax(Q_n(s_n, .) / lambda_n)."""
    return _run(mdp, cfg, "seg", grid, strict, check)


def run_qlearning(mdp: Mdp, cfg: QlearnConfig, grid: Optional[tuple[int, ...]] = None, strict: bool = False, check: bool = True) -> RunResult:
    runner = run_boltzmann if cfg.algo == "boltzmann" else run_seg
    return runner(mdp, cfg, grid=grid, strict=strict, check=check)


def resume(
    mdp: Mdp,
    cfg: QlearnConfig,
    snapshot: CheckpointSnapshot,
    steps: int,
    grid: Optional[tuple[int, ...]] = None,
    *,
    streams: Optional[Streams] = None,
    redraw_action: bool = False,
    on_reward: Optional[Callable[[int, float], None]] = None,
) -> RunResult:
    """Continue from a checkpoint; the outcome matches the run that never paused.

    With fresh `streams` (and `redraw_action`) this is one independent continuation of the
    algorithm from the snapshot; `on_reward(n, r)` sees every reward collected.
    """
    system = build_system(mdp, cfg)
    grid = grid if grid is not None else (snapshot.n + steps,)
    return _loop(
        mdp,
        cfg,
        system,
        steps,
        grid,
        cfg.seed,
        resume_from=snapshot,
        streams=streams,
        redraw_action=redraw_action,
        on_reward=on_reward,
    )


def error_series(run: RunResult, q_star: QTable) -> tuple[np.ndarray, np.ndarray]:
    """(n, ||Q_n - Q*||_inf) at every checkpoint."""
    errs = []
    for c in run.checkpoints:
        if c.q.values.shape != q_star.values.shape:
            raise DimensionMismatch(f"Q shape {c.q.values.shape} != {q_star.values.shape}")
        errs.append(float(np.max(np.abs(c.q.values - q_star.values))))
    return run.grid, np.array(errs)


# --- tuning helpers ----------------------------------------------------------


@dataclass(frozen=True)
class BoltzmannTuning:
    a: float
    b: float
    regret_exponent: float


def boltzmann_optimal_exponent(gap: float, gamma: float, rmax: float) -> BoltzmannTuning:
    """Balance N^{0.5+4a} against N^{1 - b gap/2} with b = a(1-gamma)/Rmax."""
    if math.isinf(gap):
        raise GapRequired("every action is optimal; the temperature term vanishes and no balance exists")
    if gap <= 0:
        raise ValidationError(f"gap must be positive, got {gap!r}")
    a = 1.0 / (8.0 + (1.0 - gamma) * gap / rmax)
    b = a * (1.0 - gamma) / rmax
    return BoltzmannTuning(a=a, b=b, regret_exponent=max(0.5 + 4 * a, 1.0 - b * gap / 2.0))


def sample_complexity_exponent(spec: BoundSpec) -> float:
    """p such that ||Q_n - Q*|| <= eps needs n of order eps^-p (up to logs)."""
    rate = convergence_rate(spec).dominant
    return math.inf if rate >= 0 else -1.0 / rate


def describe(mdp: Mdp, cfg: QlearnConfig) -> None:
    sched = resolve_schedules(mdp, cfg)
    log(
        f"{cfg.algo}: beta={sched.stepsize.scale:.6g} a={cfg.a} n0={cfg.n0} steps={cfg.steps} "
        f"seed={cfg.seed} |S|={mdp.num_states} |A|={mdp.num_actions} gamma={mdp.gamma}"
    )
