from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np

from ..config import QlearnConfig
from ..errors import GridMismatch, HorizonOverflow, ValidationError
from ..mdp.model import Mdp
from ..mdp.solve import SolveResult, policy_value, solve_optimal
from ..policies.softmax import policy_matrix
from ..qlearn.runner import CheckpointSnapshot, RunResult, resume
from ..rng import spawn_streams
from ..sa.engine import geometric_grid


REGRET_RATIO = 1.3
DEFAULT_ROLLOUTS = 64
INTERPOLATION = "left-constant"

Method = Literal["frozen", "mc", "both"]


def regret_grid(limit: int, ratio: float = REGRET_RATIO) -> tuple[int, ...]:
    return geometric_grid(limit, ratio)


def default_tol(mdp: Mdp) -> float:
    return 1e-4 * mdp.vmax


def rollout_horizon(mdp: Mdp, tol: float, limit: int = 100_000) -> int:
    """Smallest H with gamma^H Rmax <= tol.

    The estimate is scaled by (1-gamma), so this bounds its truncation bias by tol.
    """
    if tol <= 0:
        raise ValidationError(f"tol must be positive, got {tol!r}")
    if tol >= mdp.rmax:
        return 1
    h = max(1, math.ceil(math.log(tol / mdp.rmax) / math.log(mdp.gamma)))
    if h > limit:
        raise HorizonOverflow(h, limit)
    return h


def frozen_policy_regret_term(mdp: Mdp, snap: CheckpointSnapshot, solved: Optional[SolveResult] = None) -> float:
    """(1-gamma)(V*(s_n) - V^pi(s_n)) with pi the behaviour policy frozen at the snapshot."""
    solved = solved or solve_optimal(mdp)
    v_pi = policy_value(mdp, policy_matrix(snap.q.values, snap.ctrl))
    return float((1.0 - mdp.gamma) * (solved.v_star[snap.state] - v_pi[snap.state]))


@dataclass(frozen=True)
class McTerm:
    estimate: float
    stderr: float
    horizon: int
    rollouts: int


def _rollout(mdp: Mdp, cfg: QlearnConfig, snap: CheckpointSnapshot, horizon: int, seq: np.random.SeedSequence) -> float:
    """Discounted reward of one continuation of the algorithm; a_n is drawn afresh."""
    ret = 0.0

    def collect(n: int, r: float) -> None:
        nonlocal ret
        ret += mdp.gamma ** (n - snap.n) * r

    resume(mdp, cfg, snap, horizon, grid=(), streams=spawn_streams(seq), redraw_action=True, on_reward=collect)
    return ret


def mc_continuation_regret(
    mdp: Mdp,
    cfg: QlearnConfig,
    snap: CheckpointSnapshot,
    rollouts: int = DEFAULT_ROLLOUTS,
    tol: Optional[float] = None,
    seed: int = 0,
    horizon_limit: int = 100_000,
    solved: Optional[SolveResult] = None,
) -> McTerm:
    """Monte Carlo estimate of (1-gamma)(V*(s_n) - E[sum_m gamma^{m-n} r_m | snapshot]).

    Each rollout continues the adaptive algorithm from the snapshot on its own streams.
    """
    if rollouts < 2:
        raise ValidationError(f"need at least 2 rollouts, got {rollouts}")
    horizon = rollout_horizon(mdp, default_tol(mdp) if tol is None else tol, horizon_limit)
    solved = solved or solve_optimal(mdp)
    children = np.random.SeedSequence([seed, snap.n]).spawn(rollouts)
    returns = np.array([_rollout(mdp, cfg, snap, horizon, c) for c in children])
    scale = 1.0 - mdp.gamma
    estimate = scale * (solved.v_star[snap.state] - returns.mean())
    stderr = scale * returns.std(ddof=1) / math.sqrt(rollouts)
    return McTerm(float(estimate), float(stderr), horizon, rollouts)


@dataclass(eq=False)
class RegretEstimate:
    n: np.ndarray
    frozen: Optional[np.ndarray]
    mc: Optional[np.ndarray]
    mc_stderr: Optional[np.ndarray]
    cumulative_frozen: Optional[np.ndarray]
    cumulative_mc: Optional[np.ndarray]
    method: str
    interpolation: str = INTERPOLATION

    def rows(self, theoretical_exponent: float = math.nan) -> list[dict[str, float]]:
        out = []
        for i, n in enumerate(self.n):
            out.append(
                {
                    "N": int(n),
                    "regret_frozen": _pick(self.cumulative_frozen, i),
                    "regret_mc": _pick(self.cumulative_mc, i),
                    "mc_stderr": _pick(self.mc_stderr, i),
                    "theoretical_exponent": theoretical_exponent,
                }
            )
        return out


def _pick(arr: Optional[np.ndarray], i: int) -> float:
    return math.nan if arr is None else float(arr[i])


def accumulate(n: np.ndarray, terms: np.ndarray) -> np.ndarray:
    """R_N = sum_{m=1}^{N} reg(m) at each grid point, reg held at its left checkpoint value."""
    out = np.zeros(len(n))
    total = 0.0
    for j in range(len(n)):
        if j > 0:
            total += terms[j - 1] * (n[j] - max(n[j - 1], 1))
        out[j] = total + (terms[j] if n[j] >= 1 else 0.0)
    return out


def cumulative_regret(
    mdp: Mdp,
    run: RunResult,
    cfg: QlearnConfig,
    method: Method = "frozen",
    grid: Optional[tuple[int, ...]] = None,
    rollouts: int = DEFAULT_ROLLOUTS,
    tol: Optional[float] = None,
    horizon_limit: int = 100_000,
) -> RegretEstimate:
    grid = grid if grid is not None else tuple(int(n) for n in run.grid)
    recorded = set(int(n) for n in run.grid)
    missing = [n for n in grid if n not in recorded]
    if missing:
        raise GridMismatch(f"no snapshot at n={missing[0]}", missing=missing[:10])

    solved = solve_optimal(mdp)
    n = np.array(grid, dtype=np.int64)
    snaps = [run.snapshot_at(int(k)) for k in grid]
    frozen = mc = stderr = None
    if method in ("frozen", "both"):
        frozen = np.array([frozen_policy_regret_term(mdp, s, solved) for s in snaps])
    if method in ("mc", "both"):
        terms = [mc_continuation_regret(mdp, cfg, s, rollouts, tol, run.seed, horizon_limit, solved) for s in snaps]
        mc = np.array([t.estimate for t in terms])
        stderr = np.array([t.stderr for t in terms])
    return RegretEstimate(
        n=n,
        frozen=frozen,
        mc=mc,
        mc_stderr=stderr,
        cumulative_frozen=None if frozen is None else accumulate(n, frozen),
        cumulative_mc=None if mc is None else accumulate(n, mc),
        method=method,
    )
