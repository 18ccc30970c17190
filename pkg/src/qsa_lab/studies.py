from __future__ import annotations

import math
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Iterable, Optional, Protocol, Sequence

import numpy as np

from .config import ExperimentConfig, QlearnConfig, dump_config
from .errors import InstanceTooLarge, MissingParameter, NonPositiveValue, QsaLabError, SeedFailed, TooFewPoints, Unreachable
from .events import SeedDone, SeedError, SeedEvent
from .markov.diameter import mdp_diameter
from .mdp.model import Mdp, mdp_to_dict, validate_mdp
from .mdp.solve import SolveResult, solve_optimal
from .policies.softmax import sensitivity_grid
from .qlearn.runner import (
    RunResult,
    bound_spec_for,
    build_system,
    condition_extras,
    enforce_conditions,
    error_series,
    run_qlearning,
    sample_complexity_exponent,
    temperature_coefficient,
)
from .qlearn.system import embedded_trajectory
from .regret import cumulative_regret, fit_power_law, frozen_trend, regret_grid, theoretical_regret_exponent
from .sa.bounds import convergence_rate
from .sa.conditions import ConditionReport, check_conditions, check_n0
from .sa.diagnostics import noise_decomposition
from .sa.engine import TRAJECTORY_COLUMNS, RecordingOptions, geometric_grid
from .sinks import Bundle, npz_bytes
from .tui import log


QUANTILES = (0.1, 0.5, 0.9)
CONVERGED_FRACTION_OF_VMAX = 0.2


class StudyView(Protocol):
    def update(self, **kwargs) -> None:
        ...

    def on_seed_event(self, event: SeedEvent) -> None:
        ...


@dataclass
class StudyOutput:
    bundle: Bundle
    verdict: dict[str, Any] = field(default_factory=dict)

    def verdict_line(self) -> str:
        return " ".join(f"{k}={_fmt(v)}" for k, v in self.verdict.items())

    def seal(self, cfg: Optional[ExperimentConfig] = None) -> "StudyOutput":
        """Add config.json and verdict.txt to the bundle."""
        if cfg is not None:
            self.bundle.add("config.json", dump_config(cfg))
        self.bundle.add("verdict.txt", self.verdict_line() + "\n")
        return self


def _fmt(v: Any) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        v = float(v)
        return "nan" if math.isnan(v) else f"{v:.6g}"
    return str(v).replace(" ", "_")


# --- seed fan-out ------------------------------------------------------------


@dataclass(frozen=True)
class SeedTask:
    kind: str
    mdp: dict[str, Any]
    qlearn: dict[str, Any]
    seed: int
    grid: tuple[int, ...]
    options: dict[str, Any] = field(default_factory=dict)


@dataclass
class SeedOutcome:
    seed: int
    payload: Optional[dict[str, Any]] = None
    error: Optional[dict[str, Any]] = None
    exit_code: int = 0


def _concentration_payload(mdp: Mdp, run: RunResult, solved: SolveResult) -> dict[str, Any]:
    n, err = error_series(run, solved.q_star)
    return {"n": n, "err": err}


def _regret_payload(mdp: Mdp, run: RunResult, qcfg: QlearnConfig, options: dict[str, Any]) -> dict[str, Any]:
    est = cumulative_regret(
        mdp,
        run,
        qcfg,
        method=options.get("method", "frozen"),
        rollouts=options.get("rollouts", 64),
        tol=options.get("tol"),
        horizon_limit=options.get("horizon_limit", 100_000),
    )
    return {
        "n": est.n,
        "frozen": est.frozen,
        "mc": est.mc,
        "mc_stderr": est.mc_stderr,
        "cumulative_frozen": est.cumulative_frozen,
        "cumulative_mc": est.cumulative_mc,
    }


def run_seed(task: SeedTask) -> SeedOutcome:
    """One seed of a study. Errors come back as records so the coordinator decides."""
    try:
        mdp = validate_mdp(task.mdp)
        qcfg = QlearnConfig.model_validate({**task.qlearn, "seed": task.seed})
        run = run_qlearning(mdp, qcfg, grid=task.grid, check=False)
        if task.kind == "regret":
            payload = _regret_payload(mdp, run, qcfg, task.options)
        else:
            payload = _concentration_payload(mdp, run, solve_optimal(mdp))
        return SeedOutcome(task.seed, payload=payload)
    except QsaLabError as e:
        return SeedOutcome(task.seed, error=e.record(), exit_code=e.exit_code)
    except Exception as e:  # noqa: BLE001
        record = {"error": "error", "message": f"{type(e).__name__}: {e}", "details": {"trace": traceback.format_exc(limit=3)}}
        return SeedOutcome(task.seed, error=record, exit_code=1)


def fan_out(
    tasks: Sequence[SeedTask],
    workers: int = 1,
    on_event: Optional[Callable[[SeedEvent], None]] = None,
) -> list[SeedOutcome]:
    """Run every seed; the first failure in seed order aborts the study.

    `on_event` sees a SeedDone per finished seed and a SeedError before the abort.
    """
    if workers <= 1:
        return _collect(map(run_seed, tasks), len(tasks), on_event)
    with ProcessPoolExecutor(max_workers=workers) as pool:
        # map yields in submission order, so results stay ordered by seed
        return _collect(pool.map(run_seed, tasks), len(tasks), on_event)


def _collect(
    outcomes: Iterable[SeedOutcome],
    total: int,
    on_event: Optional[Callable[[SeedEvent], None]],
) -> list[SeedOutcome]:
    done: list[SeedOutcome] = []
    for i, out in enumerate(outcomes):
        if out.error is not None:
            message = out.error.get("message", "")
            if on_event:
                on_event(SeedError(out.seed, i, total, record=out.error, exit_code=out.exit_code, message=message))
            raise SeedFailed(out.seed, out.error.get("error", "error"), message, out.exit_code)
        done.append(out)
        if on_event:
            on_event(SeedDone(out.seed, i, total, payload=out.payload or {}))
    return done


def _tasks(kind: str, cfg: ExperimentConfig, mdp: Mdp, seeds: Sequence[int], grid: tuple[int, ...], options: dict[str, Any]) -> list[SeedTask]:
    mdp_dict = mdp_to_dict(mdp)
    qlearn = cfg.qlearn.model_dump(mode="json")
    return [SeedTask(kind, mdp_dict, qlearn, seed, grid, options) for seed in seeds]


# --- concentration -------------------------------------------------------------


def checkpoint_grid(cfg: ExperimentConfig) -> tuple[int, ...]:
    if cfg.grid.checkpoints is not None:
        return tuple(cfg.grid.checkpoints)
    return geometric_grid(cfg.qlearn.steps, cfg.grid.ratio)


def _safe_fit(n: np.ndarray, values: np.ndarray, window: tuple[float, float]) -> tuple[float, float]:
    try:
        fit = fit_power_law(n, values, window)
    except (TooFewPoints, NonPositiveValue) as e:
        log(f"no power-law fit: {e}")
        return math.nan, math.nan
    return fit.exponent, fit.r2


def _window_ends(n: np.ndarray, window: tuple[int, int]) -> tuple[int, int]:
    """Indices of the first checkpoint >= lo and the last checkpoint <= hi."""
    lo = int(np.searchsorted(n, window[0], side="left"))
    hi = int(np.searchsorted(n, window[1], side="right")) - 1
    return min(lo, len(n) - 1), max(hi, 0)


def concentration_study(
    cfg: ExperimentConfig, mdp: Mdp, seeds: Sequence[int], view: Optional[StudyView] = None, workers: int = 1
) -> StudyOutput:
    overrides = cfg.bounds.constants()
    enforce_conditions(mdp, cfg.qlearn, cfg.strict_conditions, "concentration", overrides)
    grid = checkpoint_grid(cfg)
    outcomes = fan_out(_tasks("concentration", cfg, mdp, seeds, grid, {}), workers, view.on_seed_event if view else None)

    n = outcomes[0].payload["n"]
    errors = np.array([o.payload["err"] for o in outcomes])
    envelope = np.quantile(errors, QUANTILES, axis=0)
    slope, r2 = _safe_fit(n, envelope[1], cfg.grid.fit_window)

    lo, hi = _window_ends(n, cfg.grid.fit_window)
    converged = int(np.sum((errors[:, hi] < errors[:, lo]) & (errors[:, hi] < CONVERGED_FRACTION_OF_VMAX * mdp.vmax)))

    spec = bound_spec_for(mdp, cfg.qlearn, overrides, cfg.bounds.delta)
    rate = convergence_rate(spec)

    bundle = Bundle()
    bundle.add_csv(
        "errors.csv",
        ["seed", "n", "err_inf"],
        ({"seed": o.seed, "n": int(k), "err_inf": e} for o in outcomes for k, e in zip(o.payload["n"], o.payload["err"])),
    )
    bundle.add_csv(
        "envelope.csv",
        ["n", "q10", "q50", "q90"],
        ({"n": int(k), "q10": envelope[0, i], "q50": envelope[1, i], "q90": envelope[2, i]} for i, k in enumerate(n)),
    )
    verdict = {
        "study": "concentration",
        "mdp": cfg.mdp,
        "algo": cfg.qlearn.algo,
        "seeds": len(seeds),
        "slope": slope,
        "r2": r2,
        "theory_rate": rate.dominant,
        "theory_headline": rate.headline,
        "sample_complexity": sample_complexity_exponent(spec),
        "converged": f"{converged}/{len(seeds)}",
    }
    return StudyOutput(bundle, verdict).seal(cfg)


# --- regret ------------------------------------------------------------------------


def _median_or_none(outcomes: list[SeedOutcome], key: str) -> Optional[np.ndarray]:
    if outcomes[0].payload.get(key) is None:
        return None
    return np.median(np.array([o.payload[key] for o in outcomes]), axis=0)


def regret_study(
    cfg: ExperimentConfig, mdp: Mdp, seeds: Sequence[int], view: Optional[StudyView] = None, workers: int = 1
) -> StudyOutput:
    q = cfg.qlearn
    solved = solve_optimal(mdp)
    overrides = cfg.bounds.constants()
    enforce_conditions(mdp, q, cfg.strict_conditions, "regret", overrides, gap=solved.gap)
    grid = regret_grid(q.steps, cfg.regret.ratio)
    options = {
        "method": cfg.regret.method,
        "rollouts": cfg.regret.rollouts,
        "tol": cfg.regret.tol,
        "horizon_limit": cfg.regret.horizon_limit,
    }
    outcomes = fan_out(_tasks("regret", cfg, mdp, seeds, grid, options), workers, view.on_seed_event if view else None)

    n = outcomes[0].payload["n"]
    cum_frozen = _median_or_none(outcomes, "cumulative_frozen")
    cum_mc = _median_or_none(outcomes, "cumulative_mc")
    terms = _median_or_none(outcomes, "frozen")
    stderr = _median_or_none(outcomes, "mc_stderr")

    b = temperature_coefficient(mdp, q)
    theory = theoretical_regret_exponent(q.algo, q.a, b=b, d=q.d, e=q.e, gap=solved.gap)
    series = cum_frozen if cum_frozen is not None else cum_mc
    exponent, r2 = _safe_fit(n, series, cfg.grid.fit_window)

    bundle = Bundle()
    bundle.add_csv(
        "regret.csv",
        ["N", "regret_frozen", "regret_mc", "mc_stderr", "theoretical_exponent"],
        (
            {
                "N": int(k),
                "regret_frozen": math.nan if cum_frozen is None else cum_frozen[i],
                "regret_mc": math.nan if cum_mc is None else cum_mc[i],
                "mc_stderr": math.nan if stderr is None else stderr[i],
                "theoretical_exponent": theory.value,
            }
            for i, k in enumerate(n)
        ),
    )
    bundle.add_csv(
        "regret_terms.csv",
        ["seed", "n", "frozen_term", "mc_term", "mc_stderr"],
        (
            {
                "seed": o.seed,
                "n": int(k),
                "frozen_term": _at(o.payload["frozen"], i),
                "mc_term": _at(o.payload["mc"], i),
                "mc_stderr": _at(o.payload["mc_stderr"], i),
            }
            for o in outcomes
            for i, k in enumerate(o.payload["n"])
        ),
    )
    verdict: dict[str, Any] = {
        "study": "regret",
        "mdp": cfg.mdp,
        "algo": q.algo,
        "method": cfg.regret.method,
        "seeds": len(seeds),
        "fitted_exponent": exponent,
        "r2": r2,
        "theoretical_exponent": theory.value,
        "gap_term_dropped": theory.gap_term_dropped,
        "gap": solved.gap,
    }
    if terms is not None:
        trend = frozen_trend(n, terms, cfg.grid.fit_window)
        lo, hi = _window_ends(n, cfg.grid.fit_window)
        verdict["frozen_nonincreasing"] = trend.nonincreasing
        verdict["frozen_decay"] = terms[hi] / terms[lo] if terms[lo] > 0 else math.nan
    return StudyOutput(bundle, verdict).seal(cfg)


def _at(arr: Optional[np.ndarray], i: int) -> float:
    return math.nan if arr is None else float(arr[i])


# --- single runs, decomposition, heatmap, audit, solve ----------------------------


def single_run(cfg: ExperimentConfig, mdp: Mdp, snapshots: bool = False) -> StudyOutput:
    enforce_conditions(mdp, cfg.qlearn, cfg.strict_conditions, cfg.purpose, cfg.bounds.constants())
    run = run_qlearning(mdp, cfg.qlearn, grid=checkpoint_grid(cfg), check=False)
    solved = solve_optimal(mdp)
    n, err = error_series(run, solved.q_star)
    bundle = Bundle()
    bundle.add_csv(
        "run.csv",
        ["n", "err_inf", "s_n", "cumulative_reward"],
        (
            {"n": int(k), "err_inf": e, "s_n": c.state, "cumulative_reward": c.cumulative_reward}
            for k, e, c in zip(n, err, run.checkpoints)
        ),
    )
    bundle.add_csv(
        "trajectory.csv",
        TRAJECTORY_COLUMNS,
        run.trajectory.trajectory_rows(at=n, err_inf={int(k): float(e) for k, e in zip(n, err)}),
    )
    if snapshots:
        bundle.add(
            "snapshots.npz",
            npz_bytes(
                n=n,
                q=np.array([c.q.values for c in run.checkpoints]),
                state=np.array([c.state for c in run.checkpoints]),
                action=np.array([c.action for c in run.checkpoints]),
            ),
        )
    verdict = {
        "study": f"run-{cfg.qlearn.algo}",
        "mdp": cfg.mdp,
        "seed": cfg.qlearn.seed,
        "steps": cfg.qlearn.steps,
        "final_err": float(err[-1]) if len(err) else math.nan,
    }
    return StudyOutput(bundle, verdict).seal(cfg)


def decomposition_study(cfg: ExperimentConfig, mdp: Mdp, seed: int) -> StudyOutput:
    lo, hi = cfg.decomposition.window
    qcfg = cfg.qlearn.model_copy(update={"seed": seed})
    system = build_system(mdp, qcfg)
    traj = embedded_trajectory(system, max(hi, 1), seed, RecordingOptions(checkpoints=(), window=(lo, hi)))
    parts = noise_decomposition(traj, system, cfg.decomposition.i_star, (lo, hi))
    norms = parts.norms()
    keys = list(norms)
    bundle = Bundle()
    bundle.add_csv(
        "decomposition.csv",
        ["n", *keys],
        ({"n": int(k), **{key: norms[key][i] for key in keys}} for i, k in enumerate(parts.n)),
    )
    verdict = {
        "study": "decomposition",
        "mdp": cfg.mdp,
        "algo": qcfg.algo,
        "seed": seed,
        "window": f"{lo}..{hi}",
        "max_residual": float(norms["residual_inf"].max()),
    }
    return StudyOutput(bundle, verdict).seal(cfg)


def heatmap_study(cfg: ExperimentConfig) -> StudyOutput:
    h = cfg.heatmap
    grid = sensitivity_grid(h.x_range, h.lambda_range, h.resolution)
    bundle = Bundle()
    bundle.add_csv(
        "heatmap.csv",
        ["x", "lambda", "dP_dx_abs", "dP_dlambda_abs"],
        ({"x": x, "lambda": lam, "dP_dx_abs": dx, "dP_dlambda_abs": dl} for x, lam, dx, dl in grid.rows()),
    )
    verdict = {
        "study": "heatmap",
        "rows": int(grid.x.size),
        "max_dP_dx": float(grid.dp_dx_abs.max()),
        "expected_max": 1.0 / (4.0 * min(h.lambda_range)),
        "max_dP_dlambda": float(grid.dp_dlam_abs.max()),
    }
    return StudyOutput(bundle, verdict).seal(cfg)


def audit_report(cfg: ExperimentConfig, mdp: Mdp) -> ConditionReport:
    q = cfg.qlearn
    solved = solve_optimal(mdp)
    spec = bound_spec_for(mdp, q, cfg.bounds.constants(), cfg.bounds.delta)
    q_l1 = float(np.abs(solved.q_star.values).sum(axis=1).min())
    extras = condition_extras(mdp, q, gap=solved.gap, q_l1_min=q_l1)
    report = check_conditions(spec, q.algo, extras, purpose=cfg.purpose)
    try:
        report = report.merged(check_n0(spec, q.algo, extras))
    except MissingParameter as e:
        log(f"n0 conditions skipped: {e}")
    return report


def audit_study(cfg: ExperimentConfig, mdp: Mdp) -> StudyOutput:
    report = audit_report(cfg, mdp)
    bundle = Bundle()
    bundle.add_csv(
        "audit.csv",
        ["id", "satisfied", "required", "lhs", "rhs", "witness", "tail_holds", "note"],
        (
            {
                "id": r.id,
                "satisfied": r.satisfied,
                "required": r.required,
                "lhs": r.lhs,
                "rhs": r.rhs,
                "witness": "" if r.witness is None else r.witness,
                "tail_holds": "" if r.tail_holds is None else r.tail_holds,
                "note": r.note,
            }
            for r in report
        ),
    )
    verdict = {
        "study": "audit",
        "mdp": cfg.mdp,
        "algo": cfg.qlearn.algo,
        "ok": report.ok,
        "checked": len(report.results),
        "failing": ",".join(report.failing) or "none",
        "advisories": ",".join(report.advisories) or "none",
    }
    return StudyOutput(bundle, verdict).seal(cfg)


def diameter_or_nan(mdp: Mdp) -> float:
    try:
        return mdp_diameter(mdp)
    except (InstanceTooLarge, Unreachable) as e:
        log(f"diameter unavailable: {e}")
        return math.nan


def solve_study(mdp: Mdp, mdp_name: str) -> tuple[StudyOutput, SolveResult, float]:
    solved = solve_optimal(mdp)
    diameter = diameter_or_nan(mdp)
    bundle = Bundle()
    bundle.add_csv(
        "solve.csv",
        ["s", "a", "q_star", "v_star", "optimal", "gap"],
        (
            {
                "s": s,
                "a": a,
                "q_star": solved.q_star.values[s, a],
                "v_star": solved.v_star[s],
                "optimal": a in solved.optimal_actions[s],
                "gap": solved.gap,
            }
            for s in range(mdp.num_states)
            for a in range(mdp.num_actions)
        ),
    )
    verdict = {
        "study": "solve",
        "mdp": mdp_name,
        "gap": solved.gap,
        "diameter": diameter,
        "residual": solved.residual,
        "iterations": solved.iterations,
    }
    return StudyOutput(bundle, verdict).seal(), solved, diameter
