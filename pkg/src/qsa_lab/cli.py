from __future__ import annotations

import functools
import json
import sys
from pathlib import Path
from typing import Any, Callable, Optional

import click

from . import __version__
from .config import ExperimentConfig, load_config, output_root, parse_config
from .errors import QsaLabError
from .mdp.model import load_mdp
from .qlearn.runner import describe
from .sinks import FileSink, StdoutSink
from .studies import (
    StudyOutput,
    audit_study,
    concentration_study,
    decomposition_study,
    heatmap_study,
    regret_study,
    single_run,
    solve_study,
)
from .tui import NoopStudyTUI, StudyTUI, err_console, log


def _fail(record: dict[str, Any], code: int) -> None:
    click.echo(json.dumps(record, sort_keys=True), err=True)
    sys.exit(code)


def handled(fn: Callable) -> Callable:
    """Map QsaLabError to its exit code with a JSON record on stderr."""

    @functools.wraps(fn)
    def wrapper(*args, **kwargs):
        try:
            return fn(*args, **kwargs)
        except QsaLabError as e:
            _fail(e.record(), e.exit_code)
        except (click.ClickException, click.exceptions.Exit, SystemExit):
            raise
        except Exception as e:  # noqa: BLE001
            _fail({"error": "error", "message": f"{type(e).__name__}: {e}", "details": {}}, 1)

    return wrapper


def _seeds_block(value: str, master: int) -> dict[str, Any]:
    try:
        if "," in value:
            return {"values": [int(v) for v in value.split(",") if v.strip()], "master": master}
        return {"count": int(value), "master": master}
    except ValueError as e:
        raise click.BadParameter(f"expected a count or a comma-separated list, got {value!r}", param_hint="--seeds") from e


def _load(config_path: Optional[str], seeds: Optional[str] = None, strict: bool = False, **changes: Any) -> ExperimentConfig:
    """Config file plus command-line overrides; `a__b` addresses a nested field and None leaves it alone."""
    data = load_config(config_path).model_dump(mode="json")
    if seeds is not None:
        data["seeds"] = _seeds_block(seeds, data["seeds"]["master"])
    if strict:
        data["strict_conditions"] = True
    for path, value in changes.items():
        if value is None:
            continue
        node = data
        *parents, leaf = path.split("__")
        for p in parents:
            node = node[p]
        node[leaf] = value
    return parse_config(data)


def _emit(result: StudyOutput, directory: Path) -> None:
    result.bundle.flush(FileSink(directory))
    StdoutSink().handle_artifact("verdict", result.verdict_line())
    log(f"wrote {len(result.bundle.items)} files to {directory}")


def _view(quiet: bool, study: str, cfg: ExperimentConfig, seeds: list[int]):
    view = NoopStudyTUI() if quiet else StudyTUI(err_console)
    view.update(study=study, mdp=cfg.mdp, algo=cfg.qlearn.algo, seeds_total=len(seeds))
    return view


def common_options(fn: Callable) -> Callable:
    fn = click.option("--config", "config_path", type=click.Path(dir_okay=False), help="Experiment config (JSON).")(fn)
    fn = click.option("--out", type=click.Path(file_okay=False), help="Output root (default $QSA_LAB_OUT or ./qsa-out).")(fn)
    fn = click.option("--mdp", type=str, help="MDP file or bench:<name>, overriding the config.")(fn)
    fn = click.option("--strict-conditions", is_flag=True, help="Refuse to run when a condition fails.")(fn)
    fn = click.option("--quiet", is_flag=True, help="No live progress panel.")(fn)
    return fn


def fan_out_options(fn: Callable) -> Callable:
    fn = click.option("--seeds", type=str, help="Seed count, or a comma-separated list of seeds.")(fn)
    fn = click.option("--workers", type=click.IntRange(min=1), help="Process-pool size.")(fn)
    return fn


@click.group()
@click.version_option(__version__, prog_name="qsa-lab")
def cli():
    """qsa-lab: Q-learning as Markovian stochastic approximation, at desk scale."""


@cli.command()
@click.argument("mdp_path")
@click.option("--out", type=click.Path(file_okay=False))
@handled
def solve(mdp_path: str, out: Optional[str]):
    """Solve an MDP exactly and print Q*, V*, the gap and the diameter."""
    mdp = load_mdp(mdp_path)
    result, solved, diameter = solve_study(mdp, mdp_path)
    for s in range(mdp.num_states):
        qs = " ".join(f"{v:.10g}" for v in solved.q_star.values[s])
        click.echo(f"s={s} V*={solved.v_star[s]:.10g} Q*=[{qs}]")
    click.echo(f"gap={solved.gap:.10g} diameter={diameter:.10g}")
    root = output_root(ExperimentConfig(mdp=mdp_path), out)
    _emit(result, root / "solve")


def _single(algo: str, config_path, out, mdp, strict_conditions, quiet, seed, steps, snapshots):
    cfg = _load(config_path, strict=strict_conditions, mdp=mdp, qlearn__algo=algo, qlearn__seed=seed, qlearn__steps=steps)
    model = load_mdp(cfg.mdp)
    describe(model, cfg.qlearn)
    result = single_run(cfg, model, snapshots=snapshots)
    _emit(result, output_root(cfg, out) / f"run-{algo}")


@cli.command("run-boltzmann")
@common_options
@click.option("--seed", type=click.IntRange(min=0))
@click.option("--steps", type=click.IntRange(min=1))
@click.option("--snapshots", is_flag=True, help="Also write snapshots.npz.")
@handled
def run_boltzmann_cmd(config_path, out, mdp, strict_conditions, quiet, seed, steps, snapshots):
    """One Boltzmann Q-learning run; writes run.csv."""
    _single("boltzmann", config_path, out, mdp, strict_conditions, quiet, seed, steps, snapshots)


@cli.command("run-seg")
@common_options
@click.option("--seed", type=click.IntRange(min=0))
@click.option("--steps", type=click.IntRange(min=1))
@click.option("--snapshots", is_flag=True, help="Also write snapshots.npz.")
@handled
def run_seg_cmd(config_path, out, mdp, strict_conditions, quiet, seed, steps, snapshots):
    """One smoothed epsilon-greedy Q-learning run; writes run.csv."""
    _single("seg", config_path, out, mdp, strict_conditions, quiet, seed, steps, snapshots)


def _study(name: str, runner, config_path, out, mdp, strict_conditions, quiet, seeds, workers):
    cfg = _load(config_path, seeds=seeds, strict=strict_conditions, mdp=mdp, workers=workers, study=name)
    model = load_mdp(cfg.mdp)
    seed_list = cfg.seeds.resolve()
    describe(model, cfg.qlearn)
    view = _view(quiet, name, cfg, seed_list)
    view.start()
    try:
        result = runner(cfg, model, seed_list, view=view, workers=cfg.workers)
    finally:
        view.stop()
    _emit(result, output_root(cfg, out) / name)


@cli.command()
@common_options
@fan_out_options
@handled
def concentration(config_path, out, mdp, strict_conditions, quiet, seeds, workers):
    """Error envelope over seeds and its fitted decay rate."""
    _study("concentration", concentration_study, config_path, out, mdp, strict_conditions, quiet, seeds, workers)


@cli.command()
@common_options
@fan_out_options
@handled
def regret(config_path, out, mdp, strict_conditions, quiet, seeds, workers):
    """Cumulative regret over seeds and its fitted exponent."""
    _study("regret", regret_study, config_path, out, mdp, strict_conditions, quiet, seeds, workers)


@cli.command()
@common_options
@click.option("--seeds", type=str, help="Seed list; the first seed is used.")
@handled
def decomposition(config_path, out, mdp, strict_conditions, quiet, seeds):
    """Split one run's averaging error into martingale and telescoping parts."""
    cfg = _load(config_path, seeds=seeds, strict=strict_conditions, mdp=mdp, study="decomposition")
    model = load_mdp(cfg.mdp)
    result = decomposition_study(cfg, model, cfg.seeds.resolve()[0])
    _emit(result, output_root(cfg, out) / "decomposition")


@cli.command()
@click.option("--config", "config_path", type=click.Path(dir_okay=False))
@click.option("--out", type=click.Path(file_okay=False))
@click.option("--x-range", type=(float, float))
@click.option("--lambda-range", type=(float, float))
@click.option("--resolution", type=click.IntRange(min=1))
@handled
def heatmap(config_path, out, x_range, lambda_range, resolution):
    """|dP/dx| and |dP/dlambda| of the two-action softmax on a grid."""
    cfg = _load(
        config_path,
        study="heatmap",
        heatmap__x_range=list(x_range) if x_range else None,
        heatmap__lambda_range=list(lambda_range) if lambda_range else None,
        heatmap__resolution=resolution,
    )
    _emit(heatmap_study(cfg), output_root(cfg, out) / "heatmap")


@cli.command()
@common_options
@handled
def audit(config_path, out, mdp, strict_conditions, quiet):
    """Evaluate every hyperparameter condition for the configured run."""
    cfg = _load(config_path, mdp=mdp, study="audit")
    model = load_mdp(cfg.mdp)
    _emit(audit_study(cfg, model), output_root(cfg, out) / "audit")


def main():
    cli()
