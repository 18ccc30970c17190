from __future__ import annotations

import json
import os
from pathlib import Path
from typing import Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator
from pydantic import ValidationError as PydanticValidationError

from .errors import ConfigInvalid, InputFileNotFound, ParseError
from .rng import fork_seeds
from .sa.base import Schedule


AlgoName = Literal["boltzmann", "seg"]
StudyKind = Literal["concentration", "regret", "decomposition", "heatmap", "audit"]
RegretMethod = Literal["frozen", "mc", "both"]

OUT_ENV = "QSA_LAB_OUT"
DEFAULT_OUT = "./qsa-out"


class ScheduleConfig(BaseModel):
    kind: Literal["power", "inverseLog", "constant"] = Field(default="power")
    scale: float = Field(default=1.0, ge=0.0)
    exponent: float = Field(default=1.0, ge=0.0, le=1.0)
    n0: int = Field(default=1, ge=1)

    def to_schedule(self) -> Schedule:
        return Schedule(self.kind, self.scale, self.exponent, self.n0)


class QlearnConfig(BaseModel):
    algo: AlgoName = Field(default="boltzmann")
    beta: Optional[float] = Field(default=None, ge=0.0)  # None: smallest beta the conditions allow
    a: float = Field(default=0.0, ge=0.0, le=1.0)
    n0: int = Field(default=100, ge=1)
    b: Optional[float] = Field(default=None, ge=0.0)  # None: derived from kappa1
    kappa1: float = Field(default=0.02, ge=0.0, le=1.0)
    d: float = Field(default=0.0, ge=0.0, le=1.0)
    e: float = Field(default=0.0, ge=0.0, le=1.0)
    epsilon_scale: float = Field(default=1.0, ge=0.0, le=1.0)
    steps: int = Field(default=100_000, ge=1)
    seed: int = Field(default=0, ge=0)
    initial_state: int = Field(default=0, ge=0)
    q0: Optional[list[list[float]]] = Field(default=None)
    stepsize: Optional[ScheduleConfig] = Field(default=None)
    temperature: Optional[ScheduleConfig] = Field(default=None)
    epsilon: Optional[ScheduleConfig] = Field(default=None)


class SeedsConfig(BaseModel):
    values: Optional[list[int]] = Field(default=None)
    count: int = Field(default=30, ge=1)
    master: int = Field(default=20240601, ge=0)

    @field_validator("values")
    @classmethod
    def _nonempty(cls, v: Optional[list[int]]) -> Optional[list[int]]:
        if v is not None and not v:
            raise ValueError("seed list must not be empty")
        return v

    def resolve(self) -> list[int]:
        return list(self.values) if self.values is not None else fork_seeds(self.master, self.count)


class GridConfig(BaseModel):
    checkpoints: Optional[list[int]] = Field(default=None)  # None: geometric grid
    ratio: float = Field(default=1.2, gt=1.0)
    fit_window: tuple[int, int] = Field(default=(1_000, 100_000))

    @field_validator("checkpoints")
    @classmethod
    def _increasing(cls, v: Optional[list[int]]) -> Optional[list[int]]:
        if v is not None and any(b <= a for a, b in zip(v, v[1:])):
            raise ValueError("checkpoints must be strictly increasing")
        return v


class RegretConfig(BaseModel):
    method: RegretMethod = Field(default="frozen")
    ratio: float = Field(default=1.3, gt=1.0)
    rollouts: int = Field(default=64, ge=2)
    tol: Optional[float] = Field(default=None, gt=0.0)  # None: 1e-4 * Rmax/(1-gamma)
    horizon_limit: int = Field(default=100_000, ge=1)


class HeatmapConfig(BaseModel):
    x_range: tuple[float, float] = Field(default=(-1.0, 1.0))
    lambda_range: tuple[float, float] = Field(default=(0.05, 1.0))
    resolution: int = Field(default=101, ge=1)


class DecompositionConfig(BaseModel):
    window: tuple[int, int] = Field(default=(0, 200))
    i_star: int = Field(default=0, ge=0)


class BoundOverrides(BaseModel):
    """Manual values for the bound constants c1..c10 and delta."""

    c1: Optional[float] = Field(default=None, gt=0.0)
    c2: Optional[float] = Field(default=None, gt=0.0)
    c3: Optional[float] = Field(default=None, gt=0.0)
    c4: Optional[float] = Field(default=None, gt=0.0)
    c5: Optional[float] = Field(default=None, gt=0.0)
    c6: Optional[float] = Field(default=None, gt=0.0)
    c7: Optional[float] = Field(default=None, gt=0.0)
    c8: Optional[float] = Field(default=None, gt=0.0)
    c9: Optional[float] = Field(default=None, gt=0.0)
    c10: Optional[float] = Field(default=None, gt=0.0)
    delta: float = Field(default=0.01, gt=0.0, lt=1.0)

    def constants(self) -> dict[str, float]:
        return {k: v for k, v in self.model_dump(exclude={"delta"}).items() if v is not None}


class ExperimentConfig(BaseModel):
    mdp: str = Field(default="bench:two_by_two")
    study: StudyKind = Field(default="concentration")
    qlearn: QlearnConfig = Field(default_factory=QlearnConfig)
    seeds: SeedsConfig = Field(default_factory=SeedsConfig)
    grid: GridConfig = Field(default_factory=GridConfig)
    regret: RegretConfig = Field(default_factory=RegretConfig)
    heatmap: HeatmapConfig = Field(default_factory=HeatmapConfig)
    decomposition: DecompositionConfig = Field(default_factory=DecompositionConfig)
    bounds: BoundOverrides = Field(default_factory=BoundOverrides)
    purpose: Literal["concentration", "regret"] = Field(default="concentration")
    out: Optional[str] = Field(default=None)
    strict_conditions: bool = Field(default=False)
    workers: int = Field(default=1, ge=1)

    @model_validator(mode="after")
    def _grid_fits_run(self) -> "ExperimentConfig":
        cps = self.grid.checkpoints
        if cps is not None and (cps[0] < 0 or cps[-1] > self.qlearn.steps):
            raise ValueError(f"checkpoints must lie in [0, {self.qlearn.steps}]")
        return self


def output_root(cfg: ExperimentConfig, override: Optional[str] = None) -> Path:
    return Path(override or cfg.out or os.environ.get(OUT_ENV) or DEFAULT_OUT).expanduser()


def parse_config(data: dict) -> ExperimentConfig:
    try:
        return ExperimentConfig.model_validate(data)
    except PydanticValidationError as e:
        err = e.errors()[0]
        where = ".".join(str(p) for p in err["loc"])
        raise ConfigInvalid(f"{where}: {err['msg']}", field=where) from e


def load_config(path: Optional[str | Path] = None) -> ExperimentConfig:
    """Read a JSON experiment config; no path gives the all-defaults config."""
    if path is None:
        return ExperimentConfig()
    p = Path(path).expanduser()
    if not p.is_file():
        raise InputFileNotFound(str(p))
    try:
        data = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as e:
        raise ParseError(f"{p}: {e}") from e
    if not isinstance(data, dict):
        raise ParseError(f"{p}: top level must be an object")
    return parse_config(data)


def dump_config(cfg: ExperimentConfig) -> str:
    return json.dumps(cfg.model_dump(mode="json"), indent=2, sort_keys=True) + "\n"


def save_config(cfg: ExperimentConfig, path: str | Path) -> None:
    Path(path).write_text(dump_config(cfg), encoding="utf-8")
