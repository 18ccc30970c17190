from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Any, Mapping, Union

import numpy as np
from pydantic import BaseModel, Field
from pydantic import ValidationError as PydanticValidationError

from ..errors import (
    DimensionMismatch,
    GammaOutOfRange,
    InputFileNotFound,
    ParseError,
    RewardOutOfRange,
    RowSumViolation,
)


ROW_TOL = 1e-12
BENCH_PREFIX = "bench:"


def frozen_array(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True, eq=False)
class Mdp:
    transitions: np.ndarray  # (S, A, S)
    rewards: np.ndarray  # (S, A)
    gamma: float
    rmax: float

    @property
    def num_states(self) -> int:
        return int(self.rewards.shape[0])

    @property
    def num_actions(self) -> int:
        return int(self.rewards.shape[1])

    @property
    def vmax(self) -> float:
        return self.rmax / (1.0 - self.gamma)

    def with_rewards(self, rewards: np.ndarray, rmax: float | None = None) -> "Mdp":
        return validate_mdp(
            {
                "num_states": self.num_states,
                "num_actions": self.num_actions,
                "gamma": self.gamma,
                "rmax": self.rmax if rmax is None else rmax,
                "rewards": np.asarray(rewards).tolist(),
                "transitions": self.transitions.tolist(),
            }
        )


@dataclass(frozen=True, eq=False)
class QTable:
    """Q-values with the range bound vmax = rmax/(1-gamma)."""

    values: np.ndarray
    vmax: float

    @classmethod
    def zeros(cls, mdp: Mdp) -> "QTable":
        return cls(frozen_array(np.zeros((mdp.num_states, mdp.num_actions))), mdp.vmax)

    @classmethod
    def of(cls, values: np.ndarray, mdp: Mdp) -> "QTable":
        values = np.asarray(values, dtype=float)
        if values.shape != (mdp.num_states, mdp.num_actions):
            raise DimensionMismatch(f"Q shape {values.shape} != {(mdp.num_states, mdp.num_actions)}")
        return cls(frozen_array(values), mdp.vmax)

    def in_range(self, tol: float = 0.0) -> bool:
        return bool(np.all(self.values >= -tol) and np.all(self.values <= self.vmax + tol))


class MdpFile(BaseModel):
    num_states: int = Field(gt=0)
    num_actions: int = Field(gt=0)
    gamma: float
    rmax: float = Field(gt=0)
    rewards: list[list[float]]
    transitions: list[list[list[float]]]


RawMdp = Union[MdpFile, Mapping[str, Any]]


def validate_mdp(raw: RawMdp, allow_zero_discount: bool = False) -> Mdp:
    """Check a raw description and build an immutable Mdp.

    `allow_zero_discount` admits gamma == 0 (no lookahead); files never use it.
    """
    if not isinstance(raw, MdpFile):
        try:
            raw = MdpFile.model_validate(dict(raw))
        except PydanticValidationError as e:
            raise ParseError(f"malformed MDP description: {e.errors()[0]['msg']}") from e

    S, A = raw.num_states, raw.num_actions
    try:
        p = np.array(raw.transitions, dtype=float)
        r = np.array(raw.rewards, dtype=float)
    except ValueError as e:
        raise DimensionMismatch(f"ragged arrays: {e}") from e
    if p.shape != (S, A, S):
        raise DimensionMismatch(f"transitions shape {p.shape} != {(S, A, S)}")
    if r.shape != (S, A):
        raise DimensionMismatch(f"rewards shape {r.shape} != {(S, A)}")

    lo = 0.0 if allow_zero_discount else np.nextafter(0.0, 1.0)
    if not (lo <= raw.gamma < 1.0):
        raise GammaOutOfRange(raw.gamma)

    for s in range(S):
        for a in range(A):
            row = p[s, a]
            total = float(row.sum())
            if np.any(row < 0.0) or abs(total - 1.0) > ROW_TOL:
                raise RowSumViolation(s, a, total)
            if not (0.0 <= r[s, a] <= raw.rmax):
                raise RewardOutOfRange(s, a, float(r[s, a]), raw.rmax)

    return Mdp(transitions=frozen_array(p), rewards=frozen_array(r), gamma=float(raw.gamma), rmax=float(raw.rmax))


def mdp_to_dict(mdp: Mdp) -> dict[str, Any]:
    return {
        "num_states": mdp.num_states,
        "num_actions": mdp.num_actions,
        "gamma": mdp.gamma,
        "rmax": mdp.rmax,
        "rewards": mdp.rewards.tolist(),
        "transitions": mdp.transitions.tolist(),
    }


def _read_text(path: str | Path) -> str:
    name = str(path)
    if name.startswith(BENCH_PREFIX):
        res = resources.files("qsa_lab.benchmarks") / f"{name[len(BENCH_PREFIX):]}.json"
        if not res.is_file():
            raise InputFileNotFound(name)
        return res.read_text(encoding="utf-8")
    p = Path(path).expanduser()
    if not p.is_file():
        raise InputFileNotFound(str(p))
    return p.read_text(encoding="utf-8")


def load_mdp(path: str | Path) -> Mdp:
    """Load an MDP from a JSON file, or a packaged benchmark via `bench:<name>`."""
    try:
        data = json.loads(_read_text(path))
    except json.JSONDecodeError as e:
        raise ParseError(f"{path}: {e}") from e
    if not isinstance(data, dict):
        raise ParseError(f"{path}: top level must be an object")
    return validate_mdp(data)


def save_mdp(mdp: Mdp, path: str | Path) -> None:
    # json writes floats with repr, so load -> save -> load is bit-exact.
    Path(path).write_text(json.dumps(mdp_to_dict(mdp), indent=1) + "\n", encoding="utf-8")
