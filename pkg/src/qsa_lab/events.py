from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any, Optional


@dataclass
class SeedEvent:
    seed: int
    index: int
    total: int


@dataclass
class SeedDone(SeedEvent):
    payload: dict[str, Any] = field(default_factory=dict)


@dataclass
class SeedError(SeedEvent):
    record: dict[str, Any] = field(default_factory=dict)
    exit_code: int = 1
    message: Optional[str] = None
