from __future__ import annotations

import csv
import io
from dataclasses import dataclass, field
from typing import Any, Iterable, Protocol, Sequence, Union

import numpy as np


Payload = Union[str, bytes]


class Sink(Protocol):
    def handle_artifact(self, name: str, data: Payload) -> None:
        ...


def format_value(v: Any) -> Any:
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if isinstance(v, np.integer):
        return int(v)
    return v


def csv_text(fieldnames: Sequence[str], rows: Iterable[dict[str, Any]]) -> str:
    buf = io.StringIO(newline="")
    w = csv.DictWriter(buf, fieldnames=list(fieldnames), extrasaction="ignore", lineterminator="\n")
    w.writeheader()
    for row in rows:
        w.writerow({k: format_value(row.get(k, "")) for k in fieldnames})
    return buf.getvalue()


def npz_bytes(**arrays: np.ndarray) -> bytes:
    buf = io.BytesIO()
    np.savez(buf, **arrays)
    return buf.getvalue()


@dataclass
class Bundle:
    """Artifacts held in memory until a command has succeeded."""

    items: dict[str, Payload] = field(default_factory=dict)

    def add(self, name: str, data: Payload) -> None:
        self.items[name] = data

    def add_csv(self, name: str, fieldnames: Sequence[str], rows: Iterable[dict[str, Any]]) -> None:
        self.add(name, csv_text(fieldnames, rows))

    def flush(self, sink: Sink) -> None:
        for name, data in self.items.items():
            sink.handle_artifact(name, data)
