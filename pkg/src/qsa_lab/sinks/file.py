from __future__ import annotations

from pathlib import Path

from ..errors import ValidationError
from .base import Payload, Sink


class FileSink(Sink):
    def __init__(self, directory: str | Path) -> None:
        self.dir = Path(directory).expanduser()
        self.dir.mkdir(parents=True, exist_ok=True)

    def path_for(self, name: str) -> Path:
        target = (self.dir / name).resolve()
        if not target.is_relative_to(self.dir.resolve()):
            raise ValidationError(f"artifact {name!r} would land outside {self.dir}")
        return target

    def handle_artifact(self, name: str, data: Payload) -> None:
        target = self.path_for(name)
        target.parent.mkdir(parents=True, exist_ok=True)
        if isinstance(data, bytes):
            target.write_bytes(data)
        else:
            target.write_text(data, encoding="utf-8")
