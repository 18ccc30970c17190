from __future__ import annotations

import click

from .base import Payload, Sink


class StdoutSink(Sink):
    """Echoes text artifacts; binary ones are announced by name only."""

    def handle_artifact(self, name: str, data: Payload) -> None:
        if isinstance(data, bytes):
            click.echo(f"# {name}: {len(data)} bytes")
        else:
            click.echo(data, nl=not data.endswith("\n"))
