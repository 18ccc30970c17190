from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from rich.console import Console
from rich.live import Live
from rich.markup import escape
from rich.panel import Panel
from rich.table import Table

from .events import SeedDone, SeedError, SeedEvent


err_console = Console(stderr=True)


def log(message: str) -> None:
    err_console.print(f"[qsa-lab] {message}", markup=False, highlight=False)


def warn(message: str) -> None:
    err_console.print(f"[qsa-lab] warning: {message}", markup=False, highlight=False, style="yellow")


def seed_event_fields(event: SeedEvent) -> dict:
    """StudyState fields a seed event changes."""
    if isinstance(event, SeedError):
        return {"current_seed": event.seed, "last_error": f"seed {event.seed}: {event.message or ''}"}
    if isinstance(event, SeedDone):
        return {"seeds_done": event.index + 1, "current_seed": event.seed}
    return {}


@dataclass
class StudyState:
    study: str = ""
    mdp: str = ""
    algo: str = ""
    seeds_total: int = 0
    seeds_done: int = 0
    current_seed: Optional[int] = None
    last_error: str = ""


class StudyTUI:
    def __init__(self, console: Optional[Console] = None) -> None:
        self.console = console or err_console
        self.state = StudyState()
        self._live: Optional[Live] = None

    def start(self) -> None:
        self._live = Live(self._render(), console=self.console, refresh_per_second=4, transient=True)
        self._live.start()

    def stop(self) -> None:
        if self._live:
            self._live.stop()
            self._live = None

    def update(self, **kwargs) -> None:
        for k, v in kwargs.items():
            if hasattr(self.state, k):
                setattr(self.state, k, v)
        if self._live:
            self._live.update(self._render())

    def on_seed_event(self, event: SeedEvent) -> None:
        self.update(**seed_event_fields(event))

    def _render(self) -> Panel:
        t = Table.grid(expand=True)
        t.add_row(
            f"[bold]{self.state.study}[/] mdp=[cyan]{escape(self.state.mdp)}[/] algo=[magenta]{self.state.algo}[/]"
        )
        current = "-" if self.state.current_seed is None else str(self.state.current_seed)
        t.add_row(f"seeds: [green]{self.state.seeds_done}[/]/{self.state.seeds_total} | last seed: {current}")
        if self.state.last_error:
            t.add_row(f"[red]error:[/] {escape(self.state.last_error)}")
        return Panel(t, title="qsa-lab")


class NoopStudyTUI:
    def __init__(self) -> None:
        self.state = StudyState()

    def start(self) -> None:
        pass

    def stop(self) -> None:
        pass

    def update(self, **kwargs) -> None:
        for k, v in kwargs.items():
            if hasattr(self.state, k):
                setattr(self.state, k, v)

    def on_seed_event(self, event: SeedEvent) -> None:
        self.update(**seed_event_fields(event))
