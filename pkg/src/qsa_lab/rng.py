from __future__ import annotations

from dataclasses import dataclass
from typing import Any

import numpy as np


@dataclass
class Streams:
    """Independent substreams of one trajectory seed."""

    transition: np.random.Generator
    action: np.random.Generator
    noise: np.random.Generator

    def state(self) -> dict[str, Any]:
        # Opaque resume token; bit-generator states are plain dicts.
        return {
            "transition": self.transition.bit_generator.state,
            "action": self.action.bit_generator.state,
            "noise": self.noise.bit_generator.state,
        }

    @classmethod
    def from_state(cls, token: dict[str, Any]) -> "Streams":
        gens = {}
        for name in ("transition", "action", "noise"):
            bg = np.random.PCG64()
            bg.state = token[name]
            gens[name] = np.random.Generator(bg)
        return cls(**gens)


def spawn_streams(seed: int | np.random.SeedSequence) -> Streams:
    root = seed if isinstance(seed, np.random.SeedSequence) else np.random.SeedSequence(seed)
    transition, action, noise = root.spawn(3)
    return Streams(
        transition=np.random.default_rng(transition),
        action=np.random.default_rng(action),
        noise=np.random.default_rng(noise),
    )


def fork_seeds(master: int, count: int) -> list[int]:
    """Derive `count` reproducible integer seeds from a master seed."""
    children = np.random.SeedSequence(master).spawn(count)
    return [int(c.generate_state(1, dtype=np.uint64)[0] >> np.uint64(1)) for c in children]


def draw_from_cdf(rng: np.random.Generator, cdf: np.ndarray) -> int:
    u = rng.random()
    idx = int(np.searchsorted(cdf, u * cdf[-1], side="right"))
    return min(idx, len(cdf) - 1)


def sample_index(rng: np.random.Generator, probs: np.ndarray) -> int:
    """Inverse-CDF draw over a fixed ordering of `probs`."""
    return draw_from_cdf(rng, np.cumsum(probs))
