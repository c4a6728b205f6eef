"""Shared configuration for the Monte Carlo simulators."""

from __future__ import annotations

from dataclasses import dataclass

VARIANTS = ("original", "nonbacktracking", "selfsimilar")


@dataclass(frozen=True)
class ModelConfig:
    variant: str = "selfsimilar"
    depth_cap: int = 40
    step_cap: int = 10_000
    episodes: int = 1000
    seed: int = 0
    threads: int = 1

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}; expected one of {VARIANTS}")
        if self.depth_cap < 2:
            raise ValueError("depth_cap must be at least 2")
        if self.step_cap < 1:
            raise ValueError("step_cap must be positive")
        if self.episodes < 1:
            raise ValueError("episodes must be positive")
        if self.threads < 1:
            raise ValueError("threads must be positive")
        if self.seed < 0:
            raise ValueError("seed must be nonnegative")
