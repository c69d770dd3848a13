from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, fields
from pathlib import Path


@dataclass(frozen=True)
class RunConfig:
    max_blowups: int = 0
    delta_cap: int = 64
    result_cap: int = 128
    score_threshold: int = 2
    allow_negative_L: bool = False
    allow_no_type1: bool = False
    verbose_trace: bool = False
    workers: int = 1
    # underdetermined L systems: kernel multipliers range over [-kernel_box, kernel_box]
    kernel_box: int = 1
    max_trees: int | None = None
    time_limit: float | None = None

    def __post_init__(self):
        if self.max_blowups < 0:
            raise ValueError("max_blowups must be >= 0")
        for name in ("delta_cap", "result_cap", "workers"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        if self.kernel_box < 0:
            raise ValueError("kernel_box must be >= 0")

    def to_json(self) -> dict:
        d = asdict(self)
        d.pop("workers")  # never part of the deterministic payload
        return d


def load_config(path: str | Path | None, overrides: dict) -> RunConfig:
    """defaults < config file < JSIEVE_WORKERS < explicit overrides."""
    base: dict = {}
    if path is not None:
        base = json.loads(Path(path).read_text())
        known = {f.name for f in fields(RunConfig)}
        unknown = set(base) - known
        if unknown:
            raise ValueError(f"unknown config keys: {sorted(unknown)}")
    env = os.environ.get("JSIEVE_WORKERS")
    if env:
        base["workers"] = int(env)
    base.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**base)
