"""Top-level tool configuration, loaded from a JSON file.

Every field has a documented default; a missing config file means defaults.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .harness.equiv import EquivBudget
from .netlist.synth import DEFAULT_SYNTH_COMMAND, SynthConfig


@dataclass
class Config:
    tau: float = 0.95
    m: float = 1.0
    n: float = 0.0
    synth_command: str = DEFAULT_SYNTH_COMMAND
    synth_timeout: float = 120.0
    equiv_exhaustive_bits: int = 12
    equiv_random_vectors: int = 1000
    equiv_sequential_cycles: int = 1000
    equiv_seed: int = 3407
    workers: int = 1
    payload_max_bytes: int = 32
    model_sig: str = "m1"
    dev_sig: str = "d1"

    def __post_init__(self):
        if not (0.0 < self.tau < 1.0):
            raise ValueError("tau must be in (0, 1)")
        if self.m < 0 or self.n < 0:
            raise ValueError("objective weights must be non-negative")
        if self.workers < 1:
            raise ValueError("workers must be >= 1")
        if self.equiv_exhaustive_bits < 0 or self.equiv_random_vectors < 1 \
                or self.equiv_sequential_cycles < 1:
            raise ValueError("equivalence budget fields must be positive")

    def budget(self) -> EquivBudget:
        return EquivBudget(self.equiv_exhaustive_bits,
                           self.equiv_random_vectors,
                           self.equiv_sequential_cycles,
                           self.equiv_seed)

    def synth(self) -> SynthConfig:
        return SynthConfig.from_environment(
            SynthConfig(self.synth_command, self.synth_timeout))


def load_config(path: str | None = None) -> Config:
    if path is None:
        return Config()
    with open(path) as f:
        data = json.load(f)
    unknown = set(data) - set(Config.__dataclass_fields__)
    if unknown:
        raise ValueError(f"unknown config keys: {sorted(unknown)}")
    return Config(**data)
