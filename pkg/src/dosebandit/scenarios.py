"""True toxicity scenarios for the six-scenario operating-characteristics study."""

from __future__ import annotations

import json
from dataclasses import dataclass


@dataclass(frozen=True)
class Scenario:
    name: str
    true_tox: tuple[float, ...]
    true_mtd: int  # 1-based

    def __post_init__(self):
        if any(not 0.0 <= p <= 1.0 for p in self.true_tox):
            raise ValueError(f"true toxicity rates must be probabilities: {self.true_tox}")
        if not 1 <= self.true_mtd <= len(self.true_tox):
            raise ValueError(f"true_mtd {self.true_mtd} outside 1..{len(self.true_tox)}")


def builtin_scenarios() -> list[Scenario]:
    """The six study scenarios; correct MTDs run from dose 6 down to dose 1."""
    return [
        Scenario("S1", (0.05, 0.06, 0.08, 0.11, 0.19, 0.32), 6),
        Scenario("S2", (0.06, 0.08, 0.12, 0.18, 0.30, 0.41), 5),
        Scenario("S3", (0.05, 0.10, 0.20, 0.29, 0.50, 0.70), 4),
        Scenario("S4", (0.08, 0.15, 0.29, 0.43, 0.50, 0.57), 3),
        Scenario("S5", (0.13, 0.28, 0.41, 0.50, 0.60, 0.70), 2),
        Scenario("S6", (0.28, 0.42, 0.49, 0.61, 0.76, 0.87), 1),
    ]


def load_scenarios(path: str) -> list[Scenario]:
    """Read a JSON array of {name, true_tox, true_mtd} objects."""
    with open(path) as fh:
        raw = json.load(fh)
    if not isinstance(raw, list):
        raise ValueError("scenario file must contain a JSON array")
    return [
        Scenario(item["name"], tuple(item["true_tox"]), int(item["true_mtd"])) for item in raw
    ]
