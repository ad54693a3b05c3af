"""Run reports: one JSON document per command invocation."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field
from datetime import datetime, timezone

import numpy as np

from .errors import ContractError

TIMESTAMP_KEYS = ("started", "finished")


def to_plain(obj):
    """Convert numpy scalars/arrays and tuples into JSON-ready values; reject nonfinite floats."""
    if isinstance(obj, dict):
        return {str(k): to_plain(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_plain(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return to_plain(obj.tolist())
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            raise ContractError(f"report value {v} is not finite")
        return v
    if obj is None or isinstance(obj, str):
        return obj
    raise ContractError(f"cannot serialize {type(obj).__name__} in a report")


def now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


@dataclass
class RunReport:
    command: str
    parameters: dict = field(default_factory=dict)
    seed: int = 0
    timestamps: dict = field(default_factory=dict)
    metrics: dict = field(default_factory=dict)
    artifacts: dict = field(default_factory=dict)

    def to_json(self) -> str:
        return json.dumps(to_plain(asdict(self)), sort_keys=True, indent=2, allow_nan=False) + "\n"

    @classmethod
    def from_json(cls, text: str) -> "RunReport":
        data = json.loads(text)
        extra = set(data) - {"command", "parameters", "seed", "timestamps", "metrics", "artifacts"}
        if extra:
            raise ContractError(f"unknown report fields {sorted(extra)}")
        return cls(**data)

    def without_timestamps(self) -> "RunReport":
        return RunReport(self.command, self.parameters, self.seed, {}, self.metrics, self.artifacts)
