"""Named residuals with tolerances."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass
class ResidualReport:
    """Map from identity names to (residual norm, tolerance)."""

    entries: dict[str, tuple[float, float]] = field(default_factory=dict)

    def add(self, name: str, residual, tol: float) -> None:
        value = float(np.max(np.abs(residual))) if np.size(residual) else 0.0
        self.entries[name] = (value, float(tol))

    def merge(self, other: "ResidualReport", prefix: str = "") -> "ResidualReport":
        for name, entry in other.entries.items():
            self.entries[prefix + name] = entry
        return self

    def __getitem__(self, name: str) -> float:
        return self.entries[name][0]

    def __contains__(self, name: str) -> bool:
        return name in self.entries

    def __iter__(self):
        return iter(self.entries)

    def passed(self, name: str | None = None) -> bool:
        if name is not None:
            value, tol = self.entries[name]
            return bool(value <= tol)
        return all(v <= t for v, t in self.entries.values())

    def worst(self) -> float:
        return max((v for v, _ in self.entries.values()), default=0.0)

    def failures(self) -> list[str]:
        return [k for k, (v, t) in self.entries.items() if not v <= t]

    def to_dict(self) -> dict:
        return {
            k: {"residual": v, "tolerance": t, "passed": bool(v <= t)}
            for k, (v, t) in sorted(self.entries.items())
        }
