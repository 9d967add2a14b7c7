"""Small record type shared by every inequality evaluator."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


@dataclass
class SlackRecord:
    """One evaluated inequality ``lhs <= rhs`` (or the stated orientation).

    ``slack`` is ``rhs - lhs`` in the direction that is non-negative when the
    inequality holds, and ``passed`` is ``slack >= -tol``.
    """

    name: str
    lhs: float
    rhs: float
    slack: float
    tol: float
    meta: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return bool(self.slack >= -self.tol)

    @classmethod
    def le(cls, name, lhs, rhs, tol=1e-8, **meta) -> "SlackRecord":
        lhs, rhs = float(lhs), float(rhs)
        return cls(name, lhs, rhs, rhs - lhs, tol, dict(meta))

    def as_dict(self) -> dict[str, Any]:
        return {"name": self.name, "lhs": self.lhs, "rhs": self.rhs, "slack": self.slack,
                "tol": self.tol, "passed": self.passed, **{f"meta.{k}": v for k, v in self.meta.items()}}
