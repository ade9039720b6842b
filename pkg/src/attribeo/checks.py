"""Property-check results shared by the verification routines."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any


class PropertyViolation(AssertionError):
    """A property that must hold by construction was found violated."""


@dataclass(frozen=True)
class Check:
    """Outcome of one property check.

    ``passed`` is None when the property's hypothesis does not apply.
    ``asserted`` marks properties that are guaranteed to hold; a failing
    unasserted check is informational only.
    """

    name: str
    passed: bool | None
    asserted: bool = True
    witness: Any = None

    @property
    def status(self) -> str:
        if self.passed:
            return "pass"
        if self.passed is False and self.asserted:
            return "fail"
        return "info"


@dataclass
class Report:
    checks: list[Check] = field(default_factory=list)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def extend(self, other: Report) -> None:
        self.checks.extend(other.checks)

    @property
    def ok(self) -> bool:
        """True when no asserted check failed."""
        return all(c.status != "fail" for c in self.checks)

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == "fail"]

    def __getitem__(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    def __iter__(self):
        return iter(self.checks)

    def __len__(self) -> int:
        return len(self.checks)
