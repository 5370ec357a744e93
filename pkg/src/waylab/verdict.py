"""Structured pass/fail reports shared by all checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

import numpy as np


@dataclass(frozen=True)
class Check:
    """One asserted condition: passes iff ``defect <= threshold``.

    Logical conditions (e.g. a biconditional) use defect 0.0 for "holds" and
    1.0 for "fails" with threshold 0.0.
    """

    name: str
    defect: float
    threshold: float
    description: str = ""

    @property
    def passed(self) -> bool:
        return bool(self.defect <= self.threshold)


@dataclass(frozen=True)
class Verdict:
    """Outcome of a verification.

    ``checks`` decide ``passed``. ``facts`` carry measured quantities that are
    reported but not asserted (for instance whether a measurement conserves
    the observable, which may legitimately be false). ``witnesses`` are named
    matrices that show why something fails.
    """

    checks: tuple[Check, ...]
    facts: dict[str, Any] = field(default_factory=dict)
    witnesses: tuple[tuple[str, np.ndarray], ...] = ()

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __bool__(self) -> bool:
        return self.passed

    def check(self, name: str) -> Check:
        for c in self.checks:
            if c.name == name:
                return c
        raise KeyError(name)

    @property
    def defects(self) -> dict[str, float]:
        return {c.name: c.defect for c in self.checks}

    def failed_checks(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]


def logical_check(name: str, ok: bool, description: str = "") -> Check:
    return Check(name, 0.0 if ok else 1.0, 0.0, description)
