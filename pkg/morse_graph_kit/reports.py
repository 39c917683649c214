"""Verification report records."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

from ._processors import _plain

MAX_COUNTEREXAMPLES = 20


@dataclass
class VerificationReport:
    """Outcome of an exact identity check.

    Counterexamples are capped at ``MAX_COUNTEREXAMPLES``; ``stats`` holds sizes
    and counts that make the run reproducible and comparable.
    """

    check: str
    passed: bool = True
    counterexamples: list[dict[str, Any]] = field(default_factory=list)
    stats: dict[str, Any] = field(default_factory=dict)
    reproduce: str = ""

    def fail(self, **counterexample: Any) -> None:
        self.passed = False
        if len(self.counterexamples) < MAX_COUNTEREXAMPLES:
            self.counterexamples.append(counterexample)

    def merge(self, other: VerificationReport, prefix: str) -> None:
        if not other.passed:
            self.passed = False
        for item in other.counterexamples:
            if len(self.counterexamples) < MAX_COUNTEREXAMPLES:
                self.counterexamples.append({"part": prefix, **item})
        self.stats[prefix] = other.stats

    def to_json(self) -> dict[str, Any]:
        return {
            "check": self.check,
            "passed": self.passed,
            "counterexamples": _plain(self.counterexamples),
            "stats": _plain(self.stats),
            "reproduce": self.reproduce,
        }
