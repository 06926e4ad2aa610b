"""Common result type returned by every tester."""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum


class Verdict(Enum):
    ACCEPT = "ACCEPT"
    REJECT = "REJECT"


@dataclass
class TestOutcome:
    """Verdict of one tester run plus the evidence behind it.

    ``statistic`` and ``threshold`` describe the decision: the Poissonized
    statistic tester accepts exactly when ``statistic < threshold``; other
    testers document their decision rule under ``diagnostics["rule"]``.
    ``queries_used`` counts samples drawn from each database during the
    run, as (database 0, database 1).
    """

    # not a test case, despite the name; keeps pytest from collecting it
    __test__ = False

    verdict: Verdict
    statistic: float
    threshold: float
    queries_used: tuple[int, int]
    diagnostics: dict = field(default_factory=dict)

    @property
    def accepted(self) -> bool:
        return self.verdict is Verdict.ACCEPT

    @property
    def rejected(self) -> bool:
        return self.verdict is Verdict.REJECT
