"""Verification verdicts and tier bookkeeping.

Every verdict names the tier that produced it: EXACT facts come from box
or symbolic-inequality arithmetic and hold globally, CERTIFIED facts hold
on the inspected window via branch-and-bound margins, HEURISTIC facts
merely record that sampling found no counterexample.  FAILED verdicts
carry a concrete witness re-checked exactly.
"""

from dataclasses import dataclass, field
from typing import Optional

EXACT = "exact"
CERTIFIED = "certified"
HEURISTIC = "heuristic"
FAILED = "failed"

_RANK = {EXACT: 3, CERTIFIED: 2, HEURISTIC: 1, FAILED: 0}


def weakest(tiers):
    tiers = list(tiers)
    if not tiers:
        return EXACT
    return min(tiers, key=lambda t: _RANK[t])


def is_pass(tier):
    return tier != FAILED


@dataclass
class Check:
    name: str
    tier: str
    witness: Optional[tuple] = None
    samples: Optional[int] = None
    margin: Optional[object] = None
    detail: str = ""

    def line(self):
        extra = []
        if self.samples is not None:
            extra.append("samples=%d" % self.samples)
        if self.witness is not None:
            extra.append("witness=%s" % (tuple(str(w) for w in self.witness),))
        if self.detail:
            extra.append(self.detail)
        suffix = (" [" + ", ".join(extra) + "]") if extra else ""
        return "%-9s %s%s" % (self.tier.upper(), self.name, suffix)


@dataclass
class CheckReport:
    checks: list = field(default_factory=list)

    def add(self, check):
        self.checks.append(check)
        return check

    @property
    def tier(self):
        return weakest(c.tier for c in self.checks)

    @property
    def ok(self):
        return is_pass(self.tier)

    def lines(self):
        return [c.line() for c in self.checks]

    def failures(self):
        return [c for c in self.checks if c.tier == FAILED]
