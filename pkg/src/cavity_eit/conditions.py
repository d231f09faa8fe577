"""Inequality bookkeeping shared by the loss and feasibility reports."""

from __future__ import annotations

import math
from dataclasses import dataclass

SATISFIED = "satisfied"
MARGINAL = "marginal"
VIOLATED = "violated"

# "x << y" counts as satisfied below this ratio, marginal up to 1
MUCH_LESS = 0.1


@dataclass(frozen=True)
class Condition:
    """One inequality ``lhs <relation> rhs`` with ``ratio`` = small side / large side."""
    name: str
    relation: str  # "<<", "<~" (">>" and ">~" are stored flipped)
    lhs: float
    rhs: float
    ratio: float
    status: str
    note: str = ""

    def as_dict(self):
        return {"name": self.name, "relation": self.relation, "lhs": self.lhs,
                "rhs": self.rhs, "ratio": self.ratio, "status": self.status,
                "note": self.note}


def _ratio(small, large):
    if large == 0.0:
        return 0.0 if small == 0.0 else math.inf
    return small / large


def much_less(name, small, large, note=""):
    """``small << large``: satisfied below 0.1, marginal below 1, else violated."""
    r = _ratio(small, large)
    if r < MUCH_LESS:
        status = SATISFIED
    elif r < 1.0:
        status = MARGINAL
    else:
        status = VIOLATED
    return Condition(name, "<<", small, large, r, status, note)


def much_greater(name, large, small, note=""):
    c = much_less(name, small, large, note)
    return Condition(name, ">>", large, small, c.ratio, c.status, note)


def at_most(name, small, large, note=""):
    """``small <~ large``: satisfied when the ratio is at most 1."""
    r = _ratio(small, large)
    return Condition(name, "<~", small, large, r, SATISFIED if r <= 1.0 else VIOLATED, note)


def at_least(name, large, small, note=""):
    c = at_most(name, small, large, note)
    return Condition(name, ">~", large, small, c.ratio, c.status, note)
