"""Exact fairness objectives, all oriented for minimization.

Every objective maps a utility vector to a sort key; a smaller key is fairer.
"""

from __future__ import annotations

import math
from collections.abc import Sequence
from dataclasses import dataclass
from fractions import Fraction

POWER = "power"
DEC_MIN = "dec-min"
INC_MAX = "inc-max"
NASH = "nash"


@dataclass(frozen=True)
class Objective:
    kind: str
    p: int | None = None

    def __post_init__(self):
        if self.kind not in (POWER, DEC_MIN, INC_MAX, NASH):
            raise ValueError(f"unknown objective {self.kind!r}")
        if self.kind == POWER and (not isinstance(self.p, int) or isinstance(self.p, bool) or self.p < 2):
            raise ValueError("power-sum needs an integer p >= 2")

    def __str__(self):
        if self.kind == POWER:
            return "square-sum" if self.p == 2 else f"power:{self.p}"
        return self.kind


def power_sum(p: int) -> Objective:
    return Objective(POWER, p)


SQUARE_SUM = power_sum(2)
DECMIN = Objective(DEC_MIN)
INCMAX = Objective(INC_MAX)
NASH_WELFARE = Objective(NASH)
ALL_OBJECTIVES = (SQUARE_SUM, DECMIN, INCMAX, NASH_WELFARE)


def parse_objective(spec: str) -> Objective:
    """``square-sum | power:<p> | dec-min | inc-max | nash``."""
    if spec == "square-sum":
        return SQUARE_SUM
    if spec.startswith("power:"):
        try:
            p = int(spec.split(":", 1)[1])
        except ValueError:
            raise ValueError(f"non-integer power in {spec!r}") from None
        return power_sum(p)
    if spec in (DEC_MIN, INC_MAX, NASH):
        return Objective(spec)
    raise ValueError(f"unknown objective {spec!r}")


def evaluate_power_sum(u: Sequence[Fraction], p: int) -> Fraction:
    if p < 2:
        raise ValueError("p must be at least 2")
    return sum((Fraction(x) ** p for x in u), Fraction(0))


def key(obj: Objective, u: Sequence[Fraction]):
    if obj.kind == POWER:
        return evaluate_power_sum(u, obj.p)
    if obj.kind == DEC_MIN:
        return tuple(sorted(u, reverse=True))
    if obj.kind == INC_MAX:
        return tuple(-x for x in sorted(u))
    positive = [Fraction(x) for x in u if x > 0]
    return (len(u) - len(positive), -math.prod(positive, start=Fraction(1)))


def compare(obj: Objective, u: Sequence[Fraction], v: Sequence[Fraction]) -> int:
    """-1 if ``u`` is strictly fairer than ``v``, 0 if equally fair, 1 otherwise."""
    if len(u) != len(v):
        raise ValueError("utility vectors differ in length")
    ku, kv = key(obj, u), key(obj, v)
    return (ku > kv) - (ku < kv)


def objective_value(obj: Objective, u: Sequence[Fraction]) -> Fraction | None:
    """The scalar value for power-sum objectives; None for comparator-only ones."""
    return evaluate_power_sum(u, obj.p) if obj.kind == POWER else None
