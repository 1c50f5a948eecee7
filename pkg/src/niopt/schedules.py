"""Deterministic parameter-control schedules."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .core import ContractViolation

__all__ = ["Schedule", "parameter_schedule", "SCHEDULE_KINDS"]

SCHEDULE_KINDS = ("constant", "linear", "geometric")


def parameter_schedule(kind: str, start: float, end: float, t: float, t_max: float) -> float:
    """Value of a scheduled parameter at progress ``t`` out of ``t_max``.

    ``constant`` stays at ``start``; ``linear`` interpolates; ``geometric``
    interpolates in log space and needs same-sign, nonzero endpoints.
    """
    if not 0 <= t <= t_max or t_max <= 0:
        raise ContractViolation(f"need 0 <= t <= t_max and t_max > 0, got t={t}, t_max={t_max}")
    if kind == "constant":
        return float(start)
    if t == t_max:
        return float(end)
    frac = t / t_max
    if kind == "linear":
        return float(start + (end - start) * frac)
    if kind == "geometric":
        if start == 0 or end == 0 or (start > 0) != (end > 0):
            raise ContractViolation("geometric schedule needs nonzero endpoints of the same sign")
        return float(start * math.exp(frac * math.log(end / start)))
    raise ContractViolation(f"unknown schedule kind {kind!r}; expected one of {SCHEDULE_KINDS}")


@dataclass(frozen=True)
class Schedule:
    kind: str
    start: float
    end: float

    def __post_init__(self):
        if self.kind not in SCHEDULE_KINDS:
            raise ContractViolation(f"unknown schedule kind {self.kind!r}; expected one of {SCHEDULE_KINDS}")
        if self.kind == "geometric" and (
            self.start == 0 or self.end == 0 or (self.start > 0) != (self.end > 0)
        ):
            raise ContractViolation("geometric schedule needs nonzero endpoints of the same sign")

    def value(self, t: float, t_max: float) -> float:
        return parameter_schedule(self.kind, self.start, self.end, t, t_max)
