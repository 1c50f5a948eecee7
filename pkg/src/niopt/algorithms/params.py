"""Parameter schemas and typed parameter sets for every algorithm."""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass
from typing import ClassVar

from ..core import ContractViolation

__all__ = [
    "ParamSpec",
    "ParameterError",
    "GDParams",
    "DEParams",
    "PSOParams",
    "FAParams",
    "BAParams",
    "CSParams",
    "FPAParams",
    "GAParams",
    "SAParams",
]

INF = math.inf


class ParameterError(ContractViolation):
    """A parameter name is unknown or its value lies outside the legal range."""


@dataclass(frozen=True)
class ParamSpec:
    name: str
    low: float
    high: float
    default: float
    low_open: bool = False
    high_open: bool = False
    kind: str = "real"  # "real", "int" or "flag"

    def contains(self, value) -> bool:
        if isinstance(value, bool) and self.kind != "flag":
            return False
        try:
            v = float(value)
        except (TypeError, ValueError):
            return False
        if math.isnan(v):
            return False
        if self.kind in ("int", "flag") and v != int(v):
            return False
        above = v > self.low if self.low_open else v >= self.low
        below = v < self.high if self.high_open else v <= self.high
        return above and below

    def describe(self) -> str:
        def fmt(x):
            if math.isinf(x):
                return "inf" if x > 0 else "-inf"
            return f"{x:g}"

        left = "(" if self.low_open else "["
        right = ")" if self.high_open else "]"
        return f"{left}{fmt(self.low)}, {fmt(self.high)}{right}"


def _real(name, low, high, default, low_open=False, high_open=False):
    return ParamSpec(name, low, high, default, low_open, high_open)


class _ParamsBase:
    schema: ClassVar[tuple] = ()

    def __post_init__(self):
        for spec in self.schema:
            value = getattr(self, spec.name)
            if not spec.contains(value):
                raise ParameterError(
                    f"{type(self).__name__[:-6].lower()} parameter {spec.name}={value!r} "
                    f"is outside its legal range {spec.describe()}"
                )
            if spec.kind == "int":
                object.__setattr__(self, spec.name, int(value))
            elif spec.kind == "flag":
                object.__setattr__(self, spec.name, bool(value))
            else:
                object.__setattr__(self, spec.name, float(value))

    @classmethod
    def names(cls) -> tuple:
        return tuple(s.name for s in cls.schema)

    @classmethod
    def spec(cls, name) -> ParamSpec:
        for s in cls.schema:
            if s.name == name:
                return s
        raise ParameterError(f"unknown parameter {name!r}; expected one of {cls.names()}")

    @classmethod
    def from_mapping(cls, values=None):
        values = dict(values or {})
        for key in values:
            cls.spec(key)
        return cls(**values)

    def replace(self, **changes):
        return dataclasses.replace(self, **changes)

    def as_dict(self) -> dict:
        return {s.name: getattr(self, s.name) for s in self.schema}


@dataclass(frozen=True)
class GDParams(_ParamsBase):
    eta: float = 0.1
    schema: ClassVar[tuple] = (_real("eta", 0.0, INF, 0.1, low_open=True, high_open=True),)


@dataclass(frozen=True)
class DEParams(_ParamsBase):
    F: float = 0.7
    schema: ClassVar[tuple] = (_real("F", 0.0, 2.0, 0.7, low_open=True, high_open=True),)


@dataclass(frozen=True)
class PSOParams(_ParamsBase):
    """Attraction weights ``alpha`` (to ``g*``) and ``beta`` (to ``x_i*``).

    ``inertia`` multiplies the old velocity; ``1.0`` is the undamped update.
    ``per_coordinate`` draws a fresh ``(eps1, eps2)`` pair for every
    coordinate instead of one pair per particle.
    """

    alpha: float = 2.0
    beta: float = 2.0
    inertia: float = 0.5
    per_coordinate: bool = False
    schema: ClassVar[tuple] = (
        _real("alpha", 0.0, INF, 2.0, low_open=True, high_open=True),
        _real("beta", 0.0, INF, 2.0, low_open=True, high_open=True),
        _real("inertia", 0.0, 1.0, 0.5),
        ParamSpec("per_coordinate", 0, 1, 0, kind="flag"),
    )


@dataclass(frozen=True)
class FAParams(_ParamsBase):
    beta0: float = 1.0
    gamma: float = 1.0
    alpha: float = 0.05
    schema: ClassVar[tuple] = (
        _real("beta0", 0.0, INF, 1.0, low_open=True, high_open=True),
        _real("gamma", 0.0, INF, 1.0, low_open=True, high_open=True),
        _real("alpha", 0.0, INF, 0.05, high_open=True),
    )


@dataclass(frozen=True)
class BAParams(_ParamsBase):
    f_min: float = -1.0
    f_max: float = 0.0
    schema: ClassVar[tuple] = (
        _real("f_min", -INF, INF, -1.0, True, True),
        _real("f_max", -INF, INF, 0.0, True, True),
    )

    def __post_init__(self):
        super().__post_init__()
        if self.f_min > self.f_max:
            raise ParameterError(f"ba needs f_min <= f_max, got {self.f_min} > {self.f_max}")


@dataclass(frozen=True)
class CSParams(_ParamsBase):
    p_a: float = 0.25
    alpha: float = 1.0
    lam: float = 1.5
    schema: ClassVar[tuple] = (
        _real("p_a", 0.0, 1.0, 0.25),
        _real("alpha", 0.0, INF, 1.0, low_open=True, high_open=True),
        _real("lam", 0.3, 1.99, 1.5),
    )


@dataclass(frozen=True)
class FPAParams(_ParamsBase):
    p: float = 0.8
    gamma: float = 0.1
    lam: float = 1.5
    schema: ClassVar[tuple] = (
        _real("p", 0.0, 1.0, 0.8),
        _real("gamma", 0.0, INF, 0.1, low_open=True, high_open=True),
        _real("lam", 0.3, 1.99, 1.5),
    )


@dataclass(frozen=True)
class GAParams(_ParamsBase):
    crossover_rate: float = 0.9
    mutation_rate: float = 0.2
    mutation_scale: float = 0.01
    elite_count: int = 1
    schema: ClassVar[tuple] = (
        _real("crossover_rate", 0.0, 1.0, 0.9),
        _real("mutation_rate", 0.0, 1.0, 0.2),
        _real("mutation_scale", 0.0, INF, 0.01, low_open=True, high_open=True),
        ParamSpec("elite_count", 0, INF, 1, high_open=True, kind="int"),
    )


@dataclass(frozen=True)
class SAParams(_ParamsBase):
    initial_temperature: float = 1.0
    cooling_factor: float = 0.99
    step_scale: float = 0.01
    schema: ClassVar[tuple] = (
        _real("initial_temperature", 0.0, INF, 1.0, low_open=True, high_open=True),
        _real("cooling_factor", 0.0, 1.0, 0.99, low_open=True, high_open=True),
        _real("step_scale", 0.0, INF, 0.01, low_open=True, high_open=True),
    )
