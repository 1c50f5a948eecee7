"""Algorithm descriptors: parameter schema, step function and mechanism tags.

Mechanism tags describe how each method builds its increments:

``GGM``
    gradient-guided move
``RP``
    random permutation (random choice of partner solutions)
``DBP``
    direction-based perturbation, e.g. ``eps * (x_j - x_k)`` or ``(g* - x_i)``
``IRW``
    isotropic random walk (Gaussian steps)
``LTRW``
    long-tailed random walk (Levy steps)
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

from ..core import ContractViolation
from . import steps
from .params import (
    BAParams,
    CSParams,
    DEParams,
    FAParams,
    FPAParams,
    GAParams,
    GDParams,
    PSOParams,
    SAParams,
)

__all__ = ["MECHANISM_TAGS", "AlgorithmDescriptor", "REGISTRY", "ALGORITHM_NAMES", "get_descriptor"]

MECHANISM_TAGS = frozenset({"GGM", "RP", "DBP", "IRW", "LTRW"})


@dataclass(frozen=True)
class AlgorithmDescriptor:
    """Static description of one algorithm.

    Attributes
    ----------
    name : str
        Lowercase identifier accepted by the CLI.
    label : str
        Display name.
    params_cls : type
        Frozen parameter dataclass; its ``schema`` gives names, bounds, defaults.
    step : callable
        ``step(state, params, stream, evaluator) -> state``.
    kind : {"population", "point"}
        Whether the state is a :class:`~niopt.core.Population` or a
        :class:`~niopt.algorithms.steps.PointState`.
    position_mechanisms, velocity_mechanisms : frozenset of str
    distributions : tuple of str
        Probability distributions the method draws from.
    min_population : int
    """

    name: str
    label: str
    params_cls: type
    step: Callable
    kind: str
    position_mechanisms: frozenset
    velocity_mechanisms: frozenset = frozenset()
    distributions: tuple = ()
    min_population: int = 1
    personal_best: bool = False

    def __post_init__(self):
        bad = (self.position_mechanisms | self.velocity_mechanisms) - MECHANISM_TAGS
        if bad:
            raise ContractViolation(f"unknown mechanism tags {sorted(bad)}")

    @property
    def uses_velocity(self) -> bool:
        return bool(self.velocity_mechanisms)

    @property
    def parameter_schema(self) -> tuple:
        return self.params_cls.schema

    def default_params(self):
        return self.params_cls()

    def make_params(self, overrides: Optional[dict] = None):
        return self.params_cls.from_mapping(overrides)

    def evals_per_step(self, population_size: int, dimension: int) -> int:
        """Upper bound on evaluations one step may spend."""
        if self.name == "gd":
            return 2 * dimension + 1
        if self.kind == "point":
            return 1
        return population_size


def _fs(*tags):
    return frozenset(tags)


REGISTRY: dict[str, AlgorithmDescriptor] = {
    d.name: d
    for d in (
        AlgorithmDescriptor(
            "gd", "Newton-Raphson / gradient descent", GDParams, steps.gd_step, "point",
            _fs("GGM"), distributions=(),
        ),
        AlgorithmDescriptor(
            "pso", "Particle swarm optimisation", PSOParams, steps.pso_step, "population",
            _fs("DBP"), _fs("DBP"), ("uniform",), min_population=1, personal_best=True,
        ),
        AlgorithmDescriptor(
            "de", "Differential evolution", DEParams, steps.de_step, "population",
            _fs("RP", "DBP"), distributions=("uniform", "permutation"), min_population=4,
        ),
        AlgorithmDescriptor(
            "cs", "Cuckoo search", CSParams, steps.cs_step, "population",
            _fs("RP", "DBP", "LTRW"), distributions=("levy", "uniform"), min_population=3,
        ),
        AlgorithmDescriptor(
            "sa", "Simulated annealing", SAParams, steps.sa_step, "point",
            _fs("IRW"), distributions=("gaussian", "uniform"),
        ),
        AlgorithmDescriptor(
            "fa", "Firefly algorithm", FAParams, steps.fa_step, "population",
            _fs("DBP", "IRW"), distributions=("gaussian", "uniform"), min_population=2,
        ),
        AlgorithmDescriptor(
            "ba", "Bat algorithm", BAParams, steps.ba_step, "population",
            _fs("RP", "DBP"), _fs("RP", "DBP"), ("uniform",), min_population=1,
        ),
        AlgorithmDescriptor(
            "fpa", "Flower pollination algorithm", FPAParams, steps.fpa_step, "population",
            _fs("DBP", "LTRW"), distributions=("uniform", "levy"), min_population=3,
        ),
        AlgorithmDescriptor(
            "ga", "Genetic algorithm (real-coded)", GAParams, steps.ga_step, "population",
            _fs("RP", "IRW"), distributions=("uniform", "gaussian"), min_population=2,
        ),
    )
}

ALGORITHM_NAMES = tuple(REGISTRY)


def get_descriptor(name) -> AlgorithmDescriptor:
    if isinstance(name, AlgorithmDescriptor):
        return name
    try:
        return REGISTRY[name]
    except KeyError:
        raise ContractViolation(
            f"unknown algorithm {name!r}; expected one of {', '.join(ALGORITHM_NAMES)}"
        ) from None
