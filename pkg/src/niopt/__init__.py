"""Nature-inspired optimisation toolkit.

Every algorithm is written as an increment ``x <- x + dx`` (optionally via a
velocity increment), driven by a seeded :class:`RandomStream` and an
evaluation-counting :class:`Evaluator`.
"""

from .core import (
    ContractViolation,
    Evaluator,
    Individual,
    Population,
    Problem,
    RandomStream,
    RunRecord,
    derive_seed,
)
from .algorithms import REGISTRY, get_descriptor, run
from .benchmarks import make_problem

__version__ = "0.1.0"

__all__ = [
    "ContractViolation",
    "Evaluator",
    "Individual",
    "Population",
    "Problem",
    "REGISTRY",
    "RandomStream",
    "RunRecord",
    "derive_seed",
    "get_descriptor",
    "make_problem",
    "run",
]
