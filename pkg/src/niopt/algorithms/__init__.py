"""Algorithm step operations, parameter sets, descriptors and the run loop."""

from .params import (
    BAParams,
    CSParams,
    DEParams,
    FAParams,
    FPAParams,
    GAParams,
    GDParams,
    ParameterError,
    ParamSpec,
    PSOParams,
    SAParams,
)
from .registry import ALGORITHM_NAMES, MECHANISM_TAGS, REGISTRY, AlgorithmDescriptor, get_descriptor
from .runner import run
from .steps import (
    PointState,
    ba_step,
    cs_step,
    de_step,
    fa_step,
    fpa_step,
    ga_step,
    gd_step,
    gradient_step,
    pso_step,
    sa_step,
)

__all__ = [
    "ALGORITHM_NAMES",
    "AlgorithmDescriptor",
    "BAParams",
    "CSParams",
    "DEParams",
    "FAParams",
    "FPAParams",
    "GAParams",
    "GDParams",
    "MECHANISM_TAGS",
    "PSOParams",
    "ParamSpec",
    "ParameterError",
    "PointState",
    "REGISTRY",
    "SAParams",
    "ba_step",
    "cs_step",
    "de_step",
    "fa_step",
    "fpa_step",
    "ga_step",
    "gd_step",
    "get_descriptor",
    "gradient_step",
    "pso_step",
    "run",
    "sa_step",
]
