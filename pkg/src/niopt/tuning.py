"""Parameter tuning: a self-tuning meta-loop and deterministic parameter control.

An algorithm's parameters are tuned by the algorithm itself: the parameter
box becomes a small optimisation problem whose objective (the
*meta-objective*) runs the algorithm on a set of inner problems and scores
the outcome.  Two goals are combined into one number with a weight ``w``:

* solution quality -- final best fitness, normalised by the mean fitness of
  the initial population;
* cost -- evaluations needed to reach the target, as a fraction of the
  inner budget (1.0 when the target is never reached).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .algorithms import get_descriptor
from .algorithms import run as run_algorithm
from .core import ContractViolation, Problem, RandomStream, RunRecord
from .measures import evals_to_target
from .schedules import SCHEDULE_KINDS, Schedule, parameter_schedule

__all__ = [
    "TuningTask",
    "Trial",
    "TuningResult",
    "meta_objective",
    "self_tune",
    "write_trials_csv",
    "parameter_schedule",
    "Schedule",
    "SCHEDULE_KINDS",
]

# substream keys: one branch drives the meta-optimiser, the other seeds inner runs
_META_BRANCH = 0
_INNER_BRANCH = 1


@dataclass
class TuningTask:
    """What to tune, on which problems, and with how much effort.

    Attributes
    ----------
    algorithm : str
        Registry name of the algorithm being tuned (also the meta-optimiser).
    bounds : mapping
        Parameter name -> ``(lo, hi)``; must lie inside the parameter schema.
    problems : sequence of Problem
    inner_budget : int
        Evaluations per inner run.
    repetitions : int
        Inner runs per problem for each parameter trial.
    meta_budget : int
        Number of parameter-set trials.
    weight : float
        ``w`` in ``[0, 1]``: 1 is pure quality, 0 is pure cost.
    population_size : int
        ``n`` for the inner runs.
    meta_population : int
        ``n`` for the meta-optimiser.
    target_tolerance : float
        Inner target is ``f_min + target_tolerance``.
    runner : callable
        ``runner(algorithm, params, problem, budget, stream, population_size)
        -> RunRecord``; defaults to :func:`niopt.algorithms.run`.
    """

    algorithm: str
    bounds: Mapping[str, tuple]
    problems: Sequence[Problem]
    inner_budget: int = 2000
    repetitions: int = 3
    meta_budget: int = 20
    weight: float = 0.5
    population_size: int = 20
    meta_population: int = 10
    target_tolerance: float = 1e-3
    runner: Callable = field(default=None, repr=False)

    def __post_init__(self):
        desc = get_descriptor(self.algorithm)
        self.algorithm = desc.name
        if not self.bounds:
            raise ContractViolation("no parameters to tune")
        clean = {}
        for name, (lo, hi) in self.bounds.items():
            spec = desc.params_cls.spec(name)
            if spec.kind == "flag":
                raise ContractViolation(f"flag parameter {name!r} cannot be tuned")
            lo, hi = float(lo), float(hi)
            if not lo < hi:
                raise ContractViolation(f"bounds for {name!r} need lo < hi, got ({lo}, {hi})")
            if not (spec.contains(lo) and spec.contains(hi)):
                raise ContractViolation(
                    f"bounds ({lo}, {hi}) for {name!r} leave its legal range {spec.describe()}"
                )
            clean[name] = (lo, hi)
        self.bounds = clean
        if self.meta_budget < 1:
            raise ContractViolation("meta budget must be at least 1")
        if self.repetitions < 1:
            raise ContractViolation("repetitions must be at least 1")
        if not 0.0 <= self.weight <= 1.0:
            raise ContractViolation("weight must lie in [0, 1]")
        if not self.problems:
            raise ContractViolation("need at least one inner problem")
        if self.meta_population < 1:
            raise ContractViolation("meta population must be at least 1")
        if self.runner is None:
            self.runner = run_algorithm

    @property
    def names(self) -> tuple:
        return tuple(self.bounds)

    @property
    def descriptor(self):
        return get_descriptor(self.algorithm)

    def to_params(self, values):
        """Parameter object from a mapping or a vector ordered like :attr:`names`."""
        if not isinstance(values, Mapping):
            values = dict(zip(self.names, np.asarray(values, dtype=float).tolist()))
        desc = self.descriptor
        fixed = {}
        for name, v in values.items():
            if name not in self.bounds:
                raise ContractViolation(f"parameter {name!r} is not being tuned")
            lo, hi = self.bounds[name]
            v = float(v)
            if desc.params_cls.spec(name).kind == "int":
                v = float(min(max(round(v), math.ceil(lo)), math.floor(hi)))
            if not lo <= v <= hi:
                raise ContractViolation(f"{name}={v} is outside the tuning bounds ({lo}, {hi})")
            fixed[name] = v
        return desc.default_params().replace(**fixed)


def _normalised_quality(record: RunRecord, problem: Problem) -> float:
    f_ref = problem.known_optimum[1] if problem.known_optimum is not None else 0.0
    gap = record.best_fitness - f_ref
    scale = record.init_mean_fitness - f_ref
    if not (math.isfinite(scale) and scale > 0):
        return gap
    return gap / scale


def meta_objective(params, task: TuningTask, stream: RandomStream, stats: Optional[dict] = None) -> float:
    """Scalarised tuning objective (lower is better).

    ``w * mean(quality) + (1 - w) * mean(cost)`` over ``repetitions`` runs on
    every problem.  Run ``r`` on problem ``p`` always uses substream
    ``(p, r)`` of ``stream``, so different parameter sets are compared on
    common random numbers.

    ``stats``, if given, is updated with ``inner_evaluations`` and ``runs``.
    """
    p = task.to_params(params)
    quality, cost = [], []
    evals = 0
    for pi, problem in enumerate(task.problems):
        target = None
        if problem.known_optimum is not None:
            target = problem.known_optimum[1] + task.target_tolerance
        for r in range(task.repetitions):
            rec = task.runner(task.algorithm, p, problem, task.inner_budget, stream.substream(pi, r), task.population_size)
            evals += rec.evaluations
            quality.append(_normalised_quality(rec, problem))
            hit = None if target is None else evals_to_target(rec, target)
            cost.append(1.0 if hit is None else hit / task.inner_budget)
    if stats is not None:
        stats["inner_evaluations"] = stats.get("inner_evaluations", 0) + evals
        stats["runs"] = stats.get("runs", 0) + len(quality)
    w = task.weight
    q = float(np.mean(quality)) if w > 0 else 0.0
    c = float(np.mean(cost)) if w < 1 else 0.0
    return w * q + (1.0 - w) * c


@dataclass(frozen=True)
class Trial:
    index: int
    params: dict
    value: float
    source: str  # "search" or "random"


@dataclass
class TuningResult:
    best_params: object
    best_value: float
    trials: list
    inner_evaluations: int
    mode: str  # "self" or "random"

    @property
    def trace(self) -> list:
        """Best meta-objective value after each trial."""
        return list(np.minimum.accumulate([t.value for t in self.trials]))


def self_tune(task: TuningTask, stream: RandomStream) -> TuningResult:
    """Tune ``task.algorithm`` with itself (default parameters) as the meta-optimiser.

    Exactly ``task.meta_budget`` parameter sets are scored.  When the budget
    is below ``task.meta_population`` (too small for one meta-generation), or
    when the meta-run ends early, the remaining trials are uniform random
    parameter sets.  The best trial wins; ties go to the earlier trial.
    """
    names = task.names
    lower = np.array([task.bounds[k][0] for k in names])
    upper = np.array([task.bounds[k][1] for k in names])
    inner_stream = stream.substream(_INNER_BRANCH)
    meta_stream = stream.substream(_META_BRANCH)
    trials: list[Trial] = []
    stats: dict = {}
    source = ["search"]

    def objective(x):
        chosen = {k: getattr(task.to_params(x), k) for k in names}
        value = meta_objective(chosen, task, inner_stream, stats)
        trials.append(Trial(len(trials), chosen, float(value), source[0]))
        return value

    meta_problem = Problem(
        name=f"tune-{task.algorithm}",
        dimension=len(names),
        objective=objective,
        lower=lower,
        upper=upper,
    )
    desc = task.descriptor
    n_meta = max(task.meta_population, desc.min_population)
    mode = "random"
    if task.meta_budget >= n_meta:
        mode = "self"
        run_algorithm(desc, None, meta_problem, task.meta_budget, meta_stream, n_meta)
    source[0] = "random"
    missing = task.meta_budget - len(trials)
    if missing > 0:
        for x in meta_stream.uniform(lower, upper, size=(missing, len(names))):
            objective(x)
    values = np.array([t.value for t in trials])
    best = int(np.argmin(values))
    return TuningResult(
        best_params=task.to_params(trials[best].params),
        best_value=float(values[best]),
        trials=trials,
        inner_evaluations=int(stats.get("inner_evaluations", 0)),
        mode=mode,
    )


def write_trials_csv(result: TuningResult, names: Sequence[str], fh) -> None:
    """CSV with header ``trial, <parameter names...>, meta_objective``."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["trial", *names, "meta_objective"])
    for t in result.trials:
        w.writerow([t.index, *(repr(float(t.params[k])) for k in names), repr(float(t.value))])
