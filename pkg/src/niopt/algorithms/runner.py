"""Generic seeded run loop shared by all algorithms."""

from __future__ import annotations

import math
import time
from typing import Mapping, Optional

import numpy as np

from ..core import ContractViolation, Evaluator, Problem, RandomStream, RunRecord, init_population
from ..schedules import Schedule
from .registry import get_descriptor
from .steps import PointState

__all__ = ["run", "MAX_IDLE_ITERATIONS"]

# a step that spends no evaluations (e.g. every move rejected under the
# "reject" policy) still counts as an iteration; this many in a row ends the run
MAX_IDLE_ITERATIONS = 1000


def _scheduled(params, schedules, t, t_max):
    if not schedules:
        return params
    return params.replace(**{k: s.value(min(t, t_max), t_max) for k, s in schedules.items()})


def run(
    algorithm,
    params=None,
    problem: Problem = None,
    budget: int = 10_000,
    stream: Optional[RandomStream] = None,
    population_size: int = 25,
    schedules: Optional[Mapping[str, Schedule]] = None,
    seed: Optional[int] = None,
    target: Optional[float] = None,
) -> RunRecord:
    """Run one algorithm on one problem until the evaluation budget is spent.

    Parameters
    ----------
    algorithm : str or AlgorithmDescriptor
    params : parameter dataclass, mapping or None
        ``None`` uses the defaults; a mapping is validated against the schema.
    problem : Problem
    budget : int
        Maximum number of objective evaluations (``>= population_size``).
    stream : RandomStream
        Source of every random draw in the run.
    population_size : int
        ``n``.  Point-based methods (SA, gradient descent) draw ``n`` uniform
        points and start from the best of them.
    schedules : mapping, optional
        Parameter name -> :class:`~niopt.schedules.Schedule`, driven by the
        evaluation count out of ``budget``.
    seed : int, optional
        Recorded in the result; defaults to the stream's master seed.
    target : float, optional
        Fixed-target mode: stop as soon as the best-so-far fitness is
        ``<= target``.  The record then holds the evaluations actually spent.

    Returns
    -------
    RunRecord
    """
    desc = get_descriptor(algorithm)
    if problem is None:
        raise ContractViolation("a problem is required")
    if params is None:
        params = desc.default_params()
    elif isinstance(params, Mapping):
        params = desc.make_params(params)
    elif not isinstance(params, desc.params_cls):
        raise ContractViolation(f"parameters for {desc.name} must be {desc.params_cls.__name__}")
    if schedules:
        for key in schedules:
            desc.params_cls.spec(key)
    n = int(population_size)
    if n < desc.min_population:
        raise ContractViolation(f"{desc.name} needs a population of at least {desc.min_population}")
    if budget < n:
        raise ContractViolation(f"budget {budget} is below population size {n}")
    if stream is None:
        stream = RandomStream(0 if seed is None else seed)
    if seed is None:
        seed = stream.master_seed

    t0 = time.perf_counter()
    ev = Evaluator(problem, budget)
    uses_v = desc.uses_velocity
    pop = init_population(problem, n, stream, ev, velocity=uses_v, personal_best=desc.personal_best)
    init_mean = float(np.mean(pop.fitness[np.isfinite(pop.fitness)])) if np.isfinite(pop.fitness).any() else math.inf

    if desc.kind == "point":
        b = int(np.argmin(pop.fitness))
        temperature = getattr(params, "initial_temperature", math.nan)
        state = PointState(pop.positions[b].copy(), float(pop.fitness[b]), temperature)
    else:
        state = pop

    per_step = desc.evals_per_step(n, problem.dimension)
    idle = 0
    while ev.remaining > 0:
        if target is not None and ev.best_fitness <= target:
            break
        if desc.name == "gd" and ev.remaining < per_step:
            break
        p = _scheduled(params, schedules, ev.count, budget)
        before = ev.count
        state = desc.step(state, p, stream, ev)
        idle = idle + 1 if ev.count == before else 0
        if idle >= MAX_IDLE_ITERATIONS:
            break

    return RunRecord(
        algorithm=desc.name,
        problem=problem.name,
        seed=int(seed),
        budget=int(budget),
        evaluations=ev.count,
        best_fitness=float(ev.best_fitness),
        best_position=ev.best_position.copy(),
        trace=list(ev.trace),
        params=params.as_dict(),
        init_mean_fitness=init_mean,
        wall_time=time.perf_counter() - t0,
    )
