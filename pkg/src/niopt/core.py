"""Shared data model: problems, populations, evaluation accounting and RNG streams.

Minimisation is canonical throughout.  Positions are float64 numpy arrays;
a population stores its members row-wise so that algorithm steps can work
on whole arrays at once.
"""

from __future__ import annotations

import dataclasses
import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

__all__ = [
    "ContractViolation",
    "Problem",
    "Individual",
    "Population",
    "RandomStream",
    "derive_seed",
    "Evaluator",
    "RunRecord",
    "evaluate",
    "clamp_to_bounds",
    "select_best",
    "update_personal_best",
    "apply_increment",
    "init_population",
]


class ContractViolation(ValueError):
    """A documented precondition of an operation was not met."""


@dataclass(frozen=True)
class Problem:
    """A box-bounded minimisation problem.

    Parameters
    ----------
    name : str
        Identifier used in reports.
    dimension : int
        Number of decision variables ``D``.
    objective : callable
        Maps a length-``D`` array to a float.  When ``vectorized`` is true it
        must also accept an ``(m, D)`` array and return ``m`` values.
    lower, upper : array_like
        Box bounds, ``lower < upper`` componentwise.
    feasible : callable, optional
        Predicate on an ``(m, D)`` array returning ``m`` booleans.
    known_optimum : tuple, optional
        ``(x_star, f_min)``.
    policy : {None, "reject", "repair"}
        How candidates failing ``feasible`` are handled (see
        :func:`niopt.benchmarks.wrap_constrained`).
    repair : callable, optional
        Maps an ``(m, D)`` array onto the feasible set; required by ``"repair"``.
    """

    name: str
    dimension: int
    objective: Callable
    lower: np.ndarray
    upper: np.ndarray
    feasible: Optional[Callable] = None
    known_optimum: Optional[tuple] = None
    vectorized: bool = False
    policy: Optional[str] = None
    repair: Optional[Callable] = None

    def __post_init__(self):
        if int(self.dimension) < 1:
            raise ContractViolation(f"dimension must be positive, got {self.dimension}")
        lower = np.broadcast_to(np.asarray(self.lower, dtype=float), (self.dimension,)).copy()
        upper = np.broadcast_to(np.asarray(self.upper, dtype=float), (self.dimension,)).copy()
        if not np.all(lower < upper):
            raise ContractViolation("lower bound must be strictly below upper bound")
        lower.flags.writeable = False
        upper.flags.writeable = False
        object.__setattr__(self, "dimension", int(self.dimension))
        object.__setattr__(self, "lower", lower)
        object.__setattr__(self, "upper", upper)
        if self.known_optimum is not None:
            x_star, f_min = self.known_optimum
            x_star = np.asarray(x_star, dtype=float).reshape(self.dimension)
            object.__setattr__(self, "known_optimum", (x_star, float(f_min)))
        if self.policy not in (None, "reject", "repair"):
            raise ContractViolation(f"unknown constraint policy {self.policy!r}")

    @property
    def span(self) -> np.ndarray:
        return self.upper - self.lower

    def replace(self, **changes) -> "Problem":
        return dataclasses.replace(self, **changes)


def derive_seed(master_seed: int, *keys: int) -> int:
    """Mix a master seed and integer keys into an independent 64-bit seed.

    Uses numpy's ``SeedSequence`` hashing, so ``derive_seed(s, a, b)`` does not
    depend on how many other seeds were derived before it.
    """
    ss = np.random.SeedSequence([int(master_seed) & 0xFFFFFFFFFFFFFFFF, *map(int, keys)])
    return int(ss.generate_state(1, dtype=np.uint64)[0])


class RandomStream:
    """Seedable source of every random draw made by the library.

    Identical ``(master_seed, stream_id)`` pairs give identical sequences.
    Substreams created with :meth:`substream` are independent of each other
    and of the order in which they are created.
    """

    def __init__(self, master_seed: int = 0, stream_id: int = 0):
        self.master_seed = int(master_seed)
        self.stream_id = int(stream_id)
        ss = np.random.SeedSequence([self.master_seed & 0xFFFFFFFFFFFFFFFF, self.stream_id])
        self.generator = np.random.Generator(np.random.PCG64(ss))

    def __repr__(self):
        return f"RandomStream(master_seed={self.master_seed}, stream_id={self.stream_id})"

    def substream(self, *keys: int) -> "RandomStream":
        return RandomStream(derive_seed(self.master_seed, self.stream_id, *keys))

    def uniform(self, low=0.0, high=1.0, size=None):
        return self.generator.uniform(low, high, size)

    def random(self, size=None):
        return self.generator.random(size)

    def normal(self, size=None):
        return self.generator.standard_normal(size)

    def integers(self, low, high=None, size=None):
        return self.generator.integers(low, high, size)


@dataclass
class Individual:
    position: np.ndarray
    fitness: float = math.inf
    velocity: Optional[np.ndarray] = None
    best_position: Optional[np.ndarray] = None
    best_fitness: Optional[float] = None


@dataclass
class Population:
    """``n`` candidate solutions stored row-wise.

    ``velocities`` and the personal-best arrays are ``None`` for algorithms
    that do not use them.
    """

    positions: np.ndarray
    fitness: np.ndarray
    velocities: Optional[np.ndarray] = None
    best_positions: Optional[np.ndarray] = None
    best_fitness: Optional[np.ndarray] = None
    iteration: int = 0

    @property
    def size(self) -> int:
        return self.positions.shape[0]

    @property
    def dimension(self) -> int:
        return self.positions.shape[1]

    @property
    def best_index(self) -> int:
        return select_best(self)[0]

    def member(self, i: int) -> Individual:
        def row(a):
            return None if a is None else a[i].copy()

        return Individual(
            position=self.positions[i].copy(),
            fitness=float(self.fitness[i]),
            velocity=row(self.velocities),
            best_position=row(self.best_positions),
            best_fitness=None if self.best_fitness is None else float(self.best_fitness[i]),
        )

    def copy(self) -> "Population":
        def cp(a):
            return None if a is None else a.copy()

        return Population(
            positions=self.positions.copy(),
            fitness=self.fitness.copy(),
            velocities=cp(self.velocities),
            best_positions=cp(self.best_positions),
            best_fitness=cp(self.best_fitness),
            iteration=self.iteration,
        )


class Evaluator:
    """Counts objective calls for one run and tracks the best-so-far point.

    Every call that reaches the objective increments :attr:`count` by one.
    Non-finite objective values are recorded as ``+inf`` and tallied in
    :attr:`invalid`.  The best-so-far trace holds ``(evaluation index,
    fitness)`` pairs at every strict improvement.
    """

    def __init__(self, problem: Problem, budget: Optional[int] = None):
        self.problem = problem
        self.budget = budget
        self.count = 0
        self.invalid = 0
        self.best_fitness = math.inf
        self.best_position: Optional[np.ndarray] = None
        self.trace: list[tuple[int, float]] = []

    @property
    def remaining(self) -> int:
        if self.budget is None:
            return 1 << 62
        return max(self.budget - self.count, 0)

    def _check(self, X):
        if X.shape[-1] != self.problem.dimension:
            raise ContractViolation(
                f"position has length {X.shape[-1]}, problem dimension is {self.problem.dimension}"
            )

    def many(self, X) -> np.ndarray:
        """Evaluate the rows of ``X`` (counted as ``len(X)`` evaluations)."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        self._check(X)
        m = X.shape[0]
        if m == 0:
            return np.empty(0)
        if self.budget is not None and m > self.remaining:
            raise ContractViolation(f"{m} evaluations requested, {self.remaining} left in budget")
        problem = self.problem
        if problem.vectorized:
            values = np.asarray(problem.objective(X), dtype=float).reshape(m)
        else:
            values = np.array([float(problem.objective(x)) for x in X])
        bad = ~np.isfinite(values)
        if bad.any():
            self.invalid += int(bad.sum())
            values = np.where(bad, math.inf, values)
        start = self.count
        self.count += m
        if not self.trace:
            self.trace.append((start + 1, float(values[0])))
            self.best_fitness = float(values[0])
            self.best_position = X[0].copy()
        best = self.best_fitness
        for idx in np.flatnonzero(values < best):
            if values[idx] < best:
                best = float(values[idx])
                self.trace.append((start + int(idx) + 1, best))
                self.best_position = X[idx].copy()
        self.best_fitness = best
        return values

    def __call__(self, x) -> float:
        # single-point path, kept lean because SA and FA call it in their inner loops
        x = np.asarray(x, dtype=float)
        if x.ndim != 1:
            raise ContractViolation("expected a single position vector")
        self._check(x)
        if self.budget is not None and self.count >= self.budget:
            raise ContractViolation("evaluation budget exhausted")
        value = float(self.problem.objective(x))
        if not math.isfinite(value):
            self.invalid += 1
            value = math.inf
        self.count += 1
        if not self.trace or value < self.best_fitness:
            self.best_fitness = value
            self.best_position = x.copy()
            self.trace.append((self.count, value))
        return value

    def admit(self, X):
        """Apply the problem's constraint policy to candidate rows.

        Returns ``(X_admitted, ok)``.  Rows with ``ok`` false must not be
        evaluated; the move they represent is skipped.
        """
        problem = self.problem
        ok = np.ones(X.shape[0], dtype=bool)
        if problem.policy is None or problem.feasible is None:
            return X, ok
        if problem.policy == "repair":
            return problem.repair(X), ok
        return X, np.asarray(problem.feasible(X), dtype=bool)

    def evaluate_some(self, X, ok=None):
        """Evaluate admissible rows of ``X`` in index order, within budget.

        Returns ``(indices, values)`` for the rows actually evaluated.
        """
        idx = np.arange(X.shape[0]) if ok is None else np.flatnonzero(ok)
        idx = idx[: self.remaining]
        return idx, self.many(X[idx])


@dataclass
class RunRecord:
    """Outcome of one seeded optimisation run."""

    algorithm: str
    problem: str
    seed: int
    budget: int
    evaluations: int
    best_fitness: float
    best_position: np.ndarray
    trace: list = field(default_factory=list)
    params: dict = field(default_factory=dict)
    init_mean_fitness: float = math.nan
    wall_time: float = 0.0


def evaluate(evaluator: Evaluator, position) -> float:
    """Objective value at ``position``; adds exactly one to the evaluation count."""
    return evaluator(position)


def clamp_to_bounds(position, problem: Problem) -> np.ndarray:
    position = np.asarray(position, dtype=float)
    if position.shape[-1] != problem.dimension:
        raise ContractViolation("position length does not match problem dimension")
    return np.clip(position, problem.lower, problem.upper)


def apply_increment(position, delta, problem: Problem) -> np.ndarray:
    """``clamp(position + delta)`` with a unit time step."""
    delta = np.asarray(delta, dtype=float)
    if not np.all(np.isfinite(delta)):
        raise ContractViolation("increment contains non-finite components")
    return clamp_to_bounds(np.asarray(position, dtype=float) + delta, problem)


def select_best(population: Population) -> tuple[int, Individual]:
    """Index and copy of the lowest-fitness member (lowest index on ties)."""
    if population.size == 0:
        raise ContractViolation("empty population")
    if np.isnan(population.fitness).any():
        raise ContractViolation("population has NaN fitness")
    i = int(np.argmin(population.fitness))
    return i, population.member(i)


def update_personal_best(individual: Individual) -> Individual:
    if individual.best_fitness is None or individual.fitness < individual.best_fitness:
        return dataclasses.replace(
            individual,
            best_position=individual.position.copy(),
            best_fitness=float(individual.fitness),
        )
    return individual


def init_population(
    problem: Problem,
    n: int,
    stream: RandomStream,
    evaluator: Evaluator,
    velocity: bool = False,
    personal_best: bool = False,
) -> Population:
    """Uniform positions inside the box, zero velocities, ``n`` evaluations.

    With the ``"reject"`` policy infeasible draws are redrawn (not evaluated);
    with ``"repair"`` they are repaired.
    """
    if n < 1:
        raise ContractViolation("population size must be at least 1")
    if evaluator.remaining < n:
        raise ContractViolation(f"budget {evaluator.budget} is below population size {n}")
    X = stream.uniform(problem.lower, problem.upper, size=(n, problem.dimension))
    X, ok = evaluator.admit(X)
    attempts = 0
    while not ok.all():
        attempts += 1
        if attempts > 100_000:
            raise ContractViolation("could not sample a feasible initial population")
        bad = np.flatnonzero(~ok)
        redraw = stream.uniform(problem.lower, problem.upper, size=(bad.size, problem.dimension))
        X[bad] = redraw
        ok[bad] = np.asarray(problem.feasible(redraw), dtype=bool)
    F = evaluator.many(X)
    pop = Population(positions=X, fitness=F)
    if velocity:
        pop.velocities = np.zeros_like(X)
    if personal_best:
        pop.best_positions = X.copy()
        pop.best_fitness = F.copy()
    return pop
