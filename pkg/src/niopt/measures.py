"""Performance measures over sets of run records.

Accuracy (objective- and position-based success), fixed-budget statistics,
fixed-target cost and the per-problem ranking table.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Optional, Sequence

import numpy as np
from scipy.stats import rankdata

from .core import ContractViolation, Problem, RunRecord

__all__ = [
    "SuccessCriterion",
    "success_rate",
    "is_success",
    "FixedBudgetStats",
    "fixed_budget_stats",
    "evals_to_target",
    "RankingTable",
    "rank_algorithms",
    "REPORT_COLUMNS",
]

REPORT_COLUMNS = (
    "algorithm",
    "problem",
    "runs",
    "best",
    "worst",
    "mean",
    "std",
    "median",
    "success_rate_obj",
    "success_rate_pos",
    "mean_evals_to_target",
    "mean_rank",
)


@dataclass(frozen=True)
class SuccessCriterion:
    """``mode="objective"``: ``|f - f_min| <= delta``;
    ``mode="position"``: ``max_d |x_d - x*_d| <= delta`` (L-infinity)."""

    mode: str = "objective"
    delta: float = 1e-5

    def __post_init__(self):
        if self.mode not in ("objective", "position"):
            raise ContractViolation(f"unknown success mode {self.mode!r}")
        if not self.delta > 0:
            raise ContractViolation("success tolerance must be positive")


def _optimum(problem):
    if isinstance(problem, Problem):
        opt = problem.known_optimum
    else:
        opt = problem
    if opt is None:
        raise ContractViolation("success rate needs a known optimum")
    x_star, f_min = opt
    return np.asarray(x_star, dtype=float), float(f_min)


def is_success(record: RunRecord, criterion: SuccessCriterion, problem) -> bool:
    x_star, f_min = _optimum(problem)
    if criterion.mode == "objective":
        return abs(record.best_fitness - f_min) <= criterion.delta
    x = np.asarray(record.best_position, dtype=float)
    return float(np.max(np.abs(x - x_star))) <= criterion.delta


def success_rate(records: Sequence[RunRecord], criterion: SuccessCriterion, problem) -> float:
    """``N_s / N_r``: the fraction of runs meeting ``criterion``.

    ``problem`` is a :class:`Problem` with a known optimum or an
    ``(x_star, f_min)`` pair.
    """
    records = list(records)
    if not records:
        raise ContractViolation("need at least one run record")
    if len({r.problem for r in records}) > 1:
        raise ContractViolation("records come from different problems")
    hits = sum(is_success(r, criterion, problem) for r in records)
    return hits / len(records)


@dataclass(frozen=True)
class FixedBudgetStats:
    best: float
    worst: float
    mean: float
    sample_std: float
    median: float
    runs: int


def fixed_budget_stats(records: Sequence[RunRecord]) -> FixedBudgetStats:
    """Statistics of final best fitness across runs sharing one budget.

    The standard deviation uses divisor ``N_r - 1`` (0 for a single run).
    """
    records = list(records)
    if not records:
        raise ContractViolation("need at least one run record")
    budgets = {r.budget for r in records}
    if len(budgets) > 1:
        raise ContractViolation(f"records use different evaluation budgets {sorted(budgets)}")
    f = np.array([r.best_fitness for r in records], dtype=float)
    std = float(np.std(f, ddof=1)) if f.size > 1 else 0.0
    return FixedBudgetStats(
        best=float(f.min()),
        worst=float(f.max()),
        mean=float(f.mean()),
        sample_std=std,
        median=float(np.median(f)),
        runs=int(f.size),
    )


def evals_to_target(record, target: float) -> Optional[int]:
    """First evaluation count at which the best-so-far fitness is ``<= target``.

    ``record`` is a :class:`RunRecord` or a trace of ``(evals, fitness)``
    pairs.  Returns ``None`` when the target is never reached.
    """
    trace = record.trace if isinstance(record, RunRecord) else record
    for evals, fit in trace:
        if fit <= target:
            return int(evals)
    return None


@dataclass(frozen=True)
class RankingTable:
    """Per-problem ranks (1 = best, ties averaged) and mean rank per algorithm."""

    algorithms: tuple
    problems: tuple
    ranks: np.ndarray  # shape (algorithms, problems)

    @property
    def mean_rank(self) -> dict:
        return {a: float(self.ranks[i].mean()) for i, a in enumerate(self.algorithms)}

    def rank(self, algorithm, problem) -> float:
        return float(self.ranks[self.algorithms.index(algorithm), self.problems.index(problem)])


def rank_algorithms(stats: Mapping[tuple, float], algorithms: Optional[Iterable] = None, problems: Optional[Iterable] = None) -> RankingTable:
    """Rank algorithms per problem by a score (lower is better).

    ``stats`` maps ``(algorithm, problem)`` to a score, normally the mean
    final fitness.  Each problem column is ranked independently, so every
    column sums to ``m (m + 1) / 2``.
    """
    algorithms = tuple(dict.fromkeys(a for a, _ in stats)) if algorithms is None else tuple(algorithms)
    problems = tuple(dict.fromkeys(p for _, p in stats)) if problems is None else tuple(problems)
    if len(algorithms) < 2:
        raise ContractViolation("ranking needs at least two algorithms")
    scores = np.empty((len(algorithms), len(problems)))
    for i, a in enumerate(algorithms):
        for j, p in enumerate(problems):
            if (a, p) not in stats:
                raise ContractViolation(f"missing score for ({a!r}, {p!r})")
            v = float(stats[(a, p)])
            if math.isnan(v):
                raise ContractViolation(f"score for ({a!r}, {p!r}) is NaN")
            scores[i, j] = v
    ranks = np.column_stack([rankdata(scores[:, j], method="average") for j in range(len(problems))])
    return RankingTable(algorithms, problems, ranks.reshape(len(algorithms), len(problems)))
