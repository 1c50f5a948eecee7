"""Test problems: the multi-island constrained landscape and a smooth suite."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .core import ContractViolation, Problem

__all__ = [
    "IslandFunctionParams",
    "multi_island_value",
    "multi_island_feasible",
    "island_peak_oracle",
    "island_repair",
    "island_problem",
    "wrap_constrained",
    "sphere",
    "rastrigin",
    "ackley",
    "rosenbrock",
    "STANDARD_FUNCTIONS",
    "standard_problem",
    "make_problem",
    "PROBLEM_NAMES",
]


@dataclass(frozen=True)
class IslandFunctionParams:
    """Grid half-extent ``N`` and sharpness ``a``; islands have L1 radius ``1/a``."""

    N: int = 100
    a: float = 10.0

    def __post_init__(self):
        if int(self.N) != self.N or self.N < 1:
            raise ContractViolation(f"N must be a positive integer, got {self.N}")
        if not self.a > 0:
            raise ContractViolation(f"a must be positive, got {self.a}")

    @property
    def b(self) -> float:
        return 1.0 / self.a

    @property
    def island_count(self) -> int:
        return (2 * self.N + 1) ** 2


def multi_island_value(x, y, params: IslandFunctionParams = IslandFunctionParams()):
    """Sum of ``(|i|+|j|) exp(-a(x-i)^2 - a(y-j)^2)`` over the integer grid.

    Terms below ``exp(-745)`` are skipped, which changes nothing at double
    precision.  Accepts scalars or equally shaped arrays.
    """
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    shape = np.broadcast_shapes(xs.shape, ys.shape)
    xs = np.ascontiguousarray(np.broadcast_to(xs, shape).ravel())
    ys = np.ascontiguousarray(np.broadcast_to(ys, shape).ravel())
    out = kernels.island_sum(xs, ys, int(params.N), float(params.a), kernels.EXP_CUTOFF)
    return float(out[0]) if shape == () else out.reshape(shape)


def _nearest_centre(x, y, N):
    return np.clip(np.rint(x), -N, N), np.clip(np.rint(y), -N, N)


def multi_island_feasible(x, y, params: IslandFunctionParams = IslandFunctionParams()):
    """True where the point lies in the closed L1 diamond of some grid point.

    Islands are disjoint whenever ``b < 1/2``, so checking the nearest grid
    point is exact.
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    ci, cj = _nearest_centre(x, y, params.N)
    ok = np.abs(x - ci) + np.abs(y - cj) <= params.b
    return bool(ok) if ok.ndim == 0 else ok


def island_peak_oracle(i: int, j: int, params: IslandFunctionParams = IslandFunctionParams()) -> float:
    if abs(i) > params.N or abs(j) > params.N:
        raise ContractViolation(f"island ({i}, {j}) is outside the grid |i|, |j| <= {params.N}")
    return multi_island_value(float(i), float(j), params)


def _project_l1_ball(d, radius):
    # Euclidean projection of each row of d onto {z : |z|_1 <= radius}
    u = np.abs(d)
    inside = u.sum(axis=1) <= radius
    srt = -np.sort(-u, axis=1)
    css = np.cumsum(srt, axis=1) - radius
    k = np.arange(1, d.shape[1] + 1)
    cond = srt - css / k > 0
    rho = d.shape[1] - 1 - np.argmax(cond[:, ::-1], axis=1)
    tau = css[np.arange(d.shape[0]), rho] / (rho + 1)
    proj = np.sign(d) * np.maximum(u - tau[:, None], 0.0)
    return np.where(inside[:, None], d, proj)


def island_repair(points, params: IslandFunctionParams = IslandFunctionParams()) -> np.ndarray:
    """Snap ``(m, 2)`` points onto the diamond of their nearest grid point."""
    P = np.atleast_2d(np.asarray(points, dtype=float))
    ci, cj = _nearest_centre(P[:, 0], P[:, 1], params.N)
    centre = np.stack([ci, cj], axis=1)
    offset = _project_l1_ball(P - centre, params.b)
    out = centre + offset
    # rounding in ``centre + offset`` can leave a boundary point a few ulps
    # outside the diamond; pull such points in by a relative 1e-12 at a time
    for _ in range(8):
        bad = ~multi_island_feasible(out[:, 0], out[:, 1], params)
        if not bad.any():
            break
        offset[bad] *= 1.0 - 1e-12
        out[bad] = centre[bad] + offset[bad]
    return out


def island_problem(params: IslandFunctionParams = IslandFunctionParams(), policy=None) -> Problem:
    """The island landscape as a minimisation problem (objective is ``-f``).

    The known optimum is the corner peak at ``(N, N)``; the other three
    corners tie with it.
    """
    N = params.N
    edge = N + params.b

    def objective(X):
        X = np.asarray(X, dtype=float)
        return -multi_island_value(X[..., 0], X[..., 1], params)

    def feasible(X):
        X = np.atleast_2d(X)
        return multi_island_feasible(X[:, 0], X[:, 1], params)

    def repair(X):
        return island_repair(X, params)

    corner = np.array([float(N), float(N)])
    return Problem(
        name="island",
        dimension=2,
        objective=objective,
        lower=np.full(2, -edge),
        upper=np.full(2, edge),
        feasible=feasible,
        known_optimum=(corner, -island_peak_oracle(N, N, params)),
        vectorized=True,
        policy=policy,
        repair=repair,
    )


def wrap_constrained(base: Problem, policy: str) -> Problem:
    """Attach a constraint policy to a problem with a feasibility predicate.

    ``"reject"``: infeasible candidates are never evaluated and the move that
    produced them is skipped.  ``"repair"``: candidates are mapped onto the
    feasible set before evaluation.
    """
    if policy not in ("reject", "repair"):
        raise ContractViolation(f"unknown constraint policy {policy!r}")
    if base.feasible is None:
        raise ContractViolation("problem has no feasibility predicate")
    if policy == "repair" and base.repair is None:
        raise ContractViolation("problem has no repair map")
    return base.replace(policy=policy)


def sphere(x):
    x = np.asarray(x, dtype=float)
    return (x * x).sum(axis=-1)


def rastrigin(x):
    x = np.asarray(x, dtype=float)
    return 10.0 * x.shape[-1] + np.sum(x * x - 10.0 * np.cos(2 * np.pi * x), axis=-1)


def ackley(x):
    x = np.asarray(x, dtype=float)
    d = x.shape[-1]
    r = np.sqrt(np.sum(x * x, axis=-1) / d)
    c = np.sum(np.cos(2 * np.pi * x), axis=-1) / d
    return -20.0 * np.exp(-0.2 * r) - np.exp(c) + 20.0 + math.e


def rosenbrock(x):
    x = np.asarray(x, dtype=float)
    a = x[..., :-1]
    b = x[..., 1:]
    return np.sum(100.0 * (b - a * a) ** 2 + (1.0 - a) ** 2, axis=-1)


# name -> (function, lower, upper, optimum position for a given dimension)
STANDARD_FUNCTIONS = {
    "sphere": (sphere, -5.12, 5.12, np.zeros),
    "rastrigin": (rastrigin, -5.12, 5.12, np.zeros),
    "ackley": (ackley, -32.768, 32.768, np.zeros),
    "rosenbrock": (rosenbrock, -5.0, 10.0, np.ones),
}

PROBLEM_NAMES = (*STANDARD_FUNCTIONS, "island")


def standard_problem(name: str, dimension: int) -> Problem:
    try:
        fn, lo, hi, opt = STANDARD_FUNCTIONS[name]
    except KeyError:
        raise ContractViolation(f"unknown problem {name!r}") from None
    if name == "rosenbrock" and dimension < 2:
        raise ContractViolation("rosenbrock needs dimension >= 2")
    x_star = opt(dimension)
    return Problem(
        name=name,
        dimension=dimension,
        objective=fn,
        lower=np.full(dimension, lo),
        upper=np.full(dimension, hi),
        known_optimum=(x_star, 0.0),
        vectorized=True,
    )


def make_problem(name: str, dimension: int = 2, N: int = 100, a: float = 10.0, policy=None) -> Problem:
    """Build any named problem.  ``N``, ``a`` and ``policy`` apply to ``island``."""
    if name == "island":
        if dimension != 2:
            raise ContractViolation("island is two-dimensional")
        return island_problem(IslandFunctionParams(N, a), policy)
    if policy is not None:
        raise ContractViolation(f"problem {name!r} has no constraints to apply a policy to")
    return standard_problem(name, dimension)
