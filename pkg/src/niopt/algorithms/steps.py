"""One iteration of each algorithm, written as ``x <- x + dx`` (and ``v <- v + dv``).

Every step takes the current state, a typed parameter set, a
:class:`~niopt.core.RandomStream` and the run's :class:`~niopt.core.Evaluator`,
and returns a new state.  The random draws an iteration needs are taken up
front in a fixed order, so an iteration consumes the same part of the stream
whatever the remaining budget is; when the budget runs out mid-iteration only
the leading members (in index order) are evaluated and the rest are left
unchanged.

The small pure functions (``de_trial``, ``pso_velocity`` ...) hold the update
formulas and take explicit random numbers; the steps call them on whole
arrays.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .. import kernels
from ..core import ContractViolation, Evaluator, Population, RandomStream
from ..stochastic import mantegna_step, mantegna_sigma
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

__all__ = [
    "PointState",
    "distinct_partners",
    "heaviside",
    "de_trial",
    "pso_velocity",
    "fa_increment",
    "ba_velocity",
    "cs_increment",
    "fpa_increment",
    "single_point_crossover",
    "metropolis_accept",
    "numerical_gradient",
    "gradient_step",
    "de_step",
    "pso_step",
    "fa_step",
    "ba_step",
    "cs_step",
    "fpa_step",
    "ga_step",
    "sa_step",
    "gd_step",
]


@dataclass
class PointState:
    """Single-point search state (SA, gradient descent)."""

    position: np.ndarray
    fitness: float
    temperature: float = math.nan
    iteration: int = 0


# ---------------------------------------------------------------- formulas


def heaviside(z):
    """``1`` where ``z > 0`` else ``0`` (so ``H(0) = 0``)."""
    return (np.asarray(z) > 0).astype(float)


def de_trial(xi, xj, xk, F):
    return np.asarray(xi) + F * (np.asarray(xj) - np.asarray(xk))


def pso_velocity(x, v, g_best, p_best, eps1, eps2, alpha, beta, inertia=1.0):
    """``inertia*v + alpha*eps1*(g* - x) + beta*eps2*(x* - x)``."""
    dv = alpha * eps1 * (g_best - x) + beta * eps2 * (p_best - x)
    return inertia * v + dv


def fa_increment(xi, xj, beta0, gamma, alpha, eps):
    """Pairwise firefly move of ``xi`` towards a brighter ``xj``."""
    xi = np.asarray(xi, dtype=float)
    diff = np.asarray(xj, dtype=float) - xi
    return beta0 * math.exp(-gamma * float(diff @ diff)) * diff + alpha * np.asarray(eps)


def ba_velocity(x, v, x_star, beta_draw, f_min, f_max):
    """``v + (x - x*) * (f_min + beta*(f_max - f_min))`` with frequency per row."""
    freq = f_min + np.asarray(beta_draw) * (f_max - f_min)
    freq = freq[..., None] if np.ndim(freq) and np.ndim(x) > 1 else freq
    return v + (x - x_star) * freq


def cs_increment(xj, xk, alpha, s, p_a, eps):
    gate = heaviside(p_a - np.asarray(eps))
    scale = alpha * np.asarray(s) * gate
    if np.ndim(scale) and np.ndim(xj) > 1:
        scale = scale[:, None]
    return scale * (np.asarray(xj) - np.asarray(xk))


def fpa_increment(xi, g_best, xj, xk, r, p, gamma, L, eps):
    """Global Levy move towards ``g*`` when ``r < p``, otherwise a local mix."""
    xi = np.asarray(xi, dtype=float)
    r = np.asarray(r)
    eps = np.asarray(eps)
    glob = gamma * np.asarray(L) * (g_best - xi)
    if eps.ndim and xi.ndim > 1:
        eps = eps[:, None]
        r = r[:, None]
    local = eps * (np.asarray(xj) - np.asarray(xk))
    return np.where(r < p, glob, local)


def single_point_crossover(a, b, cut: int):
    a = np.asarray(a)
    return np.concatenate([a[:cut], np.asarray(b)[cut:]])


def metropolis_accept(f_old: float, f_new: float, temperature: float, u: float) -> bool:
    if f_new <= f_old:
        return True
    d = f_new - f_old
    if d > 745.0 * temperature:
        return False
    return u < math.exp(-d / temperature)


def distinct_partners(stream: RandomStream, n: int, count: int = 2) -> tuple:
    """For each member ``i``, ``count`` distinct random indices other than ``i``.

    Every ordered tuple of distinct partners is equally likely.  Partners are
    drawn as cyclic offsets from ``i``: offset ``c`` is uniform over the
    ``n - 1 - c`` offsets not yet taken.
    """
    if n <= count:
        raise ContractViolation(f"need at least {count + 1} members, got {n}")
    draws = stream.random((count, n))
    taken = []
    out = []
    base = np.arange(n)
    for c in range(count):
        off = 1 + np.floor(draws[c] * (n - 1 - c)).astype(np.int64)
        # skip over offsets already used, smallest first
        for prev in _sorted_rows(taken):
            off = off + (off >= prev)
        taken.append(off)
        out.append((base + off) % n)
    return tuple(out)


def _sorted_rows(rows):
    if not rows:
        return []
    return list(np.sort(np.stack(rows), axis=0))


def _clip(X, ev: Evaluator):
    # np.minimum/np.maximum: same result as np.clip with less call overhead
    return np.minimum(np.maximum(X, ev.problem.lower), ev.problem.upper)


# ---------------------------------------------------------------- gradient


def numerical_gradient(ev: Evaluator, position) -> np.ndarray:
    """Central differences with ``h = 1e-6 * max(1, |x_d|)``; costs ``2D`` evaluations."""
    x = np.asarray(position, dtype=float)
    D = x.size
    h = 1e-6 * np.maximum(1.0, np.abs(x))
    probes = np.repeat(x[None, :], 2 * D, axis=0)
    rows = np.arange(D)
    probes[2 * rows, rows] += h
    probes[2 * rows + 1, rows] -= h
    f = ev.many(probes)
    width = probes[2 * rows, rows] - probes[2 * rows + 1, rows]
    grad = (f[0::2] - f[1::2]) / width
    if not np.all(np.isfinite(grad)):
        raise ContractViolation("gradient is not finite at this position")
    return grad


def gradient_step(ev: Evaluator, position, eta: float) -> np.ndarray:
    """``clamp(x - eta * grad f(x))``."""
    if not eta > 0:
        raise ContractViolation("learning rate must be positive")
    x = np.asarray(position, dtype=float)
    return _clip(x - eta * numerical_gradient(ev, x), ev)


def gd_step(state: PointState, params: GDParams, stream: RandomStream, ev: Evaluator) -> PointState:
    """Gradient move from the current point; the new point costs one more evaluation."""
    x_new = gradient_step(ev, state.position, params.eta)
    cand, ok = ev.admit(x_new[None, :])
    if not ok[0] or ev.remaining == 0:
        return replace(state, iteration=state.iteration + 1)
    return PointState(cand[0], ev(cand[0]), state.temperature, state.iteration + 1)


# ---------------------------------------------------------------- population steps


def _greedy(pop: Population, cand, idx, fc):
    better = fc < pop.fitness[idx]
    take = idx[better]
    pop.positions[take] = cand[take]
    pop.fitness[take] = fc[better]
    return take


def de_step(pop: Population, params: DEParams, stream: RandomStream, ev: Evaluator) -> Population:
    """Mutation ``x_i + F (x_j - x_k)`` followed by greedy replacement."""
    n = pop.size
    if n < 4:
        raise ContractViolation("differential evolution needs at least 4 members")
    pop = pop.copy()
    X = pop.positions
    j, k = distinct_partners(stream, n, 2)
    cand, ok = ev.admit(_clip(de_trial(X, X[j], X[k], params.F), ev))
    idx, fc = ev.evaluate_some(cand, ok)
    _greedy(pop, cand, idx, fc)
    pop.iteration += 1
    return pop


def pso_step(pop: Population, params: PSOParams, stream: RandomStream, ev: Evaluator) -> Population:
    """Velocity update towards ``g*`` and ``x_i*``, then ``x <- x + v``.

    ``g*`` is the best personal best (lowest index on ties).
    """
    if pop.velocities is None or pop.best_positions is None:
        raise ContractViolation("particle swarm needs velocities and personal bests")
    pop = pop.copy()
    n, D = pop.positions.shape
    shape = (n, D) if params.per_coordinate else (n, 1)
    eps1 = stream.random(shape)
    eps2 = stream.random(shape)
    X, V, P = pop.positions, pop.velocities, pop.best_positions
    g = P[int(np.argmin(pop.best_fitness))]
    v_new = pso_velocity(X, V, g, P, eps1, eps2, params.alpha, params.beta, params.inertia)
    cand, ok = ev.admit(_clip(X + v_new, ev))
    idx, fc = ev.evaluate_some(cand, ok)
    X[idx] = cand[idx]
    V[idx] = v_new[idx]
    pop.fitness[idx] = fc
    improved = idx[fc < pop.best_fitness[idx]]
    P[improved] = X[improved]
    pop.best_fitness[improved] = pop.fitness[improved]
    pop.iteration += 1
    return pop


def fa_step(pop: Population, params: FAParams, stream: RandomStream, ev: Evaluator) -> Population:
    """Sequential sweep: each firefly moves towards every brighter one in index order.

    Each pairwise move adds a fresh ``alpha * N(0, I)`` kick.  A firefly's
    position is clamped and re-evaluated once its sweep is complete, before
    the next firefly moves; fireflies with no brighter neighbour stay put.
    """
    n, D = pop.positions.shape
    if n < 2:
        raise ContractViolation("firefly algorithm needs at least 2 members")
    pop = pop.copy()
    X, F = pop.positions, pop.fitness
    noise = stream.normal((n, n, D))
    for i in range(n):
        if ev.remaining == 0:
            break
        before = X[i].copy()
        if not kernels.fa_member_sweep(X, F, i, noise[i], params.beta0, params.gamma, params.alpha):
            continue
        cand, ok = ev.admit(_clip(X[i : i + 1], ev))
        if not ok[0]:
            X[i] = before
            continue
        X[i] = cand[0]
        F[i] = ev(X[i])
    pop.iteration += 1
    return pop


def ba_step(pop: Population, params: BAParams, stream: RandomStream, ev: Evaluator) -> Population:
    """Frequency-tuned velocity update with greedy acceptance.

    ``x_*`` is the population best at the start of the iteration.  A bat
    whose candidate is rejected (worse, or infeasible under ``reject``) keeps
    its position and has its velocity reset to zero.
    """
    if pop.velocities is None:
        raise ContractViolation("bat algorithm needs velocities")
    pop = pop.copy()
    X, V = pop.positions, pop.velocities
    x_star = X[int(np.argmin(pop.fitness))].copy()
    beta = stream.random(pop.size)
    v_new = ba_velocity(X, V, x_star, beta, params.f_min, params.f_max)
    cand, ok = ev.admit(_clip(X + v_new, ev))
    idx, fc = ev.evaluate_some(cand, ok)
    take = _greedy(pop, cand, idx, fc)
    V[take] = v_new[take]
    stalled = np.setdiff1d(idx, take)
    V[stalled] = 0.0
    if ev.problem.policy == "reject":
        V[~ok] = 0.0
    pop.iteration += 1
    return pop


def cs_step(pop: Population, params: CSParams, stream: RandomStream, ev: Evaluator) -> Population:
    """``dx = alpha * s * H(p_a - eps) * (x_j - x_k)`` with Levy ``s``, greedy.

    Members whose gate is closed do not move and are not evaluated.
    """
    n = pop.size
    if n < 3:
        raise ContractViolation("cuckoo search needs at least 3 members")
    pop = pop.copy()
    X = pop.positions
    j, k = distinct_partners(stream, n, 2)
    eps = stream.random(n)
    z = stream.normal((n, 2))
    s = mantegna_step(mantegna_sigma(params.lam) * z[:, 0], z[:, 1], params.lam)
    moving = heaviside(params.p_a - eps) > 0
    cand, ok = ev.admit(_clip(X + cs_increment(X[j], X[k], params.alpha, s, params.p_a, eps), ev))
    idx, fc = ev.evaluate_some(cand, ok & moving)
    _greedy(pop, cand, idx, fc)
    pop.iteration += 1
    return pop


def fpa_step(pop: Population, params: FPAParams, stream: RandomStream, ev: Evaluator) -> Population:
    """Levy-flight global pollination with probability ``p``, else local; greedy."""
    n, D = pop.positions.shape
    if n < 3:
        raise ContractViolation("flower pollination needs at least 3 members")
    pop = pop.copy()
    X = pop.positions
    g = X[int(np.argmin(pop.fitness))].copy()
    r = stream.random(n)
    z = stream.normal((n, D, 2))
    L = mantegna_step(mantegna_sigma(params.lam) * z[..., 0], z[..., 1], params.lam)
    j, k = distinct_partners(stream, n, 2)
    eps = stream.random(n)
    dx = fpa_increment(X, g, X[j], X[k], r, params.p, params.gamma, L, eps)
    cand, ok = ev.admit(_clip(X + dx, ev))
    idx, fc = ev.evaluate_some(cand, ok)
    _greedy(pop, cand, idx, fc)
    pop.iteration += 1
    return pop


def ga_step(pop: Population, params: GAParams, stream: RandomStream, ev: Evaluator) -> Population:
    """Real-coded generation: elitism, rank-proportional parents, one-point
    crossover and per-coordinate Gaussian mutation.

    An offspring that cannot be evaluated (infeasible under ``reject`` or out
    of budget) is replaced by a copy of its first parent.
    """
    n, D = pop.positions.shape
    if n < 2:
        raise ContractViolation("genetic algorithm needs at least 2 members")
    elite = params.elite_count
    if elite >= n:
        raise ContractViolation(f"elite_count {elite} must be below population size {n}")
    X, F = pop.positions, pop.fitness
    order = np.argsort(F, kind="stable")
    m = n - elite

    weights = np.arange(n, 0, -1, dtype=float)
    cdf = np.cumsum(weights) / weights.sum()
    picks = np.minimum(np.searchsorted(cdf, stream.random((m, 2)), side="right"), n - 1)
    pa, pb = order[picks[:, 0]], order[picks[:, 1]]
    do_cross = stream.random(m) < params.crossover_rate
    cuts = stream.integers(1, D, size=m) if D > 1 else np.zeros(m, dtype=int)
    mut_mask = stream.random((m, D)) < params.mutation_rate
    kicks = stream.normal((m, D))

    from_b = (do_cross & (D > 1))[:, None] & (np.arange(D)[None, :] >= cuts[:, None])
    children = np.where(from_b, X[pb], X[pa])
    children = children + mut_mask * kicks * (params.mutation_scale * ev.problem.span)
    cand, ok = ev.admit(_clip(children, ev))
    idx, fc = ev.evaluate_some(cand, ok)

    new_X = np.empty_like(X)
    new_F = np.empty_like(F)
    new_X[:elite] = X[order[:elite]]
    new_F[:elite] = F[order[:elite]]
    off_X = X[pa].copy()
    off_F = F[pa].copy()
    off_X[idx] = cand[idx]
    off_F[idx] = fc
    new_X[elite:] = off_X
    new_F[elite:] = off_F
    return Population(new_X, new_F, iteration=pop.iteration + 1)


def sa_step(state: PointState, params: SAParams, stream: RandomStream, ev: Evaluator) -> PointState:
    """Isotropic Gaussian proposal, Metropolis acceptance, geometric cooling."""
    T = state.temperature
    if not T > 0:
        raise ContractViolation("temperature must be positive")
    g = stream.normal(state.position.size)
    u = stream.random()
    cand = _clip(state.position + params.step_scale * g, ev)
    x, f = state.position, state.fitness
    cand, ok = ev.admit(cand[None, :])
    if ok[0] and ev.remaining > 0:
        fc = ev(cand[0])
        if metropolis_accept(f, fc, T, u):
            x, f = cand[0], fc
    return PointState(x, f, T * params.cooling_factor, state.iteration + 1)
