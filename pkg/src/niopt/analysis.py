"""Stability and convergence analysis.

* contraction estimates for arbitrary position maps,
* eigenvalue (Lyapunov) stability of linear 2x2 recurrences,
* the linear bat-algorithm system ``Y_{k+1} = C Y_k + M g`` with ``Y = (x, v)``
  and its closed-form stability region,
* second-eigenvalue and empirical convergence rates of finite Markov chains.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

from .core import ContractViolation, RandomStream

__all__ = [
    "BASystemParams",
    "ba_system_matrix",
    "spectral_radius",
    "lyapunov_verdict",
    "ba_stability_region",
    "simulate_ba_system",
    "contraction_factor",
    "validate_transition_matrix",
    "markov_second_eigenvalue",
    "stationary_distribution",
    "ConvergenceEstimate",
    "empirical_convergence_rate",
    "stability_grid",
    "ASYMPTOTICALLY_STABLE",
    "MARGINALLY_STABLE",
    "UNSTABLE",
]

ASYMPTOTICALLY_STABLE = "asymptotically_stable"
MARGINALLY_STABLE = "marginally_stable"
UNSTABLE = "unstable"

EIGEN_TOL = 1e-12


@dataclass(frozen=True)
class BASystemParams:
    theta: float
    zeta: float
    g: float = 0.0

    def __post_init__(self):
        if not all(math.isfinite(v) for v in (self.theta, self.zeta, self.g)):
            raise ContractViolation("system parameters must be finite")


def ba_system_matrix(theta, zeta):
    """``C = [[1 - zeta, theta], [-zeta, theta]]`` and ``M = (zeta, zeta)``."""
    C = np.array([[1.0 - zeta, theta], [-zeta, theta]], dtype=float)
    M = np.array([zeta, zeta], dtype=float)
    return C, M


def _quadratic_radius(tr, det):
    # largest root modulus of l^2 - tr*l + det, evaluated without cancellation
    tr = np.asarray(tr, dtype=float)
    det = np.asarray(det, dtype=float)
    disc = tr * tr - 4.0 * det
    real = disc >= 0
    sq = np.sqrt(np.where(real, disc, 0.0))
    big = 0.5 * (np.abs(tr) + sq)  # |larger real root|
    complex_mod = np.sqrt(np.abs(det))
    return np.where(real, big, complex_mod)


def spectral_radius(C) -> float:
    """Largest eigenvalue modulus of a square matrix.

    2x2 matrices (or stacks of them, shape ``(..., 2, 2)``) use the closed
    form: real roots from the numerically stable quadratic formula, complex
    pairs from ``sqrt(det)``.  Other sizes use ``numpy.linalg.eigvals``.
    """
    C = np.asarray(C, dtype=float)
    if not np.all(np.isfinite(C)):
        raise ContractViolation("matrix entries must be finite")
    if C.shape[-2:] == (2, 2):
        tr = C[..., 0, 0] + C[..., 1, 1]
        det = C[..., 0, 0] * C[..., 1, 1] - C[..., 0, 1] * C[..., 1, 0]
        r = _quadratic_radius(tr, det)
        return float(r) if r.ndim == 0 else r
    if C.ndim != 2 or C.shape[0] != C.shape[1]:
        raise ContractViolation("expected a square matrix")
    return float(np.max(np.abs(np.linalg.eigvals(C))))


def lyapunov_verdict(C, tol: float = EIGEN_TOL) -> str:
    """Classify ``Y <- C Y`` by spectral radius: below, at (within ``tol``) or above 1."""
    rho = spectral_radius(C)
    if rho < 1.0 - tol:
        return ASYMPTOTICALLY_STABLE
    if rho <= 1.0 + tol:
        return MARGINALLY_STABLE
    return UNSTABLE


def ba_stability_region(theta, zeta):
    """Closed-form stability conditions of the linear bat system.

    ``-1 <= theta <= 1``, ``zeta >= 0`` and ``2*theta - zeta + 2 >= 0``, all
    inclusive.  These are the Jury conditions for the characteristic
    polynomial ``l^2 - (1 + theta - zeta) l + theta``.  Accepts scalars or
    arrays.
    """
    theta = np.asarray(theta, dtype=float)
    zeta = np.asarray(zeta, dtype=float)
    ok = (theta >= -1.0) & (theta <= 1.0) & (zeta >= 0.0) & (2.0 * theta - zeta + 2.0 >= 0.0)
    return bool(ok) if ok.ndim == 0 else ok


def simulate_ba_system(params: BASystemParams, x0: float, v0: float, k: int) -> np.ndarray:
    """Iterate ``Y_{j+1} = C Y_j + M g`` for ``k`` steps; returns ``(k+1, 2)`` states ``(x, v)``."""
    if k < 0:
        raise ContractViolation("number of steps must be non-negative")
    C, M = ba_system_matrix(params.theta, params.zeta)
    out = np.empty((k + 1, 2))
    out[0] = (x0, v0)
    shift = M * params.g
    with np.errstate(over="ignore", invalid="ignore"):
        for j in range(k):
            out[j + 1] = C @ out[j] + shift
    return out


def _euclidean(a, b):
    return np.linalg.norm(np.asarray(a, dtype=float) - np.asarray(b, dtype=float), axis=-1)


def contraction_factor(
    mapping: Callable,
    samples: int,
    stream: RandomStream,
    dimension: int = 1,
    low: float = -1.0,
    high: float = 1.0,
    metric: Optional[Callable] = None,
) -> float:
    """Largest observed ratio ``rho(A(x), A(y)) / rho(x, y)`` over random pairs.

    Pairs are drawn uniformly from ``[low, high]**dimension``; pairs closer
    than ``1e-12`` are skipped.  The result is an empirical lower bound on
    the Lipschitz constant of ``mapping``; a value below 1 is evidence that
    the map is a contraction.
    """
    if samples < 1:
        raise ContractViolation("need at least one sample pair")
    metric = metric or _euclidean
    X = stream.uniform(low, high, size=(samples, dimension))
    Y = stream.uniform(low, high, size=(samples, dimension))
    best = -math.inf
    for x, y in zip(X, Y):
        d = float(metric(x, y))
        if d < 1e-12:
            continue
        best = max(best, float(metric(mapping(x), mapping(y))) / d)
    if best == -math.inf:
        raise ContractViolation("no sample pair had positive distance")
    return best


def validate_transition_matrix(P, tol: float = 1e-12) -> np.ndarray:
    P = np.asarray(P, dtype=float)
    if P.ndim != 2 or P.shape[0] != P.shape[1] or P.shape[0] < 2:
        raise ContractViolation("transition matrix must be square with at least 2 states")
    if not np.all(np.isfinite(P)) or np.any(P < 0) or np.any(P > 1):
        raise ContractViolation("transition probabilities must lie in [0, 1]")
    if np.any(np.abs(P.sum(axis=1) - 1.0) > tol):
        raise ContractViolation("rows of a transition matrix must sum to 1")
    return P


def stationary_distribution(P) -> np.ndarray:
    """Left eigenvector of ``P`` for eigenvalue 1, normalised to sum to 1."""
    P = validate_transition_matrix(P)
    m = P.shape[0]
    # (P^T - I) pi = 0 with one balance equation swapped for sum(pi) = 1
    A = P.T - np.eye(m)
    A[-1] = 1.0
    b = np.zeros(m)
    b[-1] = 1.0
    try:
        pi = np.linalg.solve(A, b)
    except np.linalg.LinAlgError:  # reducible chain: pick a least-squares solution
        pi, *_ = np.linalg.lstsq(A, b, rcond=None)
    pi = np.clip(pi, 0.0, None)
    return pi / pi.sum()


def _second_by_deflation(P, iterations=5000, tol=1e-14, block=3):
    # P - 1 pi^T removes the eigenvalue 1 and keeps the others.  Subspace
    # iteration on a small block with Rayleigh-Ritz extraction resolves
    # complex-conjugate pairs, which make plain power iteration oscillate.
    pi = stationary_distribution(P)
    m = P.shape[0]
    B = (P - np.outer(np.ones(m), pi)).T
    k = min(block, m)
    Q, _ = np.linalg.qr(np.random.default_rng(0).standard_normal((m, k)))
    prev = math.inf
    est = 0.0
    for _ in range(iterations):
        Z = B @ Q
        ritz = np.linalg.eigvals(Q.T @ Z)
        est = float(np.max(np.abs(ritz)))
        if not np.any(Z):
            return 0.0
        Q, _ = np.linalg.qr(Z)
        if abs(est - prev) <= tol * max(1.0, est):
            break
        prev = est
    return est


def markov_second_eigenvalue(P, method: str = "auto") -> float:
    """Second-largest eigenvalue modulus ``|lambda_2|`` of a row-stochastic matrix.

    ``method="eig"`` sorts all eigenvalue moduli (default for up to 64
    states); ``method="power"`` deflates the eigenvalue 1 and power-iterates.
    """
    P = validate_transition_matrix(P)
    m = P.shape[0]
    if method == "auto":
        method = "eig" if m <= 64 else "power"
    if method == "eig":
        mods = np.sort(np.abs(np.linalg.eigvals(P)))[::-1]
        return float(min(mods[1], 1.0))
    if method == "power":
        return float(min(_second_by_deflation(P), 1.0))
    raise ContractViolation(f"unknown method {method!r}")


@dataclass(frozen=True)
class ConvergenceEstimate:
    """Result of :func:`empirical_convergence_rate`.

    ``status`` is ``"ok"``, ``"degenerate"`` (started at, or reached exactly,
    the stationary distribution so no ratio can be formed) or
    ``"non_convergent"`` (``|lambda_2| = 1``).
    """

    rate: float
    status: str
    distances: np.ndarray
    second_eigenvalue: float


def empirical_convergence_rate(P, initial, k_max: int = 100) -> ConvergenceEstimate:
    """Fit the geometric decay of the total-variation distance to stationarity.

    Iterates ``p_{k+1} = p_k P`` and records ``TV(p_k, pi)`` for
    ``k = 0..k_max``.  The rate is the geometric mean of successive ratios
    ``d_{k+1}/d_k`` over the tail half of the horizon; distances below
    ``1e-12 * d_0`` are treated as zero and excluded.
    """
    P = validate_transition_matrix(P)
    p = np.asarray(initial, dtype=float)
    if p.shape != (P.shape[0],) or np.any(p < 0) or abs(p.sum() - 1.0) > 1e-12:
        raise ContractViolation("initial distribution must be non-negative and sum to 1")
    if k_max < 2:
        raise ContractViolation("k_max must be at least 2")
    lam2 = markov_second_eigenvalue(P)
    pi = stationary_distribution(P)
    d = np.empty(k_max + 1)
    for k in range(k_max + 1):
        d[k] = 0.5 * np.abs(p - pi).sum()
        p = p @ P
    if lam2 >= 1.0 - EIGEN_TOL:
        return ConvergenceEstimate(math.nan, "non_convergent", d, lam2)
    floor = 1e-12 * d[0]
    if d[0] <= 1e-12:
        return ConvergenceEstimate(math.nan, "degenerate", d, lam2)
    tail = np.arange(k_max // 2, k_max)
    usable = tail[d[tail] > floor]
    if usable.size == 0:
        # reached stationarity before the tail: decay faster than any ratio we can fit
        alive = np.flatnonzero(d > floor)
        if alive.size < 2:
            return ConvergenceEstimate(0.0, "ok", d, lam2)
        tail = alive[:-1]
        usable = tail
    ratios = np.where(d[usable + 1] > floor, d[usable + 1] / d[usable], 0.0)
    if np.any(ratios == 0.0):
        return ConvergenceEstimate(0.0, "ok", d, lam2)
    rate = float(np.exp(np.mean(np.log(ratios))))
    return ConvergenceEstimate(rate, "ok", d, lam2)


def _parse_range(lo, hi, step):
    if not step > 0 or hi < lo:
        raise ContractViolation(f"bad grid range {lo}:{hi}:{step}")
    count = int(math.floor((hi - lo) / step + 1e-9)) + 1
    # round away representation noise so grid values are the decimal ones intended
    return np.round(lo + step * np.arange(count), 12)


def stability_grid(theta_range, zeta_range):
    """Region flag and spectral radius on a ``(theta, zeta)`` grid.

    Each range is ``(lo, hi, step)`` with ``hi`` included when it lies on the
    grid.  Returns ``(theta, zeta, in_region, radius)`` as flat arrays in
    theta-major order.
    """
    th = _parse_range(*theta_range)
    ze = _parse_range(*zeta_range)
    T, Z = np.meshgrid(th, ze, indexing="ij")
    T = T.ravel()
    Z = Z.ravel()
    inside = ba_stability_region(T, Z)
    radius = _quadratic_radius(1.0 + T - Z, T)
    return T, Z, inside, radius
