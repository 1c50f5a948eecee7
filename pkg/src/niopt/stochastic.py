"""Probability distributions, Mantegna Levy steps and random-walk diagnostics."""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from typing import Callable, Sequence, Union

import numpy as np

from .core import ContractViolation, RandomStream

__all__ = [
    "CauchyParams",
    "LevyParams",
    "WalkTrace",
    "sample_uniform",
    "sample_gaussian",
    "cauchy_pdf",
    "cauchy_from_uniform",
    "sample_cauchy",
    "levy_tail_density",
    "mantegna_sigma",
    "mantegna_step",
    "sample_levy_mantegna",
    "gaussian_steps",
    "cauchy_steps",
    "levy_steps",
    "step_sampler",
    "random_walk",
    "random_walk_ensemble",
    "diffusion_exponent",
    "hill_tail_exponent",
    "write_walk_csv",
]

MANTEGNA_BETA_RANGE = (0.3, 1.99)


@dataclass(frozen=True)
class CauchyParams:
    mu: float = 0.0
    gamma: float = 1.0

    def __post_init__(self):
        if not self.gamma > 0:
            raise ContractViolation(f"Cauchy scale must be positive, got {self.gamma}")


@dataclass(frozen=True)
class LevyParams:
    beta: float = 1.5
    alpha: float = 1.0

    def __post_init__(self):
        if not 0 < self.beta <= 2:
            raise ContractViolation(f"Levy exponent must lie in (0, 2], got {self.beta}")
        if not self.alpha > 0:
            raise ContractViolation(f"Levy scale must be positive, got {self.alpha}")


@dataclass
class WalkTrace:
    """States ``S_0 .. S_N`` of one walk (``S_0`` is the origin)."""

    states: np.ndarray

    @property
    def step_count(self) -> int:
        return len(self.states) - 1


def sample_uniform(stream: RandomStream, lo: float, hi: float, size=None):
    if not lo < hi:
        raise ContractViolation(f"need lo < hi, got [{lo}, {hi})")
    return stream.uniform(lo, hi, size)


def sample_gaussian(stream: RandomStream, size=None):
    return stream.normal(size)


def cauchy_pdf(x, params: CauchyParams):
    g = params.gamma
    return (1.0 / (math.pi * g)) * g * g / ((np.asarray(x) - params.mu) ** 2 + g * g)


def cauchy_from_uniform(u, params: CauchyParams):
    """Inverse CDF: ``mu + gamma * tan(pi * (u - 1/2))``."""
    return params.mu + params.gamma * np.tan(math.pi * (np.asarray(u) - 0.5))


def sample_cauchy(stream: RandomStream, params: CauchyParams, size=None):
    return cauchy_from_uniform(stream.random(size), params)


def levy_tail_density(s, params: LevyParams):
    """Large-step power-law approximation of the Levy density.

    ``alpha * beta * Gamma(beta) * sin(pi*beta/2) / (pi * |s|**(1+beta))``;
    only meaningful for ``|s| >> 0``.
    """
    s = np.asarray(s, dtype=float)
    if np.any(s == 0):
        raise ContractViolation("tail approximation is undefined at s = 0")
    b = params.beta
    c = params.alpha * b * math.gamma(b) * math.sin(math.pi * b / 2) / math.pi
    return c / np.abs(s) ** (1 + b)


def mantegna_sigma(beta: float) -> float:
    """Standard deviation of the numerator Gaussian in Mantegna's method."""
    num = math.gamma(1 + beta) * math.sin(math.pi * beta / 2)
    den = math.gamma((1 + beta) / 2) * beta * 2 ** ((beta - 1) / 2)
    return (num / den) ** (1 / beta)


def _check_beta(beta):
    lo, hi = MANTEGNA_BETA_RANGE
    if not lo <= beta <= hi:
        raise ContractViolation(f"Mantegna's method needs beta in [{lo}, {hi}], got {beta}")


def mantegna_step(u, v, beta: float):
    """``u / |v|**(1/beta)`` for pre-drawn ``u ~ N(0, sigma_u^2)``, ``v ~ N(0, 1)``."""
    _check_beta(beta)
    return np.asarray(u) / np.abs(v) ** (1.0 / beta)


def sample_levy_mantegna(stream: RandomStream, beta: float, size=None):
    """Levy-distributed steps; consumes two standard normals per sample."""
    _check_beta(beta)
    shape = () if size is None else (size if isinstance(size, tuple) else (size,))
    z = stream.normal(shape + (2,))
    s = mantegna_step(mantegna_sigma(beta) * z[..., 0], z[..., 1], beta)
    return float(s) if size is None else s


StepSource = Callable[[RandomStream, tuple], np.ndarray]


def gaussian_steps() -> StepSource:
    return lambda stream, size: stream.normal(size)


def cauchy_steps(params: CauchyParams = CauchyParams()) -> StepSource:
    return lambda stream, size: sample_cauchy(stream, params, size)


def levy_steps(beta: float) -> StepSource:
    _check_beta(beta)
    return lambda stream, size: sample_levy_mantegna(stream, beta, size)


def step_sampler(dist: str, beta: float = 1.5) -> StepSource:
    """Step source by name: ``gaussian``, ``cauchy`` or ``levy``."""
    if dist == "gaussian":
        return gaussian_steps()
    if dist == "cauchy":
        return cauchy_steps()
    if dist == "levy":
        return levy_steps(beta)
    raise ContractViolation(f"unknown step distribution {dist!r}")


def random_walk(stream: RandomStream, N: int, step_source: StepSource, origin: float = 0.0) -> WalkTrace:
    """``S_{t+1} = S_t + w_{t+1}`` for ``N`` steps drawn from ``step_source``."""
    if N < 0:
        raise ContractViolation("number of steps must be non-negative")
    steps = np.asarray(step_source(stream, (N,)), dtype=float).reshape(N)
    states = np.empty(N + 1)
    states[0] = origin
    np.cumsum(steps, out=states[1:])
    states[1:] += origin
    return WalkTrace(states)


def random_walk_ensemble(stream: RandomStream, walks: int, N: int, step_source: StepSource) -> np.ndarray:
    """``walks`` independent walks from 0, as a ``(walks, N + 1)`` array."""
    out = np.zeros((walks, N + 1))
    np.cumsum(step_source(stream, (walks, N)), axis=1, out=out[:, 1:])
    return out


def diffusion_exponent(
    ensemble: Union[np.ndarray, Sequence[WalkTrace]],
    checkpoints: int = 25,
    min_walks: int = 100,
    min_steps: int = 1000,
) -> float:
    """Slope of ``log median |S_N - S_0|`` against ``log N``.

    ``N`` runs over ``checkpoints`` log-spaced step counts from 1 to the walk
    length.  The median is used because Levy walks have divergent moments.
    """
    if isinstance(ensemble, np.ndarray):
        S = np.atleast_2d(ensemble)
    else:
        lengths = {len(t.states) for t in ensemble}
        if len(lengths) > 1:
            raise ContractViolation("walk traces must have equal length")
        S = np.array([t.states for t in ensemble])
    walks, length = S.shape
    steps = length - 1
    if walks < min_walks or steps < min_steps:
        raise ContractViolation(
            f"need at least {min_walks} walks of {min_steps} steps, got {walks} x {steps}"
        )
    ck = np.unique(np.round(np.logspace(0, math.log10(steps), checkpoints)).astype(int))
    dist = np.median(np.abs(S[:, ck] - S[:, :1]), axis=0)
    slope, _ = np.polyfit(np.log(ck), np.log(dist), 1)
    return float(slope)


def hill_tail_exponent(samples, fraction: float = 0.01) -> float:
    """Density tail exponent ``1 + a`` from the Hill estimate ``a`` of ``|samples|``.

    Uses the top ``fraction`` order statistics.
    """
    x = np.sort(np.abs(np.asarray(samples, dtype=float)))[::-1]
    k = max(int(len(x) * fraction), 2)
    if k >= len(x):
        raise ContractViolation("not enough samples for the requested fraction")
    a = 1.0 / np.mean(np.log(x[:k] / x[k]))
    return 1.0 + float(a)


def write_walk_csv(trace: WalkTrace, fh) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["step", "state"])
    for t, s in enumerate(trace.states):
        w.writerow([t, repr(float(s))])
