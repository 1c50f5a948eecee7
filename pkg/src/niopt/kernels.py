"""Hot inner loops, each in a compiled-loop and a vectorised-numpy flavour.

The ``*_loops`` functions are written for ``numba.njit``; the ``*_numpy``
functions are drop-in equivalents.  The public names (``fa_member_sweep``,
``island_sum``) resolve to one or the other according to ``NIOPT_NUMBA``.
Both flavours agree to rounding error; tests and ``bench/bench_kernels.py``
exercise the two side by side.
"""

import math

import numpy as np

from ._accel import USE_NUMBA, njit, pick

__all__ = [
    "USE_NUMBA",
    "fa_member_sweep",
    "fa_member_sweep_loops",
    "fa_member_sweep_numpy",
    "island_sum",
    "island_sum_loops",
    "island_sum_numpy",
    "EXP_CUTOFF",
]

# exp(-745) is the last power of e above the smallest subnormal double
EXP_CUTOFF = 745.0


def _fa_member_sweep_py(X, F, i, noise, beta0, gamma, alpha):
    n, dim = X.shape
    moved = False
    for j in range(n):
        if F[j] < F[i]:
            r2 = 0.0
            for d in range(dim):
                t = X[i, d] - X[j, d]
                r2 += t * t
            attraction = beta0 * math.exp(-gamma * r2)
            for d in range(dim):
                X[i, d] += attraction * (X[j, d] - X[i, d]) + alpha * noise[j, d]
            moved = True
    return moved


fa_member_sweep_loops = njit(_fa_member_sweep_py)


def fa_member_sweep_numpy(X, F, i, noise, beta0, gamma, alpha):
    """Move firefly ``i`` towards every brighter firefly, in index order.

    ``X`` is modified in place (row ``i`` only).  ``noise`` has shape
    ``(n, D)``: row ``j`` is the random kick used for the move towards ``j``.
    Returns whether any move happened.  Positions are not clamped here.
    """
    brighter = np.flatnonzero(F < F[i])
    xi = X[i]
    for j in brighter:
        diff = X[j] - xi
        attraction = beta0 * math.exp(-gamma * float(diff @ diff))
        xi += attraction * diff + alpha * noise[j]
    return brighter.size > 0


def _island_sum_py(xs, ys, N, a, cutoff):
    out = np.zeros(xs.shape[0])
    radius = math.sqrt(cutoff / a)
    for p in range(xs.shape[0]):
        x = xs[p]
        y = ys[p]
        i_lo = max(-N, int(math.ceil(x - radius)))
        i_hi = min(N, int(math.floor(x + radius)))
        j_lo = max(-N, int(math.ceil(y - radius)))
        j_hi = min(N, int(math.floor(y + radius)))
        total = 0.0
        for i in range(i_lo, i_hi + 1):
            ex = a * (x - i) * (x - i)
            for j in range(j_lo, j_hi + 1):
                e = ex + a * (y - j) * (y - j)
                if e <= cutoff:
                    total += (abs(i) + abs(j)) * math.exp(-e)
        out[p] = total
    return out


island_sum_loops = njit(_island_sum_py)


def island_sum_numpy(xs, ys, N, a, cutoff):
    """Truncated island double sum at each point ``(xs[p], ys[p])``.

    Terms whose exponent is below ``-cutoff`` are dropped; everything else
    from the full ``(2N+1)**2`` grid is summed.
    """
    xs = np.asarray(xs, dtype=float)
    ys = np.asarray(ys, dtype=float)
    half = int(math.ceil(math.sqrt(cutoff / a))) + 1
    offsets = np.arange(-half, half + 1)
    ci = np.rint(np.clip(xs, -N - half, N + half))[:, None] + offsets
    cj = np.rint(np.clip(ys, -N - half, N + half))[:, None] + offsets
    ex = a * (xs[:, None] - ci) ** 2
    ey = a * (ys[:, None] - cj) ** 2
    e = ex[:, :, None] + ey[:, None, :]
    weight = np.abs(ci)[:, :, None] + np.abs(cj)[:, None, :]
    keep = (
        (np.abs(ci) <= N)[:, :, None]
        & (np.abs(cj) <= N)[:, None, :]
        & (e <= cutoff)
    )
    terms = np.where(keep, weight * np.exp(-np.minimum(e, cutoff)), 0.0)
    return terms.sum(axis=(1, 2))


fa_member_sweep = pick(fa_member_sweep_loops, fa_member_sweep_numpy)
island_sum = pick(island_sum_loops, island_sum_numpy)
