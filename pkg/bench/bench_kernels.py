"""Compare the numba and numpy flavours of the hot kernels.

Usage::

    python3 bench/bench_kernels.py [--repeat 5] [--points 2000]

Times the island double sum (batch of random points) and the firefly
member sweep (one full population sweep), checks the two flavours agree,
and prints a small table.  Without numba the "loops" flavour is plain
Python and the comparison shows its interpreted cost.
"""

import argparse
import time

import numpy as np

from niopt import RandomStream, kernels
from niopt._accel import HAVE_NUMBA


def best_time(fn, repeat):
    fn()  # warm-up (triggers compilation)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def island_case(points, stream):
    xs = stream.uniform(-100.5, 100.5, size=points)
    ys = stream.uniform(-100.5, 100.5, size=points)

    def call(f):
        return lambda: f(xs, ys, 100, 10.0, kernels.EXP_CUTOFF)

    return call


def firefly_case(n, dim, stream):
    X0 = stream.uniform(-5.0, 5.0, size=(n, dim))
    F = stream.random(n)
    noise = stream.normal((n, n, dim))

    def call(f):
        def sweep():
            X = X0.copy()
            for i in range(n):
                f(X, F, i, noise[i], 1.0, 1.0, 0.05)
            return X

        return sweep

    return call


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--points", type=int, default=2000)
    parser.add_argument("--population", type=int, default=40)
    parser.add_argument("--dim", type=int, default=10)
    args = parser.parse_args(argv)

    stream = RandomStream(0)
    cases = [
        (f"island_sum ({args.points} points)", island_case(args.points, stream),
         kernels.island_sum_loops, kernels.island_sum_numpy),
        (f"fa sweep (n={args.population}, D={args.dim})", firefly_case(args.population, args.dim, stream),
         kernels.fa_member_sweep_loops, kernels.fa_member_sweep_numpy),
    ]
    label = "numba" if HAVE_NUMBA else "python loops"
    print(f"{'kernel':<34}{label:>14}{'numpy':>12}{'speed-up':>10}  agree")
    for name, make, loops, vec in cases:
        a, b = make(loops)(), make(vec)()
        agree = np.allclose(a, b, rtol=1e-12, atol=1e-14)
        t_loops = best_time(make(loops), args.repeat)
        t_numpy = best_time(make(vec), args.repeat)
        print(f"{name:<34}{t_loops * 1e3:>12.2f}ms{t_numpy * 1e3:>10.2f}ms{t_numpy / t_loops:>9.1f}x  {agree}")


if __name__ == "__main__":
    main()
