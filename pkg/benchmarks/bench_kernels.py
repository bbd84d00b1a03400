"""Compiled vs numpy PCG on the zonal Laplacian.

    python3 benchmarks/bench_kernels.py [--sizes 64 128 256] [--repeat 3]

Prints one row per grid size with the best-of-``repeat`` wall time of each
backend and the speed-up.  The right-hand side comes from a smooth phase on a
disc mask, as in a real retrieval.
"""
import argparse
import time

import numpy as np

from jsta.kernels import _fallback

try:
    from jsta.kernels import _pcg as compiled
except ImportError:  # extension not built
    compiled = None


def problem(n):
    x = np.linspace(-1, 1, n)
    s, i = np.meshgrid(x, x, indexing="ij")
    inside = s ** 2 + i ** 2 <= 0.8 ** 2
    wa = (inside[1:] & inside[:-1]).astype(float)
    wb = (inside[:, 1:] & inside[:, :-1]).astype(float)
    phi = np.where(inside, 3 * (s + i) ** 2 + np.sin(4 * s) * i, 0.0)
    return wa, wb, _fallback.laplacian_matvec(wa, wb, phi)


def best_time(fn, repeat):
    best, out = np.inf, None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args(argv)
    print(f"{'n':>5} {'iters':>6} {'numpy (s)':>10} {'compiled (s)':>13} {'speed-up':>9}")
    for n in args.sizes:
        wa, wb, b = problem(n)
        x0 = np.zeros_like(b)
        tp, (_, it, _) = best_time(lambda: _fallback.pcg_laplacian(wa, wb, b, x0, 1e-10, 100 * n * n), args.repeat)
        if compiled is None:
            print(f"{n:>5} {it:>6} {tp:>10.4f} {'n/a':>13} {'n/a':>9}")
            continue
        tc, _ = best_time(lambda: compiled.pcg_laplacian(wa, wb, b, x0, 1e-10, 100 * n * n), args.repeat)
        print(f"{n:>5} {it:>6} {tp:>10.4f} {tc:>13.4f} {tp / tc:>8.1f}x")


if __name__ == "__main__":
    main()
