"""Compare the numba and numpy kernel backends.

Times Loewner assembly, the Cauchy block used by poly-AA and barycentric
evaluation at a few problem sizes. Each numba kernel is called once before
timing so JIT compilation is excluded.

Usage::

    python benchmarks/bench_kernels.py [--repeat 20]
"""
import argparse
import timeit

import numpy as np

from loewnerfit import _kernels as K


def _data(n, p, m, rng):
    def c(*shape):
        return rng.standard_normal(shape) + 1j * rng.standard_normal(shape)
    mu = 1j * np.logspace(0, 4, n)
    lam = 1j * np.logspace(0.01, 4.01, n)
    return {
        "loewner_pair": (mu, lam, c(n, m), c(n, p), c(m, n), c(p, n)),
        "cauchy_block": (mu, c(n), lam, c(n)),
        "barycentric": (1j * np.logspace(-1, 5, 20 * n), lam, c(n), c(n), 0.5 + 0j),
    }


def _time(fn, args, backend, repeat):
    fn(*args, backend=backend)
    t = timeit.repeat(lambda: fn(*args, backend=backend), number=1, repeat=repeat)
    return min(t)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=20)
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 200, 800])
    args = ap.parse_args(argv)
    backends = ["numpy"] + (["numba"] if K.HAVE_NUMBA else [])
    if not K.HAVE_NUMBA:
        print("numba unavailable or disabled; timing numpy only")
    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'n':>6}" + "".join(f"{b + ' [ms]':>14}" for b in backends)
          + (f"{'speedup':>10}" if len(backends) == 2 else ""))
    for n in args.sizes:
        cases = _data(n, 2, 2, rng)
        for name, fargs in cases.items():
            fn = getattr(K, name)
            times = [_time(fn, fargs, b, args.repeat) for b in backends]
            row = f"{name:<14}{n:>6}" + "".join(f"{1e3 * t:>14.3f}" for t in times)
            if len(times) == 2:
                row += f"{times[0] / times[1]:>10.2f}"
            print(row)


if __name__ == "__main__":
    main()
