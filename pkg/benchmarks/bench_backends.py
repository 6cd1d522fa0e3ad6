"""Time the numba and numpy kernels on the same inputs.

    python3 benchmarks/bench_backends.py [--n-assets 54] [--n-obs 2088] [--repeat 3]

The first numba call per kernel includes JIT compilation (or a cache load) and
is reported separately as ``warmup``.
"""

import argparse
import time

import numpy as np

from lmarch import _accel
from lmarch.kernels import long_memory_weights


def timed(fn, repeat):
    best = np.inf
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n-assets", type=int, default=54)
    ap.add_argument("--n-obs", type=int, default=2088)
    ap.add_argument("--imax", type=int, default=260)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()

    rng = np.random.default_rng(0)
    n, t = args.n_assets, args.n_obs + args.imax + 1
    r = 0.01 * rng.standard_t(5, (t, n))
    w = long_memory_weights(args.imax).weights[::-1].copy()
    eps = rng.standard_normal((t, n))

    cases = {
        "cross_product": lambda b: _accel.cross_product(r[: args.imax + 1], w, backend=b),
        "residual_loop": lambda b: _accel.residual_loop(r, w, 0.05, 0.01, _accel.FULL, 0, -1.0,
                                                        1e-12, False, args.imax, t - 1, backend=b),
        "dynamic_path": lambda b: _accel.dynamic_path(eps, w, 0.05, 0.01, 0.01 * np.eye(n),
                                                      backend=b),
        "quality_measures": lambda b: _accel.quality_measures(eps[: args.n_obs], backend=b),
    }
    backends = ["numpy"] + (["numba"] if _accel.HAS_NUMBA else [])
    print(f"N={n} T={args.n_obs} i_max={args.imax}; best of {args.repeat}")
    print(f"{'kernel':<18}" + "".join(f"{b:>12}" for b in backends) + f"{'speedup':>10}"
          + f"{'warmup':>10}")
    for name, fn in cases.items():
        warm = 0.0
        if "numba" in backends:
            t0 = time.perf_counter()
            fn("numba")
            warm = time.perf_counter() - t0
        times = [timed(lambda: fn(b), args.repeat) for b in backends]
        speed = times[0] / times[-1] if len(times) > 1 else 1.0
        print(f"{name:<18}" + "".join(f"{x:>11.4f}s" for x in times) + f"{speed:>9.2f}x"
              + f"{warm:>9.2f}s")


if __name__ == "__main__":
    main()
