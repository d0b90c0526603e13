"""Time the compiled and pure-numpy kernel backends on the same inputs.

    python3 benchmarks/bench_kernels.py [--paths 256] [--steps 2000] [--repeat 3]
"""

import argparse
import time

import numpy as np

from ilt_lab import diffusion as dif
from ilt_lab.kernels import get_backend


def best_of(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(n_paths, n_steps):
    dt = 1e-5
    fields = (dif.RelativisticBessel(0.25, 9.5785),
              dif.Perturbed(0.25, dif.power_perturbation(0.25, 1.0), 1.0),
              dif.Bessel(0.25))
    plan = dif._plan(fields, dt)
    noise = np.random.default_rng(0).standard_normal((n_steps, n_paths))
    K = len(fields)

    def euler(mod):
        x = np.zeros((K, n_paths))
        out = np.empty((K, n_steps, n_paths))
        mod.euler_chunk(noise, x, plan.sing, plan.tab, plan.has_tab, plan.logx0, plan.inv_dlog,
                        plan.x_floor, dt, np.sqrt(dt), out)
        return out

    paths = np.abs(np.cumsum(noise * np.sqrt(dt), axis=0))
    eps = 3 * np.sqrt(dt)

    def downcross(mod):
        return mod.downcross_chunk(paths, np.zeros(n_paths, dtype=np.uint8), eps, eps / 2, 1)

    def exact(mod):
        out = np.empty((n_steps, n_paths))
        mod.bessel_exact_chunk(np.random.default_rng(1), np.zeros(n_paths), 1.5, dt, out)
        return out

    return {"euler_chunk (3 fields)": euler, "downcross_chunk": downcross, "bessel_exact_chunk": exact}


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--paths", type=int, default=256)
    p.add_argument("--steps", type=int, default=2000)
    p.add_argument("--repeat", type=int, default=3)
    args = p.parse_args()
    py = get_backend("python")
    try:
        cy = get_backend("cython")
    except ImportError:
        cy = None
        print("compiled backend not built; timing the numpy fallback only")
    print(f"{args.paths} paths x {args.steps} steps, best of {args.repeat}")
    print(f"{'kernel':<24}{'python [s]':>12}{'cython [s]':>12}{'speedup':>10}")
    for name, fn in cases(args.paths, args.steps).items():
        tp = best_of(lambda: fn(py), args.repeat)
        if cy is None:
            print(f"{name:<24}{tp:>12.4f}{'-':>12}{'-':>10}")
            continue
        tc = best_of(lambda: fn(cy), args.repeat)
        print(f"{name:<24}{tp:>12.4f}{tc:>12.4f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
