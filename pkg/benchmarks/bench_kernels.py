"""Time each hot kernel under every available backend.

    python benchmarks/bench_kernels.py [--repeat 5]

Prints one line per (kernel, backend) with the best wall time and the
speedup of the compiled backend over the numpy fallback.
"""

import argparse
import timeit

import numpy as np

from hankellab import kernels


def cases():
    rng = np.random.default_rng(0)
    mask = rng.random((256, 256)) < 0.2
    small = rng.random((32, 32)) < 0.2
    n = 2000
    lo1, lo2 = rng.random(n), rng.random(n)
    hi1, hi2 = lo1 + 0.2 * rng.random(n), lo2 + 0.2 * rng.random(n)
    w = rng.random(n)
    x1, x2 = rng.random(20000), rng.random(20000)
    g = rng.random(1 << 14)
    P = rng.standard_normal((2048, 4)) + 1j * rng.standard_normal((2048, 4))
    Q = rng.standard_normal((2048, 4)) + 1j * rng.standard_normal((2048, 4))
    return {
        "dyadic_enlarge 256x256": lambda m: m.dyadic_enlarge(mask),
        "grid_enlarge 32x32": lambda m: m.grid_enlarge(small),
        "box_stab_sums 20k pts x 2k boxes": lambda m: m.box_stab_sums(x1, x2, lo1, hi1, lo2, hi2, w),
        "counting_sum 16k cells x 50": lambda m: [m.counting_sum(g, 1 / len(g), x, 4.0) for x in x1[:50]],
        "lowrank_lq_power_sum 2048^2 q=1.5": lambda m: m.lowrank_lq_power_sum(P, Q, 1.5),
        "lowrank_lq_power_sum 2048^2 q=4/3": lambda m: m.lowrank_lq_power_sum(P, Q, 4 / 3),
        "lowrank_lq_power_sum 2048^2 q=1.25": lambda m: m.lowrank_lq_power_sum(P, Q, 1.25),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    found = kernels.backends()
    print(f"backends: {', '.join(found)} (selected: {kernels.BACKEND})")
    for name, fn in cases().items():
        times = {}
        for bname, mod in found.items():
            times[bname] = min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat))
        cols = "  ".join(f"{b}={t * 1e3:9.2f} ms" for b, t in times.items())
        speed = f"  x{times['python'] / times['cython']:.1f}" if "cython" in times else ""
        print(f"{name:<36} {cols}{speed}")


if __name__ == "__main__":
    main()
