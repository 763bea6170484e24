"""Time the compiled kernels against their pure-Python twins.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Each row reports the best-of-``repeat`` wall time per call for both
backends, the speed-up, and the largest absolute difference between their
outputs.  The greedy kernels agree bit for bit; the IQP oracle accumulates
its objective along a Gray code in the compiled version, so it can differ in
the last few bits.
"""
import argparse
import timeit

import numpy as np

from dispersed import _kernels_py as py
from dispersed.greedy import gen_smoothed, knapsack_candidates, mwis_candidates
from dispersed.iqp import gen_maxcut

try:
    from dispersed import _kernels as cy
except ImportError:  # extension not built
    cy = None


def cases(rng):
    kn = gen_smoothed("knapsack", 12, 2.0, rng)
    kn_rhos = np.ascontiguousarray(np.sort(np.concatenate((knapsack_candidates(kn, 10.0), [0.0, 10.0]))))
    mw = gen_smoothed("mwis", 12, 2.0, rng, p=0.3)
    mw_rhos = np.ascontiguousarray(mwis_candidates(mw, 10.0))
    small_kn = gen_smoothed("knapsack", 18, 2.0, rng)
    small_mw = gen_smoothed("mwis", 16, 2.0, rng, p=0.3)
    A = np.ascontiguousarray(gen_maxcut(14, rng).A)
    return [
        (f"knapsack_greedy_values ({len(kn_rhos)} rhos)", "knapsack_greedy_values",
         (kn.values, kn.sizes, float(kn.capacity), kn_rhos)),
        (f"mwis_greedy_weights ({len(mw_rhos)} rhos)", "mwis_greedy_weights",
         (mw.weights, mw.adj, mw_rhos, True)),
        ("brute_force_knapsack (n=18)", "brute_force_knapsack",
         (small_kn.values, small_kn.sizes, float(small_kn.capacity))),
        ("brute_force_mwis (n=16)", "brute_force_mwis", (small_mw.weights, small_mw.adj)),
        ("brute_force_iqp (n=14)", "brute_force_iqp", (A,)),
    ]


def best_time(fn, args, repeat):
    number = 1
    while timeit.timeit(lambda: fn(*args), number=number) < 0.05 and number < 10_000:
        number *= 4
    return min(timeit.repeat(lambda: fn(*args), number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if cy is None:
        print("compiled extension not built; only the Python backend is available")
    print(f"{'kernel':42s} {'python':>11s} {'cython':>11s} {'speed-up':>9s}  max |diff|")
    for label, name, a in cases(np.random.default_rng(args.seed)):
        t_py = best_time(getattr(py, name), a, args.repeat)
        if cy is None:
            print(f"{label:42s} {t_py * 1e3:9.3f}ms {'-':>11s} {'-':>9s}  -")
            continue
        t_cy = best_time(getattr(cy, name), a, args.repeat)
        diff = np.max(np.abs(np.asarray(getattr(py, name)(*a)) - np.asarray(getattr(cy, name)(*a))))
        print(f"{label:42s} {t_py * 1e3:9.3f}ms {t_cy * 1e3:9.3f}ms {t_py / t_cy:8.1f}x  {diff:.1e}")


if __name__ == "__main__":
    main()
