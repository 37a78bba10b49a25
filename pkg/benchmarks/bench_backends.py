#!/usr/bin/env python3
"""Times the compiled kernels against the pure-numpy fallback.

Run from the repo root after building the extension:

    python3 benchmarks/bench_backends.py [--draws 10000000]

Exercises the three hot paths at sampling scale: raw-word conversion,
inverse-CDF table search (small and large tables), and the hockey-stick
positive-part sums.
"""

import argparse
import time

import numpy as np

from onesided import _kernels_py
from onesided import mechanisms as m
from onesided.verifier import discretize_continuous

try:
    from onesided import _kernels_cy
except ImportError:
    _kernels_cy = None


def best_of(fn, repeats=5):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main() -> int:
    parser = argparse.ArgumentParser()
    parser.add_argument("--draws", type=int, default=10**7)
    args = parser.parse_args()

    budget = m.PrivacyBudget(0.5, 1e-6, 1)
    geo = m.solve_spec(m.DOUBLE_GEOMETRIC, budget)
    _, probs, _ = m.support_table(geo)
    small_cdf = np.cumsum(probs)
    lap = m.solve_trunc_laplace(budget)
    big_table = discretize_continuous(lap, step=lap.b / 1000).probs
    big_cdf = np.cumsum(big_table)

    raw = np.random.Philox(key=42).random_raw(args.draws)
    u = _kernels_py.uniforms_from_raw(raw)

    cases = [
        (f"uniforms_from_raw ({args.draws:.0e} words)",
         lambda k: k.uniforms_from_raw(raw)),
        (f"inverse_cdf_lookup ({len(small_cdf)}-entry table)",
         lambda k: k.inverse_cdf_lookup(small_cdf, u)),
        (f"inverse_cdf_lookup ({len(big_cdf)}-entry table)",
         lambda k: k.inverse_cdf_lookup(big_cdf, u)),
        (f"hockey_stick_pair ({len(big_table)} cells x 200 epsilons)",
         lambda k: [k.hockey_stick_pair(big_table, 500, e) for e in
                    np.linspace(0.0, 2.0, 200)]),
    ]

    backends = [("python", _kernels_py)]
    if _kernels_cy is not None:
        backends.append(("cython", _kernels_cy))
    else:
        print("compiled kernels not available; timing the fallback only\n")

    header = f"{'kernel':<48}" + "".join(f"{name:>12}" for name, _ in backends)
    if len(backends) == 2:
        header += f"{'speedup':>10}"
    print(header)
    print("-" * len(header))
    for label, runner in cases:
        row = f"{label:<48}"
        times = []
        for _, kernels in backends:
            t = best_of(lambda: runner(kernels))
            times.append(t)
            row += f"{t * 1e3:>10.1f}ms"
        if len(times) == 2:
            row += f"{times[0] / times[1]:>9.2f}x"
        print(row)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
