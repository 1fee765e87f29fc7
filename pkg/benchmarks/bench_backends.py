"""Timing comparison of the numba and numpy kernel backends.

Runs the two hot kernels (exact probability matrix, noisy trial averaging)
at a few problem sizes and prints a table with the per-call median time and
the numba speedup. Compilation happens before timing starts.

Usage: python3 benchmarks/bench_backends.py [--repeat 9]
"""

import argparse
import time

import numpy as np

from qquench import BasisGrid, available_backends, make_state, set_backend, \
    uniform_post_selector
from qquench import _kernels, rng


def median_time(fn, repeat):
    times = []
    for _ in range(repeat):
        start = time.perf_counter()
        fn()
        times.append(time.perf_counter() - start)
    return float(np.median(times))


def build_case(n_bins, n_depths, seed=7):
    rs = np.random.default_rng(seed)
    grid = BasisGrid(size=n_bins)
    z = rs.standard_normal(n_bins) + 1j * rs.standard_normal(n_bins)
    state = make_state(grid, z)
    sel = uniform_post_selector(grid)
    thetas = np.linspace(0.2, np.pi / 2, n_depths)
    keys = rng.key_matrix(1234, n_bins, thetas)
    return state.amplitudes, sel.overlaps, thetas, keys


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=9,
                        help="timing repetitions per case (median reported)")
    args = parser.parse_args()

    backends = available_backends()
    if "numba" not in backends:
        print("numba backend unavailable; nothing to compare")
        return

    cases = [
        ("probabilities N=20 D=2", 20, 2, None),
        ("probabilities N=200 D=16", 200, 16, None),
        ("noisy mean N=20 D=2 trials=1000", 20, 2, 1000),
        ("noisy mean N=20 D=2 trials=100000", 20, 2, 100_000),
        ("noisy mean N=200 D=16 trials=1000", 200, 16, 1000),
    ]

    print(f"{'case':38s} {'numpy':>10s} {'numba':>10s} {'speedup':>8s}")
    for label, n_bins, n_depths, trials in cases:
        psi, overlaps, thetas, keys = build_case(n_bins, n_depths)
        timings = {}
        for backend in ("numpy", "numba"):
            set_backend(backend)
            if trials is None:
                fn = lambda: _kernels.true_probabilities(psi, overlaps, thetas)
            else:
                _, pr = _kernels.true_probabilities(psi, overlaps, thetas)
                fn = lambda: _kernels.noisy_mean_matrix(pr, 1e-3, trials, keys)
            fn()  # warmup/compile outside the timed region
            timings[backend] = median_time(fn, args.repeat)
        ratio = timings["numpy"] / timings["numba"]
        print(f"{label:38s} {timings['numpy']*1e3:9.3f}ms "
              f"{timings['numba']*1e3:9.3f}ms {ratio:7.1f}x")


if __name__ == "__main__":
    main()
