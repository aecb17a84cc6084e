"""
Time the ML-detection Monte Carlo with the numba kernel and the numpy
fallback, and check that both give identical error counts.

    python benchmarks/bench_detect.py --n 4 --k 2 --m 2 --trials 1000000
"""

import argparse
import time

from ofdmim import _kernels
from ofdmim.analysis import SnrPoint
from ofdmim.codebook import SystemConfig, build_codebook
from ofdmim.simulator import monte_carlo


def bench(codebook, snr, trials, seed, backend, repeats):
    # warm-up compiles (or loads the cached) numba kernel
    monte_carlo(codebook, snr, min(trials, 1000), seed, backend=backend)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        est = monte_carlo(codebook, snr, trials, seed, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return est, best


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[1])
    p.add_argument("--n", type=int, default=4)
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--m", type=int, default=2)
    p.add_argument("--snr", type=float, default=10.0, help="Pt/N0 in dB")
    p.add_argument("--trials", type=int, default=1_000_000)
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--repeats", type=int, default=3)
    args = p.parse_args()

    cb = build_codebook(SystemConfig(args.n, args.k, args.m))
    snr = SnrPoint(args.snr)
    print(f"N={args.n} K={args.k} M={args.m}  X={cb.X}  trials={args.trials}  snr={args.snr} dB")

    results = {}
    for backend in _kernels.available_backends():
        est, t = bench(cb, snr, args.trials, args.seed, backend, args.repeats)
        results[backend] = (est, t)
        print(f"{backend:>6}: {t:8.3f} s  {args.trials / t / 1e6:7.2f} Mtrials/s  "
              f"bler={est.bler_hat:.6f} ber={est.ber_hat:.6f}")

    if len(results) == 2:
        (e1, t1), (e2, t2) = results["numba"], results["numpy"]
        print(f"speedup numba/numpy: {t2 / t1:.2f}x   identical counts: {e1 == e2}")
        if e1 != e2:
            raise SystemExit("backends disagree")
    else:
        print("numba unavailable or disabled (OFDMIM_DISABLE_NUMBA); numpy path only")


if __name__ == "__main__":
    main()
