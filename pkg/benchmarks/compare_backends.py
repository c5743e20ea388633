#!/usr/bin/env python3
"""Benchmark the hot kernels: numba backend versus the pure-Python fallback.

The two kernels dominate the verification suites: the fixed-step RK4
reference integrator and the brute-force sampled-law stepper. Run with

    python benchmarks/compare_backends.py [--steps N]

The active backend for library calls is chosen at import time (numba when
available, unless LYAPQUBIT_NO_NUMBA=1); this script times both
implementations directly regardless of that selection.
"""

import argparse
import time

import numpy as np

from lyapqubit import SystemParams, controlled_unitary, free_unitary
from lyapqubit._kernels import BACKENDS, active_backend


def time_rk4(fn, n_steps: int) -> float:
    args = (0.7071067811865476 + 0j, 0.5 - 0.5j, 1.0, 0.1, n_steps, 2e-4)
    fn(*args[:4], 10, args[5])  # warm-up / compile
    best = float("inf")
    for _ in range(3):
        start = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - start)
    return best


def time_sampled_law(fn, n_steps: int) -> float:
    params = SystemParams(1.0, 0.1)
    h = 1e-4
    up = controlled_unitary(params, 0.1, h)
    um = controlled_unitary(params, -0.1, h)
    uf = free_unitary(params, h)
    stride = 1000
    out_a = np.empty(n_steps // stride, dtype=np.complex128)
    out_b = np.empty(n_steps // stride, dtype=np.complex128)
    out_f = np.empty(n_steps // stride, dtype=np.float64)

    def call(n):
        return fn(
            0.7071067811865476 + 0j,
            0.5 - 0.5j,
            0.1,
            1e-12,
            n,
            stride,
            up.u11,
            up.u12,
            up.u22,
            um.u11,
            um.u12,
            um.u22,
            uf.u11,
            uf.u22,
            out_a,
            out_b,
            out_f,
        )

    call(10)  # warm-up / compile
    best = float("inf")
    for _ in range(3):
        start = time.perf_counter()
        call(n_steps)
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--steps", type=int, default=2_000_000, help="steps per kernel call")
    args = parser.parse_args()

    print(f"active library backend: {active_backend()}")
    print(f"steps per call: {args.steps}\n")
    print(f"{'kernel':<16} {'backend':<8} {'time [s]':>10} {'ns/step':>9}")
    results = {}
    for kernel, timer in (("rk4", time_rk4), ("sampled_law", time_sampled_law)):
        for backend in sorted(BACKENDS):
            fn = BACKENDS[backend][f"{kernel}_steps" if kernel == "rk4" else "sampled_law_steps"]
            elapsed = timer(fn, args.steps)
            results[(kernel, backend)] = elapsed
            print(f"{kernel:<16} {backend:<8} {elapsed:>10.4f} {elapsed / args.steps * 1e9:>9.1f}")
    print()
    for kernel in ("rk4", "sampled_law"):
        if (kernel, "numba") in results and (kernel, "python") in results:
            speedup = results[(kernel, "python")] / results[(kernel, "numba")]
            print(f"{kernel}: numba speedup {speedup:.1f}x")


if __name__ == "__main__":
    main()
