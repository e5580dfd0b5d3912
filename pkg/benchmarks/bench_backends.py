#!/usr/bin/env python3
"""Compare the compiled hot loops against the pure NumPy fallback.

Times the three per-round kernels on a mid-size stream and the full
five-method pipeline, and cross-checks that the backends agree.

Usage: python benchmarks/bench_backends.py [--rounds 4000] [--d1 64] [--d2 48]
"""

import argparse
import time

import numpy as np

from fesl import backends
from fesl.backends import pyloops
from fesl.harness import MethodKind, RunConfig, run_method
from fesl.streams import generated_stream


def time_call(fn, *args, repeats=5):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_kernels(n, d1, d2):
    rng = np.random.default_rng(0)
    X1 = rng.normal(size=(n, d1))
    X2 = rng.normal(size=(n, d2))
    y = np.where(rng.random(n) < 0.5, 1.0, -1.0)
    w1 = 0.01 * rng.normal(size=d1)
    w2 = 0.01 * rng.normal(size=d2)
    u = rng.random(n)
    kind = pyloops.LOGISTIC

    cases = {
        "ogd_loop": lambda m: m.ogd_loop(X1, y, w1, 1.0, 100.0, kind),
        "combine_loop": lambda m: m.combine_loop(
            X1, X2, y, w1, w2, 1.0, 100.0, kind, 0.3, True),
        "select_loop": lambda m: m.select_loop(
            X1, X2, y, w1, w2, 1.0, 100.0, kind, 0.3, 0.01, u, True),
    }
    print(f"\nkernels on {n} rounds, d1={d1}, d2={d2} (best of 5):")
    print(f"{'kernel':<14}{'python':>12}{'compiled':>12}{'speedup':>10}")
    for name, call in cases.items():
        t_py, out_py = time_call(call, backends.get_loops("python"))
        if "compiled" in backends.available_backends():
            t_c, out_c = time_call(call, backends.get_loops("compiled"))
            ref = out_py[1] if isinstance(out_py, tuple) else out_py["pred"]
            got = out_c[1] if isinstance(out_c, tuple) else out_c["pred"]
            np.testing.assert_allclose(ref, got, rtol=1e-9, atol=1e-12)
            print(f"{name:<14}{t_py * 1e3:>10.2f}ms{t_c * 1e3:>10.2f}ms"
                  f"{t_py / t_c:>9.1f}x")
        else:
            print(f"{name:<14}{t_py * 1e3:>10.2f}ms{'n/a':>12}{'':>10}")


def bench_pipeline(n, d1, d2):
    stream = generated_stream(n, d1, d2, seed=1, name="bench")
    print(f"\nfull pipeline on a {n}-round stream (all five methods, one seed):")
    for backend in backends.available_backends():
        t0 = time.perf_counter()
        for method in MethodKind:
            run_method(stream, method, RunConfig(seed=0, backend=backend))
        dt = time.perf_counter() - t0
        print(f"  {backend:<10} {dt * 1e3:8.1f}ms")


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rounds", type=int, default=4000)
    parser.add_argument("--d1", type=int, default=64)
    parser.add_argument("--d2", type=int, default=48)
    args = parser.parse_args()
    print(f"available backends: {', '.join(backends.available_backends())}; "
          f"default: {backends.active_backend()}")
    bench_kernels(args.rounds, args.d1, args.d2)
    bench_pipeline(args.rounds, args.d1, args.d2)


if __name__ == "__main__":
    main()
