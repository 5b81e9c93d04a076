"""Timing comparison of the constrained-subproblem kernel backends.

Runs the l1/box projections and the accelerated projected-gradient model
solve on matched inputs through every importable backend (compiled
extension and NumPy fallback) and prints per-call timings plus agreement
checks. Invoke as: python3 benchmarks/bench_kernels.py [--repeat N]
"""

import argparse
import time

import numpy as np

from subnewton import kernels


def time_call(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def random_spd(rng, p, cond):
    q, _ = np.linalg.qr(rng.standard_normal((p, p)))
    eigs = np.logspace(0.0, np.log10(cond), p)
    h = (q * eigs) @ q.T
    return 0.5 * (h + h.T)


def bench_projections(backends, repeat, sizes=(100, 1000, 10000, 100000)):
    rng = np.random.default_rng(0)
    print("l1 projection (radius covering ~half the mass)")
    for p in sizes:
        v = rng.standard_normal(p)
        radius = 0.5 * float(np.abs(v).sum())
        row = [f"  p={p:>6}"]
        outs = {}
        for name, impl in backends.items():
            dt, outs[name] = time_call(lambda impl=impl: impl.project_l1(v, radius), repeat)
            row.append(f"{name}={dt * 1e6:9.1f}us")
        row.append(agreement(outs))
        print(" ".join(row))

    print("box projection (random finite bounds)")
    for p in sizes:
        v = 3.0 * rng.standard_normal(p)
        lo = -np.abs(rng.standard_normal(p))
        hi = np.abs(rng.standard_normal(p))
        row = [f"  p={p:>6}"]
        outs = {}
        for name, impl in backends.items():
            dt, outs[name] = time_call(
                lambda impl=impl: impl.project_box(v, lo, hi), repeat
            )
            row.append(f"{name}={dt * 1e6:9.1f}us")
        row.append(agreement(outs))
        print(" ".join(row))


def bench_model_solve(backends, repeat, sizes=(10, 30, 100, 300)):
    rng = np.random.default_rng(1)
    print("l1-constrained quadratic model solve (cond=100, tol=1e-10)")
    for p in sizes:
        h = random_spd(rng, p, 100.0)
        lip = float(np.linalg.eigvalsh(h)[-1])
        xk = kernels.project_l1(rng.standard_normal(p), 1.0)
        g = rng.standard_normal(p)
        row = [f"  p={p:>4}"]
        outs = {}
        iters = None
        for name, impl in backends.items():
            def call(impl=impl):
                return impl.solve_projected_quadratic(
                    xk, g, h, lip, kernels.KIND_L1, 1.0, None, None, 1e-10, 20000
                )
            dt, (z, it, resid) = time_call(call, repeat)
            outs[name] = z
            iters = it
            row.append(f"{name}={dt * 1e3:8.2f}ms")
        row.append(f"iters={iters}")
        row.append(agreement(outs))
        print(" ".join(row))


def agreement(outs):
    if len(outs) < 2:
        return "(single backend)"
    vals = list(outs.values())
    gap = max(
        float(np.max(np.abs(vals[0] - other))) for other in vals[1:]
    )
    return f"max gap={gap:.1e}"


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=7,
                        help="timing repetitions per case (best is reported)")
    args = parser.parse_args()

    backends = kernels.backends()
    print(f"active backend: {kernels.BACKEND}; importable: {sorted(backends)}")
    bench_projections(backends, args.repeat)
    bench_model_solve(backends, args.repeat)


if __name__ == "__main__":
    main()
