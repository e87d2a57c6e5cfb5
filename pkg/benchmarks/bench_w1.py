"""Benchmark the compiled vs pure-Python transport kernels.

Run:  python3 benchmarks/bench_w1.py
"""

import time

import numpy as np

from coricci.transport import _mcf_cy, _mcf_py


def random_instance(rng, n):
    pts = rng.random((n, 2))
    cost = np.sqrt(((pts[:, None, :] - pts[None, :, :]) ** 2).sum(axis=2))
    a = rng.random(n)
    a /= a.sum()
    b = rng.random(n)
    b /= b.sum()
    return cost, a, b


def bench(kernel, instances, repeats=1):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        total = 0.0
        for cost, a, b in instances:
            src, tgt, mass, _u, _v = kernel.solve_transport(cost, a, b)
            total += float((mass * cost[src, tgt]).sum())
        best = min(best, time.perf_counter() - t0)
    return best, total


def main():
    rng = np.random.default_rng(0)
    for n in (10, 30, 60, 100):
        instances = [random_instance(rng, n) for _ in range(10 if n <= 30 else 3)]
        t_cy, cost_cy = bench(_mcf_cy, instances)
        t_py, cost_py = bench(_mcf_py, instances)
        assert abs(cost_cy - cost_py) < 1e-9 * max(1.0, cost_py), (
            f"kernels disagree at n={n}: {cost_cy} vs {cost_py}"
        )
        print(
            f"n={n:4d}  cython {t_cy * 1e3:8.2f} ms  "
            f"python {t_py * 1e3:8.2f} ms  speedup {t_py / t_cy:5.1f}x"
        )


if __name__ == "__main__":
    main()
