"""Compare the numba kernels with their numpy / plain-Python fallbacks.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints the best-of-N wall time for each kernel on both paths and checks that
the two paths return the same numbers.
"""
import argparse
import time

import numpy as np

from hyperdiff import kernels
from hyperdiff.densest import FlowNetwork
from hyperdiff.generators import random_hypergraph


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compile)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def _close(a, b):
    if isinstance(a, tuple):
        return all(_close(x, y) for x, y in zip(a, b))
    return np.allclose(a, b, rtol=0, atol=1e-9)


def cases(rng):
    H = random_hypergraph(rng, 20000, 60000, max_edge=6)
    f = rng.standard_normal(H.n)
    tp, ti, hp, hi = H.csr
    yield ("edge_extrema n=20000 m=60000",
           lambda: kernels.edge_extrema_numba(f, tp, ti, hp, hi),
           lambda: kernels.edge_extrema_numpy(f, tp, ti, hp, hi))

    small = random_hypergraph(rng, 16, 30)
    tm, hm = small.masks
    yield ("cut_weights n=16 (65535 subsets)",
           lambda: kernels.cut_weights_numba(16, small.omega, tm, hm, small.weights),
           lambda: kernels.cut_weights_numpy(16, small.omega, tm, hm, small.weights))

    k, L = 14, 2
    args = (k, rng.uniform(0.5, 2, size=k),
            rng.integers(1, 2 ** k, size=20).astype(np.int64), rng.uniform(0.1, 2, size=20),
            rng.integers(0, L, size=20).astype(np.int64),
            rng.integers(1, 2 ** k, size=20).astype(np.int64), rng.uniform(0.1, 2, size=20),
            rng.integers(0, L, size=20).astype(np.int64), L, False)
    yield ("subset_densities k=14, 2 levels",
           lambda: kernels.subset_densities_numba(*args),
           lambda: kernels.subset_densities_numpy(*args))

    net = FlowNetwork(2)
    nodes = [net.add_node() for _ in range(300)]
    for v in nodes[:30]:
        net.add_arc(0, v, float(rng.uniform(1, 5)))
    for v in nodes[-30:]:
        net.add_arc(v, 1, float(rng.uniform(1, 5)))
    for _ in range(3000):
        u, v = rng.choice(nodes, 2, replace=False)
        net.add_arc(int(u), int(v), float(rng.uniform(0.1, 3)))
    src, dst, cap = net.arrays()
    yield ("dinic 302 nodes, 3060 arcs",
           lambda: kernels.dinic_numba(net.n_nodes, src, dst, cap, 0, 1, 1e-12)[0],
           lambda: kernels._dinic_py(net.n_nodes, src, dst, cap, 0, 1, 1e-12)[0])


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()
    if not kernels.HAVE_NUMBA:
        print("numba disabled; both columns run the fallback")
    print(f"{'kernel':40s} {'numba (s)':>12s} {'fallback (s)':>14s} {'speedup':>9s}  agree")
    for name, fast, slow in cases(np.random.default_rng(args.seed)):
        tf, a = best_of(fast, args.repeat)
        ts, b = best_of(slow, max(1, args.repeat // 2))
        print(f"{name:40s} {tf:12.5f} {ts:14.5f} {ts / tf:8.1f}x  {_close(a, b)}")


if __name__ == "__main__":
    main()
