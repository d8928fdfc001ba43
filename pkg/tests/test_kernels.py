"""The numba kernels and their pure fallbacks must agree."""
import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperdiff import kernels
from hyperdiff.generators import random_hypergraph

seeds = st.integers(0, 2 ** 32 - 1)


@given(seeds)
def test_edge_extrema_agree(seed):
    rng = np.random.default_rng(seed)
    H = random_hypergraph(rng, int(rng.integers(1, 12)), int(rng.integers(1, 12)))
    f = rng.standard_normal(H.n)
    a = kernels.edge_extrema_numba(f, *H.csr)
    b = kernels.edge_extrema_numpy(f, *H.csr)
    c = kernels._edge_extrema_py(f, *H.csr)
    for x, y, z in zip(a, b, c):
        assert np.array_equal(x, y) and np.array_equal(x, z)


@given(seeds)
def test_cut_weights_agree(seed):
    rng = np.random.default_rng(seed)
    H = random_hypergraph(rng, int(rng.integers(2, 10)), int(rng.integers(1, 10)))
    tm, hm = H.masks
    a = kernels.cut_weights_numba(H.n, H.omega, tm, hm, H.weights)
    b = kernels.cut_weights_numpy(H.n, H.omega, tm, hm, H.weights)
    for x, y in zip(a, b):
        assert np.allclose(x, y, rtol=0, atol=1e-12)


@given(seeds)
def test_subset_densities_agree(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(1, 9))
    levels = int(rng.integers(1, 3))
    n_in, n_out = (int(x) for x in rng.integers(0, 6, size=2))

    def masks(count):
        return rng.integers(1, 2 ** k, size=count).astype(np.int64)

    args = (k, rng.uniform(0.5, 2, size=k),
            masks(n_in), rng.uniform(-1, 2, size=n_in), rng.integers(0, levels, size=n_in).astype(np.int64),
            masks(n_out), rng.uniform(-1, 2, size=n_out), rng.integers(0, levels, size=n_out).astype(np.int64),
            levels)
    for tilde in (False, True):
        a = kernels.subset_densities_numba(*args, tilde)
        b = kernels.subset_densities_numpy(*args, tilde)
        assert np.allclose(a, b, rtol=0, atol=1e-12)


def test_dinic_small_networks():
    # diamond with a bottleneck of 1
    arcs = [(0, 1, 5.0), (0, 2, 5.0), (1, 3, 5.0), (2, 3, 5.0), (3, 4, 1.0)]
    # each arc is followed by its zero-capacity reverse
    src = np.array([x for u, v, _ in arcs for x in (u, v)], dtype=np.int64)
    dst = np.array([x for u, v, _ in arcs for x in (v, u)], dtype=np.int64)
    cap = np.array([x for *_, c in arcs for x in (c, 0.0)])
    for fn in (kernels.dinic_numba, kernels._dinic_py):
        total, _ = fn(5, src, dst, cap, 0, 4, 1e-12)
        assert total == pytest.approx(1.0)
