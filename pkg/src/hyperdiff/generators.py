"""Random instance generators for tests, the verify command and benchmarks."""

from .core import DirectedHypergraph, Edge
from .densest import make_instance


def _subset(rng, n, max_size):
    k = int(rng.integers(1, min(max_size, n) + 1))
    return frozenset(rng.choice(n, k, replace=False).tolist())


def random_hypergraph(rng, n, m, max_edge=3, weight_mode="degree", stationary=0,
                      undirected_prob=0.0, integer_weights=False):
    """Random directed hypergraph where every vertex lies on some edge.

    Vertices left uncovered after ``m`` random edges get an extra edge to a
    random partner, so the edge count can exceed ``m``.
    """
    edges = []
    for _ in range(m):
        tail = _subset(rng, n, max_edge)
        head = tail if rng.random() < undirected_prob else _subset(rng, n, max_edge)
        w = float(rng.integers(1, 4)) if integer_weights else float(rng.uniform(0.5, 2.0))
        edges.append(Edge(tail, head, w))
    covered = set().union(*(e.tail | e.head for e in edges)) if edges else set()
    for v in range(n):
        if v not in covered and n > 1:
            u = int(rng.choice([x for x in range(n) if x != v]))
            pair = frozenset((u, v))
            edges.append(Edge(pair, pair, 1.0))
        elif v not in covered:
            edges.append(Edge(frozenset((v,)), frozenset((v,)), 1.0))
    T = frozenset(rng.choice(n, stationary, replace=False).tolist()) if stationary else frozenset()
    return DirectedHypergraph(n, tuple(edges), T, weight_mode)


def tied_vector(rng, n, levels=3):
    """Integer-valued vector so that ties are common."""
    return rng.integers(0, levels, size=n).astype(float)


def random_densest_instance(rng, size, max_arcs=8, stationary=0, max_members=3):
    """Single-level densest-subset instance on ``range(size)``."""
    def arcs(count, offset):
        out = []
        for k in range(count):
            out.append((offset + k, float(rng.uniform(0.1, 2.0)),
                        _subset(rng, size, max_members)))
        return out

    n_in = int(rng.integers(0, max_arcs + 1))
    n_out = int(rng.integers(0, max_arcs + 1))
    omega = rng.uniform(0.5, 2.0, size=size)
    T = set(rng.choice(size, stationary, replace=False).tolist()) if stationary else set()
    omega[list(T)] = 0.0
    return make_instance(range(size), arcs(n_in, 0), arcs(n_out, n_in), omega, T)
