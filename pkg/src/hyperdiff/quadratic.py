"""Edge discrepancies, the quadratic form Q, the discrepancy ratio D and the
permutation-resolved gradients of Q."""
import itertools
from dataclasses import dataclass

import numpy as np

from . import kernels

TAU_GROUP = 1e-9


def group_values(values, tol=TAU_GROUP):
    """Rank of the tie group of every coordinate, ascending.

    Groups are formed by sorting and chaining consecutive gaps <= tol, so the
    result does not depend on the input order.
    """
    values = np.asarray(values, dtype=float)
    order = np.argsort(values, kind="stable")
    rank = np.empty(len(values), dtype=np.int64)
    if len(values):
        rank[order] = np.concatenate(([0], np.cumsum(np.diff(values[order]) > tol)))
    return rank


@dataclass(frozen=True)
class OrderedPartition:
    """Ordered equivalence relation on V; ``classes`` is listed in ascending order."""

    classes: tuple

    def __post_init__(self):
        object.__setattr__(self, "classes", tuple(frozenset(c) for c in self.classes))
        if any(not c for c in self.classes):
            raise ValueError("equivalence classes must be nonempty")
        seen = set()
        for c in self.classes:
            if seen & c:
                raise ValueError("equivalence classes must be disjoint")
            seen |= c
        if seen != set(range(len(seen))):
            raise ValueError("classes must cover 0..n-1")

    @property
    def n(self):
        return sum(len(c) for c in self.classes)

    @property
    def rank(self):
        rank = np.empty(self.n, dtype=np.int64)
        for r, c in enumerate(self.classes):
            rank[list(c)] = r
        return rank

    @classmethod
    def from_rank(cls, rank):
        rank = np.asarray(rank)
        levels = np.unique(rank)
        return cls(tuple(frozenset(np.flatnonzero(rank == r).tolist()) for r in levels))

    @classmethod
    def from_values(cls, values, tol=TAU_GROUP):
        return cls.from_rank(group_values(values, tol))

    def refine(self, values, tol=TAU_GROUP):
        """Least refinement compatible with ``values``."""
        values = np.asarray(values, dtype=float)
        out = []
        for c in self.classes:
            members = sorted(c)
            sub = group_values(values[members], tol)
            for r in range(sub.max() + 1):
                out.append(frozenset(members[k] for k in np.flatnonzero(sub == r)))
        return OrderedPartition(tuple(out))

    def is_refined_by(self, other):
        """True when ``other`` is at least as refined as ``self``."""
        mine = self.rank
        theirs = other.rank
        for u in range(self.n):
            for v in range(self.n):
                if mine[u] < mine[v] and not theirs[u] < theirs[v]:
                    return False
        return all(any(c <= d for d in self.classes) for c in other.classes)

    def is_consistent(self, f, tol=TAU_GROUP):
        """Every class precedes the next one in f (non-strictly, within tol)."""
        f = np.asarray(f, dtype=float)
        for lo, hi in zip(self.classes, self.classes[1:]):
            if max(f[list(lo)]) > min(f[list(hi)]) + tol:
                return False
        return True

    def permutations(self):
        """All total orders on V refining this relation (as ascending vertex tuples)."""
        parts = [itertools.permutations(sorted(c)) for c in self.classes]
        for combo in itertools.product(*parts):
            yield tuple(v for block in combo for v in block)

    def count_permutations(self):
        from math import factorial, prod
        return prod(factorial(len(c)) for c in self.classes)


@dataclass(frozen=True)
class EdgeDiscrepancy:
    edge: int
    delta: float
    S: frozenset
    I: frozenset


def edge_extrema(H, f):
    tp, ti, hp, hi = H.csr
    return kernels.edge_extrema(np.ascontiguousarray(f, dtype=float), tp, ti, hp, hi)


def discrepancies(H, f):
    """Raw Delta_e(f) for every edge."""
    tmax, hmin = edge_extrema(H, f)
    return tmax - hmin


def edge_discrepancies(H, f, tol=TAU_GROUP):
    """Per-edge discrepancy with the tied argmax tail set and argmin head set."""
    f = np.asarray(f, dtype=float)
    rank = group_values(f, tol)
    out = []
    for k, e in enumerate(H.edges):
        top = max(rank[u] for u in e.tail)
        bot = min(rank[v] for v in e.head)
        S = frozenset(u for u in e.tail if rank[u] == top)
        I = frozenset(v for v in e.head if rank[v] == bot)
        delta = 0.0 if top == bot else float(max(f[u] for u in e.tail) - min(f[v] for v in e.head))
        out.append(EdgeDiscrepancy(k, delta, S, I))
    return out


def quadratic_form(H, f):
    """Q(f) = 1/2 sum_e w_e ([Delta_e(f)]^+)^2."""
    d = np.maximum(discrepancies(H, f), 0.0)
    return 0.5 * float(np.dot(H.weights, d * d))


def discrepancy_ratio(H, f):
    """D(f) = sum_e w_e ([Delta_e]^+)^2 / sum_u omega_u f_u^2 (no stationary vertices)."""
    if H.stationary:
        raise ValueError("discrepancy ratio is defined only without stationary vertices")
    f = np.asarray(f, dtype=float)
    denom = float(np.dot(H.omega, f * f))
    if denom == 0.0:
        raise ValueError("discrepancy ratio of the zero vector is undefined")
    return 2.0 * quadratic_form(H, f) / denom


def _is_unit(H):
    return bool(np.all(H.omega[H.free] == 1.0))


def _as_rank(sigma, n):
    if isinstance(sigma, OrderedPartition):
        if any(len(c) != 1 for c in sigma.classes):
            raise ValueError("sigma must be a permutation (singleton classes)")
        return sigma.rank
    order = list(sigma)
    if sorted(order) != list(range(n)):
        raise ValueError("sigma must list every vertex exactly once")
    rank = np.empty(n, dtype=np.int64)
    rank[order] = np.arange(n)
    return rank


def grad_Q_sigma(H, f, sigma, tol=TAU_GROUP):
    """Gradient of the permutation-resolved quadratic form, restricted to N.

    ``sigma`` lists the vertices in ascending order (or is a singleton
    OrderedPartition) and must be consistent with f. Each edge active under
    sigma adds +w Delta to its sigma-maximal tail vertex and -w Delta to its
    sigma-minimal head vertex.
    """
    if not _is_unit(H):
        raise ValueError("grad_Q_sigma requires unit weights on non-stationary vertices")
    f = np.asarray(f, dtype=float)
    rank = _as_rank(sigma, H.n)
    order = np.argsort(rank)
    if np.any(np.diff(f[order]) < -tol):
        raise ValueError("sigma is inconsistent with f")
    g = np.zeros(H.n)
    for e in H.edges:
        u = max(e.tail, key=lambda x: rank[x])
        v = min(e.head, key=lambda x: rank[x])
        if rank[u] > rank[v]:
            c = e.w * (f[u] - f[v])
            g[u] += c
            g[v] -= c
    return g[H.free]
