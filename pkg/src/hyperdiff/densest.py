"""Densest and least-densest subset problems.

An instance lives on a candidate set U (one equivalence class). Incoming arcs
deliver c_e to their receivers, outgoing arcs draw c_e from their givers. The
plain density of X counts an incoming arc when all its receivers lie in X and
an outgoing arc when some giver does; the tilde density used by the least
densest problem swaps the two rules. Sets touching a stationary vertex have
density 0.

Single-level instances with positive coefficients are solved exactly by a
Dinkelbach iteration over a project-selection min cut. Instances that carry a
history of earlier levels are compared lexicographically and solved by
enumeration.
"""
from dataclasses import dataclass, field

import numpy as np

from . import kernels

MAX = "max"
MIN = "min"
ENUMERATION_CAP = 20


@dataclass(frozen=True)
class Arc:
    """An edge taking part in an instance with coefficient ``c``."""

    edge: int
    c: float
    members: frozenset


@dataclass(frozen=True)
class Level:
    incoming: tuple = ()
    outgoing: tuple = ()


@dataclass(frozen=True, eq=False)
class DensestInstance:
    universe: frozenset
    incoming: tuple
    outgoing: tuple
    omega: np.ndarray = field(repr=False)
    stationary: frozenset = frozenset()
    history: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "universe", frozenset(self.universe))
        object.__setattr__(self, "stationary", frozenset(self.stationary) & self.universe)
        for arc in self.incoming + self.outgoing:
            if not arc.members or not arc.members <= self.universe:
                raise ValueError(f"arc for edge {arc.edge}: members must be a nonempty subset of U")

    @property
    def levels(self):
        return self.history + (Level(self.incoming, self.outgoing),)

    @property
    def free(self):
        return self.universe - self.stationary


@dataclass(frozen=True)
class DensestSolution:
    P: frozenset
    density: float
    mode: str
    vector: tuple = ()


def make_instance(universe, incoming, outgoing, omega, stationary=(), history=()):
    """Convenience constructor from (edge, c, members) triples."""
    def arcs(items):
        return tuple(a if isinstance(a, Arc) else Arc(a[0], float(a[1]), frozenset(a[2]))
                     for a in items)
    hist = tuple(Level(arcs(lv[0]), arcs(lv[1])) if not isinstance(lv, Level) else lv
                 for lv in history)
    return DensestInstance(frozenset(universe), arcs(incoming), arcs(outgoing),
                           np.asarray(omega, dtype=float), frozenset(stationary), hist)


def _level_density(level, X, omega, mode):
    num = 0.0
    for a in level.incoming:
        if (a.members & X) if mode == MIN else a.members <= X:
            num += a.c
    for a in level.outgoing:
        if a.members <= X if mode == MIN else (a.members & X):
            num -= a.c
    return num / float(sum(omega[v] for v in X))


def density(inst, X, mode=MAX):
    """Current-level density of X; ``mode='min'`` gives the tilde density."""
    X = frozenset(X)
    if not X:
        raise ValueError("density of the empty set is undefined")
    if not X <= inst.universe:
        raise ValueError("X must be a subset of the instance universe")
    if X & inst.stationary:
        return 0.0
    return _level_density(Level(inst.incoming, inst.outgoing), X, inst.omega, mode)


def density_vector(inst, X, mode=MAX):
    """Densities of X at every level, earliest first."""
    X = frozenset(X)
    if not X:
        raise ValueError("density of the empty set is undefined")
    if X & inst.stationary:
        return tuple(0.0 for _ in inst.levels)
    return tuple(_level_density(lv, X, inst.omega, mode) for lv in inst.levels)


def lex_compare(h1, h2, tol=0.0):
    """-1, 0 or 1 as h1 is lexicographically below, equal to or above h2."""
    if len(h1) != len(h2):
        raise ValueError("density histories must have equal length")
    for a, b in zip(h1, h2):
        if a > b + tol:
            return 1
        if a < b - tol:
            return -1
    return 0


# ----------------------------------------------------------------------------
# restriction and residual instances
# ----------------------------------------------------------------------------


def _split_level(level, P, mode):
    """(restricted, residual) arcs of one level after extracting P in ``mode``."""
    r_in, r_out, q_in, q_out = [], [], [], []
    for a in level.incoming:
        if mode == MAX:
            if a.members <= P:
                r_in.append(a)
            else:
                q_in.append(Arc(a.edge, a.c, a.members - P))
        else:
            if a.members & P:
                r_in.append(Arc(a.edge, a.c, a.members & P))
            else:
                q_in.append(a)
    for a in level.outgoing:
        if mode == MAX:
            if a.members & P:
                r_out.append(Arc(a.edge, a.c, a.members & P))
            else:
                q_out.append(a)
        else:
            if a.members <= P:
                r_out.append(a)
            else:
                q_out.append(Arc(a.edge, a.c, a.members - P))
    return Level(tuple(r_in), tuple(r_out)), Level(tuple(q_in), tuple(q_out))


def split(inst, P, mode):
    """Instance restricted to P and residual instance on U \\ P, at every level.

    The restricted instance keeps exactly the arcs that P was charged for when
    it was extracted; the residual drops them and trims the remaining arcs to
    the leftover vertices.
    """
    P = frozenset(P)
    restricted, residual = [], []
    for lv in inst.levels:
        r, q = _split_level(lv, P, mode)
        restricted.append(r)
        residual.append(q)
    rest = inst.universe - P

    def build(univ, levels):
        return DensestInstance(univ, levels[-1].incoming, levels[-1].outgoing, inst.omega,
                               inst.stationary & univ, tuple(levels[:-1]))
    return build(P, restricted), build(rest, residual)


# ----------------------------------------------------------------------------
# max flow
# ----------------------------------------------------------------------------


class FlowNetwork:
    """Directed capacitated graph; ``np.inf`` marks an uncapacitated arc."""

    def __init__(self, n_nodes):
        self.n_nodes = n_nodes
        self._src, self._dst, self._cap = [], [], []

    def add_node(self):
        self.n_nodes += 1
        return self.n_nodes - 1

    def add_arc(self, u, v, cap):
        if not (0 <= u < self.n_nodes and 0 <= v < self.n_nodes):
            raise ValueError(f"arc ({u}, {v}) references a missing node")
        if not cap >= 0:
            raise ValueError(f"arc ({u}, {v}) has negative capacity")
        self._src += [u, v]
        self._dst += [v, u]
        self._cap += [cap, 0.0]
        return len(self._src) // 2 - 1

    def arrays(self):
        return (np.array(self._src, dtype=np.int64), np.array(self._dst, dtype=np.int64),
                np.array(self._cap, dtype=float))


@dataclass(frozen=True)
class FlowResult:
    value: float
    source_side: frozenset
    flows: np.ndarray  # per arc id

    def flow(self, arc_id):
        return float(self.flows[arc_id])


def max_flow(network, s, t, eps=None):
    """Exact max flow; returns the value, the maximal source side of a minimum
    cut and the flow on every arc."""
    if s == t:
        raise ValueError("source and sink must differ")
    src, dst, cap = network.arrays()
    if eps is None:
        finite = cap[np.isfinite(cap)]
        eps = 1e-12 * max(1.0, float(finite.sum()) if len(finite) else 1.0)
    # uncapacitated arcs get a bound that no cut can reach
    finite_total = float(cap[np.isfinite(cap)].sum())
    big = 4.0 * finite_total + 1.0
    capped = np.where(np.isinf(cap), big, cap)
    value, res = kernels.dinic(network.n_nodes, src, dst, capped, s, t, eps)
    if value >= big / 2:
        raise ValueError("unbounded flow: an infinite-capacity s-t path exists")
    reach = kernels.reaches_sink(network.n_nodes, src, dst, res, t, eps)
    side = frozenset(int(v) for v in np.flatnonzero(~reach))
    flows = (capped - res)[0::2]
    return FlowResult(float(value), side, flows)


# ----------------------------------------------------------------------------
# solvers
# ----------------------------------------------------------------------------


def _free_arcs(inst, level, mode):
    """Arcs of ``level`` as seen by stationary-free subsets, with the roles
    normalized so that 'gain' arcs need all members and 'cost' arcs any."""
    T = inst.stationary
    if mode == MAX:
        gain, cost = level.incoming, level.outgoing
    else:
        gain, cost = level.outgoing, level.incoming
    gain = [a for a in gain if not (a.members & T)]
    cost = [Arc(a.edge, a.c, a.members - T) for a in cost if a.members - T]
    return gain, cost


def _mincut_best(free, omega, gain, cost, lam):
    """max_X sum_gain - sum_cost - lam*omega(X) and the maximal maximizer."""
    verts = sorted(free)
    net = FlowNetwork(2)
    s, t = 0, 1
    node = {v: net.add_node() for v in verts}
    const = 0.0
    for v in verts:
        wv = lam * omega[v]
        if wv >= 0:
            net.add_arc(node[v], t, wv)
        else:
            net.add_arc(s, node[v], -wv)
            const -= wv
    for a in gain:
        x = net.add_node()
        net.add_arc(s, x, a.c)
        const += a.c
        for v in a.members:
            net.add_arc(x, node[v], np.inf)
    for a in cost:
        y = net.add_node()
        net.add_arc(y, t, a.c)
        for v in a.members:
            net.add_arc(node[v], y, np.inf)
    scale = 1.0 + sum(a.c for a in gain) + sum(a.c for a in cost) + abs(lam) * sum(omega[v] for v in verts)
    res = max_flow(net, s, t, eps=1e-11 * scale)
    X = frozenset(v for v in verts if node[v] in res.source_side)
    return const - res.value, X, scale


def _ratio(free_set, omega, gain, cost):
    num = sum(a.c for a in gain if a.members <= free_set) - sum(a.c for a in cost if a.members & free_set)
    return num / float(sum(omega[v] for v in free_set))


def _solve_free_mincut(inst, mode):
    gain, cost = _free_arcs(inst, Level(inst.incoming, inst.outgoing), mode)
    if any(a.c <= 0 for a in gain + cost):
        raise ValueError("min-cut solver needs positive arc coefficients")
    free = inst.free
    lam = _ratio(free, inst.omega, gain, cost)
    limit = len(free) + len(gain) + len(cost) + 5
    for _ in range(limit):
        g, X, scale = _mincut_best(free, inst.omega, gain, cost, lam)
        if g <= 1e-11 * scale or not X:
            break
        nxt = _ratio(X, inst.omega, gain, cost)
        if nxt <= lam:
            break
        lam = nxt
    # maximal optimizer: maximal source side at the optimal ratio
    _, X, _ = _mincut_best(free, inst.omega, gain, cost, lam)
    if not X:
        raise RuntimeError("densest-subset min cut returned an empty set")
    value = _ratio(X, inst.omega, gain, cost)
    return X, (value if mode == MAX else -value)


def _enumerate_free(inst, mode):
    """Lexicographically optimal stationary-free subsets by exhaustive search.

    Returns (union of all optimal subsets, its density vector) or None when
    the instance has no stationary-free vertex.
    """
    verts = sorted(inst.free)
    k = len(verts)
    if k == 0:
        return None
    if k > ENUMERATION_CAP:
        raise ValueError(f"class of {k} vertices exceeds enumeration cap {ENUMERATION_CAP}")
    local = {v: i for i, v in enumerate(verts)}
    in_mask, in_c, in_lvl, out_mask, out_c, out_lvl = [], [], [], [], [], []
    levels = inst.levels
    for li, lv in enumerate(levels):
        gain, cost = _free_arcs(inst, lv, mode)
        # 'gain' arcs were passed through the role swap for MIN; map back to the
        # kernel's incoming/outgoing convention with its tilde flag
        for a in gain:
            m = sum(1 << local[v] for v in a.members)
            if mode == MAX:
                in_mask.append(m); in_c.append(a.c); in_lvl.append(li)
            else:
                out_mask.append(m); out_c.append(a.c); out_lvl.append(li)
        for a in cost:
            m = sum(1 << local[v] for v in a.members)
            if mode == MAX:
                out_mask.append(m); out_c.append(a.c); out_lvl.append(li)
            else:
                in_mask.append(m); in_c.append(a.c); in_lvl.append(li)
    om = np.array([inst.omega[v] for v in verts], dtype=float)
    dens = kernels.subset_densities(
        k, om,
        np.array(in_mask, dtype=np.int64), np.array(in_c, dtype=float), np.array(in_lvl, dtype=np.int64),
        np.array(out_mask, dtype=np.int64), np.array(out_c, dtype=float), np.array(out_lvl, dtype=np.int64),
        len(levels), mode == MIN)
    sign = 1.0 if mode == MAX else -1.0
    cand = np.arange(dens.shape[0])
    for li in range(len(levels)):
        col = sign * dens[cand, li]
        best = col.max()
        cand = cand[col >= best - 1e-11 * max(1.0, abs(best))]
    union = 0
    for x in cand:
        union |= int(x) + 1
    P = frozenset(verts[i] for i in range(k) if (union >> i) & 1)
    return P, density_vector(inst, P, mode)


def solve(inst, mode=MAX, method="auto"):
    """Maximal (least) densest subset.

    ``mode='max'`` maximizes the plain density, ``mode='min'`` minimizes the
    tilde density; ties go to the larger set. With stationary vertices in U,
    the zero-density option of joining them is part of the comparison, and the
    whole of U is returned when it wins. ``method`` is 'mincut', 'enumerate' or
    'auto' (min cut for single-level instances).
    """
    if mode not in (MAX, MIN):
        raise ValueError(f"mode must be 'max' or 'min', got {mode!r}")
    if not inst.universe:
        raise ValueError("empty instance")
    if method == "auto":
        method = "mincut" if not inst.history else "enumerate"
    if method == "mincut" and inst.history:
        raise ValueError("min-cut solver handles single-level instances only")

    zeros = tuple(0.0 for _ in inst.levels)
    if not inst.free:
        return DensestSolution(inst.universe, 0.0, mode, zeros)
    if method == "mincut":
        P, d = _solve_free_mincut(inst, mode)
        vec = (d,)
    elif method == "enumerate":
        P, vec = _enumerate_free(inst, mode)
        d = vec[-1]
    else:
        raise ValueError(f"unknown method {method!r}")

    if inst.stationary:
        tol = 1e-11
        cmp = lex_compare(vec, zeros, tol=tol)
        if (mode == MAX and cmp <= 0) or (mode == MIN and cmp >= 0):
            return DensestSolution(inst.universe, 0.0, mode, zeros)
    return DensestSolution(P, d, mode, tuple(vec))


def brute_force(inst, mode=MAX):
    """Reference solver: plain Python loop over all subsets of U.

    Uses the stated density definitions directly (stationary sets score 0) and
    returns the union of every optimizer.
    """
    verts = sorted(inst.universe)
    k = len(verts)
    if k > ENUMERATION_CAP:
        raise ValueError("instance too large for brute force")
    best = None
    sets = []
    for x in range(1, 1 << k):
        X = frozenset(verts[i] for i in range(k) if (x >> i) & 1)
        vec = density_vector(inst, X, mode)
        if mode == MIN:
            key = tuple(-v for v in vec)
        else:
            key = vec
        if best is None or lex_compare(key, best, 1e-11) > 0:
            best = key
            sets = [X]
        elif lex_compare(key, best, 1e-11) == 0:
            sets.append(X)
    P = frozenset().union(*sets)
    vec = density_vector(inst, P, mode)
    return DensestSolution(P, vec[-1], mode, vec)
