"""The diffusion operator: first derivative, higher-order derivative tower and
per-edge measure flow assignment."""
from dataclasses import dataclass, field

import numpy as np

from . import densest
from .densest import MAX, MIN, Arc, DensestInstance, FlowNetwork, Level
from .quadratic import TAU_GROUP, OrderedPartition, edge_extrema, group_values

__all__ = [
    "OrderedPartition", "DerivativeTower", "FlowAssignment", "ClassRecord",
    "induced_partition", "first_derivative", "derivative_tower", "flow_assignment",
    "diffusion_operator",
]


@dataclass(frozen=True)
class ClassRecord:
    """One equivalence class of the next level and how it was obtained.

    ``instance`` holds the arcs the class was charged for at every level so
    far; ``mode`` is None for the part of a class that stays with its
    stationary vertices.
    """

    members: frozenset
    value: float
    instance: DensestInstance = field(repr=False)
    mode: str = None


def induced_partition(f, tol=TAU_GROUP):
    """Ordered partition of V into groups of equal f (within tol), ascending."""
    return OrderedPartition.from_values(f, tol)


def _separate(inst, method):
    """Split one class by repeatedly extracting maximal (least) densest subsets."""
    records = []
    cur = inst
    while cur.universe:
        if len(cur.universe) == 1 and not cur.stationary:
            # a lone vertex is its own densest subset
            d = densest.density_vector(cur, cur.universe, MAX)
            records.append(ClassRecord(cur.universe, d[-1], cur, MAX))
            break
        sol = densest.solve(cur, MAX, method)
        mode = MAX
        if sol.P & cur.stationary:
            sol = densest.solve(cur, MIN, method)
            mode = MIN
            if sol.P & cur.stationary:
                records.append(ClassRecord(cur.universe, 0.0, cur, None))
                break
        restricted, cur = densest.split(cur, sol.P, mode)
        records.append(ClassRecord(sol.P, sol.density, restricted, mode))
    return records


def _class_levels(H, part, coef, active, ranks):
    """Current-level arcs for every class of ``part``.

    ``ranks`` is the class rank of every vertex; an active edge gives its
    coefficient to the head vertices of its lowest class and draws it from
    the tail vertices of its highest class.
    """
    incoming = [[] for _ in part.classes]
    outgoing = [[] for _ in part.classes]
    for k in active:
        c = coef[k]
        if c == 0.0:
            continue
        e = H.edges[k]
        top = max(ranks[u] for u in e.tail)
        bot = min(ranks[v] for v in e.head)
        outgoing[top].append(Arc(k, c, frozenset(u for u in e.tail if ranks[u] == top)))
        incoming[bot].append(Arc(k, c, frozenset(v for v in e.head if ranks[v] == bot)))
    return [Level(tuple(i), tuple(o)) for i, o in zip(incoming, outgoing)]


def _next_level(H, part, level_arcs, histories, method):
    """Separate every class; returns (derivative vector, refined partition, records)."""
    fnext = np.zeros(H.n)
    classes = []
    records_all = []
    for r, U in enumerate(part.classes):
        hist = histories[r] if histories is not None else ()
        lv = level_arcs[r]
        inst = DensestInstance(U, lv.incoming, lv.outgoing, H.omega,
                               H.stationary & U, hist)
        recs = _separate(inst, method)
        for rec in recs:
            for v in rec.members:
                fnext[v] = rec.value if rec.mode is not None else 0.0
        # order inside U by derivative value; the stationary remainder sits at 0
        recs = sorted(recs, key=lambda rec: rec.value if rec.mode is not None else 0.0)
        classes.extend(rec.members for rec in recs)
        records_all.extend(recs)
    fnext[list(H.stationary)] = 0.0
    return fnext, OrderedPartition(tuple(classes)), records_all


def _level_zero_fast(H, f, tol):
    """First derivative with a vectorized path for singleton classes."""
    f = np.asarray(f, dtype=float)
    rank = group_values(f, tol)
    tmax, hmin = edge_extrema(H, f)
    rtop, rbot = edge_extrema(H, rank.astype(float))
    act = np.flatnonzero(rtop > rbot)
    nclass = int(rank.max()) + 1
    sizes = np.bincount(rank, minlength=nclass)
    c = H.weights[act] * (tmax[act] - hmin[act])
    net = np.zeros(nclass)
    np.add.at(net, rbot[act].astype(np.int64), c)
    np.subtract.at(net, rtop[act].astype(np.int64), c)
    f1 = np.zeros(H.n)
    single = sizes[rank] == 1
    f1[single] = net[rank[single]] / np.where(H.omega[single] > 0, H.omega[single], 1.0)
    big = np.flatnonzero(sizes > 1)
    if len(big):
        part = OrderedPartition.from_rank(rank)
        coef = np.zeros(H.m)
        coef[act] = c
        big_set = set(big.tolist())
        levels = _class_levels(H, part, coef, [int(k) for k in act
                                                if int(rtop[k]) in big_set or int(rbot[k]) in big_set],
                               rank)
        for r in big:
            U = part.classes[r]
            lv = levels[r]
            inst = DensestInstance(U, lv.incoming, lv.outgoing, H.omega, H.stationary & U)
            for rec in _separate(inst, "mincut"):
                val = rec.value if rec.mode is not None else 0.0
                for v in rec.members:
                    f1[v] = val
    f1[list(H.stationary)] = 0.0
    return f1


def first_derivative(H, f, tol=TAU_GROUP):
    """df/dt under the diffusion rules and the operator value L_omega f on N.

    Returns ``(f1, Lf)`` where ``f1`` has length n (0 on stationary vertices)
    and ``Lf = -f1`` restricted to the non-stationary vertices.
    """
    f = np.asarray(f, dtype=float)
    if f.shape != (H.n,):
        raise ValueError(f"density vector must have length {H.n}")
    if not np.all(np.isfinite(f)):
        raise ValueError("density vector has non-finite entries")
    f1 = _level_zero_fast(H, f, tol)
    return f1, -f1[H.free]


def diffusion_operator(H, f, tol=TAU_GROUP):
    """L_omega f, a vector on the non-stationary vertices."""
    return first_derivative(H, f, tol)[1]


# ----------------------------------------------------------------------------
# derivative tower
# ----------------------------------------------------------------------------


@dataclass
class DerivativeTower:
    k: int
    derivatives: list          # f^(0) .. f^(k)
    partitions: list           # sigma_0 .. sigma_k
    deltas: list               # Delta^(i) for every edge, i = 0..k
    active: list               # E_+^(i) as frozensets of edge ids
    ambiguous: list            # E_0^(i)
    records: list = field(default_factory=list, repr=False)  # ClassRecords per level

    def inactive(self, i, m):
        return frozenset(range(m)) - self.active[i] - self.ambiguous[i]

    def to_dict(self):
        return {
            "k": self.k,
            "derivatives": [d.tolist() for d in self.derivatives],
            "partitions": [[sorted(c) for c in p.classes] for p in self.partitions],
            "deltas": [d.tolist() for d in self.deltas],
            "active": [sorted(a) for a in self.active],
            "ambiguous": [sorted(a) for a in self.ambiguous],
        }


def _deltas(H, g, ranks):
    """g over the top tail class minus g over the bottom head class; 0 when
    both are the same class."""
    out = np.zeros(H.m)
    for k, e in enumerate(H.edges):
        top = max(ranks[u] for u in e.tail)
        bot = min(ranks[v] for v in e.head)
        if top != bot:
            out[k] = (max(g[u] for u in e.tail if ranks[u] == top)
                      - min(g[v] for v in e.head if ranks[v] == bot))
    return out


def derivative_tower(H, f, k, tol=TAU_GROUP, level0_method="mincut"):
    """f^(0..k) with their ordered partitions and per-level edge status.

    Level 0 is solved with the min-cut densest subset solver, higher levels by
    lexicographic enumeration inside each class (class size capped at 20).
    """
    f = np.asarray(f, dtype=float)
    if k < 0:
        raise ValueError("order k must be nonnegative")
    part = induced_partition(f, tol)
    ranks = part.rank
    delta = _deltas(H, f, ranks)
    active = frozenset(int(e) for e in np.flatnonzero(delta > 0))
    ambiguous = frozenset(int(e) for e in np.flatnonzero(delta == 0))
    tower = DerivativeTower(k, [f.copy()], [part], [delta], [active], [ambiguous])
    histories = None
    for i in range(k):
        coef = H.weights * tower.deltas[i]
        levels = _class_levels(H, part, coef, sorted(tower.active[i]), ranks)
        method = level0_method if i == 0 else "enumerate"
        fnext, part, records = _next_level(H, part, levels, histories, method)
        ranks = part.rank
        raw = _deltas(H, fnext, ranks)
        scale = tol * max(1.0, float(np.abs(fnext).max()) if H.n else 1.0)
        prev_amb = tower.ambiguous[i]
        promoted = frozenset(e for e in prev_amb if raw[e] > scale)
        still = frozenset(e for e in prev_amb if abs(raw[e]) <= scale)
        for e in still:
            raw[e] = 0.0
        tower.derivatives.append(fnext)
        tower.partitions.append(part)
        tower.deltas.append(raw)
        tower.active.append(tower.active[i] | promoted)
        tower.ambiguous.append(still)
        tower.records.append(records)
        # every new class carries the arcs it was charged for at levels 0..i
        by_class = {rec.members: rec.instance.levels for rec in records}
        histories = [by_class[c] for c in part.classes]
    return tower


# ----------------------------------------------------------------------------
# flow assignment
# ----------------------------------------------------------------------------


@dataclass
class FlowAssignment:
    """Measure rates phi_u(e) into vertex u due to edge e."""

    rates: dict

    def vertex_totals(self, n):
        out = np.zeros(n)
        for (_, u), r in self.rates.items():
            out[u] += r
        return out

    def residuals(self, H, f, f1, tol=TAU_GROUP):
        """Worst violation of the three diffusion rules.

        Returns a dict with ``R0`` (per vertex |omega f1 - sum phi|), ``R1``
        (largest rate on a vertex outside the tied extremes of an active edge
        or on an inactive edge) and ``R2`` (per edge mismatch of the giving
        and receiving totals against w Delta).
        """
        from .quadratic import edge_discrepancies
        ed = edge_discrepancies(H, f, tol)
        tot = self.vertex_totals(H.n)
        r0 = float(np.max(np.abs(H.omega * f1 - tot)[H.free], initial=0.0))
        r1 = 0.0
        r2 = 0.0
        for d in ed:
            rates = {u: r for (e, u), r in self.rates.items() if e == d.edge}
            if d.delta <= 0:
                r1 = max(r1, max((abs(r) for r in rates.values()), default=0.0))
                continue
            for u, r in rates.items():
                if r < 0 and u not in d.S:
                    r1 = max(r1, -r)
                if r > 0 and u not in d.I:
                    r1 = max(r1, r)
            c = H.edges[d.edge].w * d.delta
            give = -sum(r for u, r in rates.items() if u in d.S and r < 0)
            get = sum(r for u, r in rates.items() if u in d.I and r > 0)
            r2 = max(r2, abs(give - c), abs(get - c))
        return {"R0": r0, "R1": r1, "R2": r2}


def flow_assignment(H, f, f1=None, tol=TAU_GROUP):
    """Per-edge, per-vertex measure rates realizing the first derivative.

    Each class of the refined partition is handled by a feasible-flow problem
    from its incoming arcs (and vertices that lose measure) to its outgoing
    arcs (and vertices that gain measure); stationary vertices of a class
    share one hub that absorbs or releases the balance.
    """
    f = np.asarray(f, dtype=float)
    tower = derivative_tower(H, f, 1, tol)
    if f1 is None:
        f1 = tower.derivatives[1]
    f1 = np.asarray(f1, dtype=float)
    rates = {}
    for rec in tower.records[0]:
        lv = rec.instance.levels[0]
        net = FlowNetwork(2)
        s, t = 0, 1
        node = {v: net.add_node() for v in sorted(rec.members)}
        supply = 0.0
        balance = sum(a.c for a in lv.incoming) - sum(a.c for a in lv.outgoing)
        for v in sorted(rec.members & set(np.flatnonzero(H.free).tolist())):
            target = H.omega[v] * f1[v]
            balance -= target
            if target > 0:
                net.add_arc(node[v], t, target)
            elif target < 0:
                net.add_arc(s, node[v], -target)
                supply -= target
        T = sorted(rec.members & H.stationary)
        if T:
            hub = net.add_node()
            for v in T:
                net.add_arc(node[v], hub, np.inf)
                net.add_arc(hub, node[v], np.inf)
            if balance > 0:
                net.add_arc(hub, t, balance)
            elif balance < 0:
                net.add_arc(s, hub, -balance)
                supply -= balance
        in_arcs = []
        for a in lv.incoming:
            x = net.add_node()
            net.add_arc(s, x, a.c)
            supply += a.c
            in_arcs.append((a, {v: net.add_arc(x, node[v], np.inf) for v in sorted(a.members)}))
        out_arcs = []
        for a in lv.outgoing:
            y = net.add_node()
            net.add_arc(y, t, a.c)
            out_arcs.append((a, {v: net.add_arc(node[v], y, np.inf) for v in sorted(a.members)}))
        res = densest.max_flow(net, s, t)
        if abs(res.value - supply) > 1e-9 * max(1.0, supply):
            raise RuntimeError(f"flow assignment infeasible for class {sorted(rec.members)}: "
                               f"routed {res.value} of {supply}")
        for a, ids in in_arcs:
            for v, arc_id in ids.items():
                fl = res.flow(arc_id)
                if fl:
                    rates[(a.edge, v)] = rates.get((a.edge, v), 0.0) + fl
        for a, ids in out_arcs:
            for v, arc_id in ids.items():
                fl = res.flow(arc_id)
                if fl:
                    rates[(a.edge, v)] = rates.get((a.edge, v), 0.0) - fl
    return FlowAssignment(rates)
