"""Hot numeric kernels.

Every kernel has a numba implementation and a pure-numpy (or plain Python)
fallback. Set ``HYPERDIFF_DISABLE_NUMBA=1`` (or ``NUMBA_DISABLE_JIT=1``) to
force the fallback path. Both implementations stay importable under explicit
names so tests and the benchmark can compare them.
"""
import os

import numpy as np

try:
    if os.environ.get("HYPERDIFF_DISABLE_NUMBA", "0") not in ("", "0"):
        raise ImportError
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - depends on environment
    HAVE_NUMBA = False

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]):
            return args[0]
        return lambda fn: fn


USE_NUMBA = HAVE_NUMBA and os.environ.get("NUMBA_DISABLE_JIT", "0") in ("", "0")

INF_CAP = np.inf


# ----------------------------------------------------------------------------
# edge extrema: max over tails, min over heads
# ----------------------------------------------------------------------------


def _edge_extrema_py(f, tail_ptr, tail_idx, head_ptr, head_idx):
    m = len(tail_ptr) - 1
    tmax = np.empty(m)
    hmin = np.empty(m)
    for e in range(m):
        best = -np.inf
        for k in range(tail_ptr[e], tail_ptr[e + 1]):
            x = f[tail_idx[k]]
            if x > best:
                best = x
        tmax[e] = best
        worst = np.inf
        for k in range(head_ptr[e], head_ptr[e + 1]):
            x = f[head_idx[k]]
            if x < worst:
                worst = x
        hmin[e] = worst
    return tmax, hmin


edge_extrema_numba = njit(cache=True)(_edge_extrema_py)


def edge_extrema_numpy(f, tail_ptr, tail_idx, head_ptr, head_idx):
    if len(tail_ptr) == 1:
        return np.empty(0), np.empty(0)
    tmax = np.maximum.reduceat(f[tail_idx], tail_ptr[:-1])
    hmin = np.minimum.reduceat(f[head_idx], head_ptr[:-1])
    return tmax, hmin


# ----------------------------------------------------------------------------
# exhaustive subset densities (densest-subset oracle, higher-order levels)
# ----------------------------------------------------------------------------


def _subset_densities_py(k, omega, in_mask, in_c, in_lvl, out_mask, out_c, out_lvl,
                         n_levels, tilde):
    """Density vector of every nonempty subset mask of a k-element universe.

    Row ``X - 1`` holds the densities of subset mask ``X``. In the plain mode
    an incoming edge counts when all its receivers are selected and an
    outgoing edge when any giver is selected; ``tilde`` swaps the two rules.
    """
    nsub = (1 << k) - 1
    out = np.zeros((nsub, n_levels))
    num = np.zeros(n_levels)
    for x in range(1, nsub + 1):
        w = 0.0
        for v in range(k):
            if (x >> v) & 1:
                w += omega[v]
        for lv in range(n_levels):
            num[lv] = 0.0
        for j in range(len(in_mask)):
            m = in_mask[j]
            if tilde:
                hit = (m & x) != 0
            else:
                hit = (m & ~x) == 0
            if hit:
                num[in_lvl[j]] += in_c[j]
        for j in range(len(out_mask)):
            m = out_mask[j]
            if tilde:
                hit = (m & ~x) == 0
            else:
                hit = (m & x) != 0
            if hit:
                num[out_lvl[j]] -= out_c[j]
        for lv in range(n_levels):
            out[x - 1, lv] = num[lv] / w
    return out


subset_densities_numba = njit(cache=True)(_subset_densities_py)


def subset_densities_numpy(k, omega, in_mask, in_c, in_lvl, out_mask, out_c, out_lvl,
                           n_levels, tilde):
    x = np.arange(1, 1 << k, dtype=np.int64)
    bits = ((x[:, None] >> np.arange(k, dtype=np.int64)) & 1).astype(float)
    w = bits @ np.asarray(omega, dtype=float)
    num = np.zeros((len(x), n_levels))
    for m, c, lv in zip(in_mask, in_c, in_lvl):
        hit = (m & x) != 0 if tilde else (m & ~x) == 0
        num[:, lv] += c * hit
    for m, c, lv in zip(out_mask, out_c, out_lvl):
        hit = (m & ~x) == 0 if tilde else (m & x) != 0
        num[:, lv] -= c * hit
    return num / w[:, None]


# ----------------------------------------------------------------------------
# exhaustive cut enumeration for the edge expansion
# ----------------------------------------------------------------------------


def _cut_weights_py(n, omega, tail_mask, head_mask, weight):
    """Outgoing/incoming cut weight and vertex weight for every subset mask."""
    full = (1 << n) - 1
    nsub = full
    outw = np.zeros(nsub)
    inw = np.zeros(nsub)
    vol = np.zeros(nsub)
    for x in range(1, nsub + 1):
        comp = full & ~x
        s = 0.0
        for v in range(n):
            if (x >> v) & 1:
                s += omega[v]
        vol[x - 1] = s
        a = 0.0
        b = 0.0
        for e in range(len(weight)):
            t = tail_mask[e]
            h = head_mask[e]
            if (t & x) != 0 and (h & comp) != 0:
                a += weight[e]
            if (h & x) != 0 and (t & comp) != 0:
                b += weight[e]
        outw[x - 1] = a
        inw[x - 1] = b
    return outw, inw, vol


cut_weights_numba = njit(cache=True)(_cut_weights_py)


def cut_weights_numpy(n, omega, tail_mask, head_mask, weight):
    full = (1 << n) - 1
    x = np.arange(1, 1 << n, dtype=np.int64)
    comp = full & ~x
    bits = ((x[:, None] >> np.arange(n, dtype=np.int64)) & 1).astype(float)
    vol = bits @ np.asarray(omega, dtype=float)
    outw = np.zeros(len(x))
    inw = np.zeros(len(x))
    for t, h, w in zip(tail_mask, head_mask, weight):
        outw += w * (((t & x) != 0) & ((h & comp) != 0))
        inw += w * (((h & x) != 0) & ((t & comp) != 0))
    return outw, inw, vol


# ----------------------------------------------------------------------------
# Dinic max-flow on an arc list
# ----------------------------------------------------------------------------


def _dinic_py(n_nodes, src, dst, cap, s, t, eps):
    """Max flow by Dinic's algorithm.

    Arcs ``2k`` / ``2k+1`` are the forward arc and its reverse. Returns the
    flow value and the residual capacities; residual entries at or below
    ``eps`` count as saturated.
    """
    n_arcs = len(src)
    res = cap.copy()
    # CSR adjacency over arcs by tail node
    deg = np.zeros(n_nodes + 1, dtype=np.int64)
    for a in range(n_arcs):
        deg[src[a] + 1] += 1
    for v in range(n_nodes):
        deg[v + 1] += deg[v]
    adj = np.empty(n_arcs, dtype=np.int64)
    fill = deg[:-1].copy()
    for a in range(n_arcs):
        adj[fill[src[a]]] = a
        fill[src[a]] += 1

    level = np.empty(n_nodes, dtype=np.int64)
    it = np.empty(n_nodes, dtype=np.int64)
    queue = np.empty(n_nodes, dtype=np.int64)
    stack = np.empty(n_nodes, dtype=np.int64)  # arcs on current path
    total = 0.0
    while True:
        for v in range(n_nodes):
            level[v] = -1
        level[s] = 0
        qh = 0
        qt = 0
        queue[qt] = s
        qt += 1
        while qh < qt:
            v = queue[qh]
            qh += 1
            for k in range(deg[v], deg[v + 1]):
                a = adj[k]
                u = dst[a]
                if res[a] > eps and level[u] < 0:
                    level[u] = level[v] + 1
                    queue[qt] = u
                    qt += 1
        if level[t] < 0:
            break
        for v in range(n_nodes):
            it[v] = deg[v]
        # iterative blocking-flow search
        while True:
            depth = 0
            v = s
            found = False
            while True:
                if v == t:
                    found = True
                    break
                advanced = False
                while it[v] < deg[v + 1]:
                    a = adj[it[v]]
                    u = dst[a]
                    if res[a] > eps and level[u] == level[v] + 1:
                        stack[depth] = a
                        depth += 1
                        v = u
                        advanced = True
                        break
                    it[v] += 1
                if advanced:
                    continue
                # dead end: retreat
                if depth == 0:
                    break
                level[v] = -1
                depth -= 1
                v = src[stack[depth]]
                it[v] += 1
            if not found:
                break
            push = np.inf
            for d in range(depth):
                if res[stack[d]] < push:
                    push = res[stack[d]]
            for d in range(depth):
                a = stack[d]
                res[a] -= push
                res[a ^ 1] += push
            total += push
    return total, res


dinic_numba = njit(cache=True)(_dinic_py)


def _reaches_sink_py(n_nodes, src, dst, res, t, eps):
    """Nodes that can still reach ``t`` through arcs with residual > eps."""
    mark = np.zeros(n_nodes, dtype=np.bool_)
    mark[t] = True
    changed = True
    while changed:
        changed = False
        for a in range(len(src)):
            if res[a] > eps and mark[dst[a]] and not mark[src[a]]:
                mark[src[a]] = True
                changed = True
    return mark


reaches_sink_numba = njit(cache=True)(_reaches_sink_py)


if USE_NUMBA:
    edge_extrema = edge_extrema_numba
    subset_densities = subset_densities_numba
    cut_weights = cut_weights_numba
    dinic = dinic_numba
    reaches_sink = reaches_sink_numba
else:
    edge_extrema = edge_extrema_numpy
    subset_densities = subset_densities_numpy
    cut_weights = cut_weights_numpy
    dinic = _dinic_py
    reaches_sink = _reaches_sink_py
