"""Directed hypergraphs with stationary vertices: data model, ingestion, cuts."""
import json
from dataclasses import dataclass, field
from functools import cached_property

import numpy as np

from . import kernels

WEIGHT_MODES = ("degree", "unit", "custom")
ENUMERATION_CAP = 20


class HypergraphError(ValueError):
    """Invalid hypergraph input."""


@dataclass(frozen=True)
class Edge:
    tail: frozenset
    head: frozenset
    w: float


@dataclass(frozen=True, eq=False)
class DirectedHypergraph:
    """Edge-weighted directed hypergraph on vertices ``0..n-1``.

    ``omega`` has one entry per vertex; stationary vertices carry no weight and
    hold 0 there, so ``omega`` doubles as the diagonal of the weighted inner
    product restricted to the non-stationary vertices.
    """

    n: int
    edges: tuple
    stationary: frozenset = frozenset()
    weight_mode: str = "degree"
    omega: np.ndarray = field(default=None, repr=False)
    names: tuple = None

    def __post_init__(self):
        if self.n < 1:
            raise HypergraphError("hypergraph needs at least one vertex")
        if self.weight_mode not in WEIGHT_MODES:
            raise HypergraphError(f"unknown weight_mode {self.weight_mode!r}")
        edges = tuple(
            e if isinstance(e, Edge) else Edge(frozenset(e[0]), frozenset(e[1]), float(e[2]))
            for e in self.edges
        )
        for i, e in enumerate(edges):
            if not e.tail:
                raise HypergraphError(f"edge {i}: empty tail")
            if not e.head:
                raise HypergraphError(f"edge {i}: empty head")
            if not (e.w > 0 and np.isfinite(e.w)):
                raise HypergraphError(f"edge {i}: non-positive weight {e.w}")
            for v in e.tail | e.head:
                if not (isinstance(v, (int, np.integer)) and 0 <= v < self.n):
                    raise HypergraphError(f"edge {i}: vertex id {v!r} out of range")
        stationary = frozenset(int(v) for v in self.stationary)
        for v in stationary:
            if not 0 <= v < self.n:
                raise HypergraphError(f"stationary vertex {v} out of range")
        object.__setattr__(self, "edges", edges)
        object.__setattr__(self, "stationary", stationary)

        if self.weight_mode == "degree":
            omega = np.zeros(self.n)
            for e in edges:
                for v in e.tail | e.head:
                    omega[v] += e.w
        elif self.weight_mode == "unit":
            omega = np.ones(self.n)
        else:
            if self.omega is None:
                raise HypergraphError("custom weight_mode requires omega")
            omega = np.array(self.omega, dtype=float)
            if omega.shape != (self.n,):
                raise HypergraphError("omega must have one entry per vertex")
        omega = omega.copy()
        omega[list(stationary)] = 0.0
        free = np.ones(self.n, dtype=bool)
        free[list(stationary)] = False
        if np.any(~(omega[free] > 0)):
            bad = int(np.flatnonzero(free & ~(omega > 0))[0])
            raise HypergraphError(f"vertex {bad} has non-positive weight")
        omega.setflags(write=False)
        object.__setattr__(self, "omega", omega)

    # -- derived views -------------------------------------------------------

    @property
    def m(self):
        return len(self.edges)

    @cached_property
    def free(self):
        """Boolean mask of the non-stationary vertices N."""
        mask = np.ones(self.n, dtype=bool)
        mask[list(self.stationary)] = False
        return mask

    @cached_property
    def weights(self):
        return np.array([e.w for e in self.edges], dtype=float)

    @cached_property
    def csr(self):
        """(tail_ptr, tail_idx, head_ptr, head_idx) int64 arrays."""
        tp = np.zeros(self.m + 1, dtype=np.int64)
        hp = np.zeros(self.m + 1, dtype=np.int64)
        ti, hi = [], []
        for k, e in enumerate(self.edges):
            ti.extend(sorted(e.tail))
            hi.extend(sorted(e.head))
            tp[k + 1] = len(ti)
            hp[k + 1] = len(hi)
        return tp, np.array(ti, dtype=np.int64), hp, np.array(hi, dtype=np.int64)

    @cached_property
    def masks(self):
        """Per-edge tail/head bitmasks (only meaningful for n <= 62)."""
        t = np.array([sum(1 << v for v in e.tail) for e in self.edges], dtype=np.int64)
        h = np.array([sum(1 << v for v in e.head) for e in self.edges], dtype=np.int64)
        return t, h

    def with_stationary(self, stationary, weight_mode=None):
        """Copy with a different stationary set (weights recomputed)."""
        mode = weight_mode or self.weight_mode
        return DirectedHypergraph(self.n, self.edges, frozenset(stationary), mode,
                                  self.omega if mode == "custom" else None, self.names)


@dataclass(frozen=True)
class CutReport:
    S: frozenset
    out_weight: float
    in_weight: float
    phi_plus: float
    phi_minus: float

    @property
    def phi(self):
        return min(self.phi_plus, self.phi_minus)

    def to_dict(self):
        return {"S": sorted(self.S), "out_weight": self.out_weight,
                "in_weight": self.in_weight, "phi_plus": self.phi_plus,
                "phi_minus": self.phi_minus, "phi": self.phi}


def _vertex_id(token, index):
    if isinstance(token, bool):
        raise HypergraphError(f"bad vertex id {token!r}")
    if isinstance(token, int):
        return token
    if isinstance(token, str):
        if token in index:
            return index[token]
        if token.lstrip("-").isdigit():
            return int(token)
    raise HypergraphError(f"unknown vertex {token!r}")


def hypergraph_from_dict(doc):
    """Build a hypergraph from the JSON document layout."""
    if not isinstance(doc, dict):
        raise HypergraphError("top-level JSON value must be an object")
    names = None
    if "vertices" in doc:
        names = tuple(str(v) for v in doc["vertices"])
        n = len(names)
        if "n" in doc and doc["n"] != n:
            raise HypergraphError("'n' disagrees with 'vertices'")
    elif "n" in doc:
        n = doc["n"]
        if not isinstance(n, int) or isinstance(n, bool):
            raise HypergraphError("'n' must be an integer")
    else:
        raise HypergraphError("need 'n' or 'vertices'")
    index = {name: i for i, name in enumerate(names)} if names else {}

    mode = doc.get("weight_mode", "degree")
    stationary = frozenset(_vertex_id(v, index) for v in doc.get("stationary", []))
    edges = []
    for i, e in enumerate(doc.get("edges", [])):
        try:
            tail = [_vertex_id(v, index) for v in e["tail"]]
            head = [_vertex_id(v, index) for v in e["head"]]
        except (KeyError, TypeError) as exc:
            raise HypergraphError(f"edge {i}: needs 'tail' and 'head' lists") from exc
        w = e.get("w", 1.0)
        if isinstance(w, bool) or not isinstance(w, (int, float)):
            raise HypergraphError(f"edge {i}: weight must be a number")
        for v in tail + head:
            if not 0 <= v < n:
                raise HypergraphError(f"edge {i}: vertex id {v} out of range")
        edges.append(Edge(frozenset(tail), frozenset(head), float(w)))

    omega = None
    if mode == "custom":
        raw = doc.get("omega")
        if not isinstance(raw, dict):
            raise HypergraphError("custom weight_mode requires an 'omega' object")
        omega = np.zeros(n)
        seen = set()
        for key, val in raw.items():
            v = _vertex_id(key, index)
            if not 0 <= v < n:
                raise HypergraphError(f"omega: vertex id {v} out of range")
            if v in stationary:
                raise HypergraphError(f"stationary vertex {v} listed with custom weight")
            omega[v] = float(val)
            seen.add(v)
        missing = set(range(n)) - stationary - seen
        if missing:
            raise HypergraphError(f"omega missing for vertices {sorted(missing)}")
    elif "omega" in doc:
        raise HypergraphError("'omega' is only allowed with weight_mode 'custom'")
    return DirectedHypergraph(n, tuple(edges), stationary, mode, omega, names)


def load_hypergraph(path):
    """Read a hypergraph JSON file."""
    try:
        with open(path, encoding="utf-8") as fh:
            doc = json.load(fh)
    except json.JSONDecodeError as exc:
        raise HypergraphError(f"parse error: {exc}") from exc
    return hypergraph_from_dict(doc)


def hypergraph_to_dict(H):
    doc = {"n": H.n, "weight_mode": H.weight_mode,
           "stationary": sorted(H.stationary),
           "edges": [{"tail": sorted(e.tail), "head": sorted(e.head), "w": e.w}
                     for e in H.edges]}
    if H.names:
        doc["vertices"] = list(H.names)
    if H.weight_mode == "custom":
        doc["omega"] = {str(v): float(H.omega[v]) for v in range(H.n) if H.free[v]}
    return doc


def inner_product_omega(H, f, g):
    """<f, g>_omega, summing only over non-stationary vertices.

    Accepts vectors indexed by V (length n) or restricted to N (length |N|).
    """
    f = np.asarray(f, dtype=float)
    g = np.asarray(g, dtype=float)
    if f.shape != g.shape:
        raise ValueError(f"dimension mismatch: {f.shape} vs {g.shape}")
    if f.shape == (H.n,):
        return float(np.sum(H.omega * f * g))
    if f.shape == (int(H.free.sum()),):
        return float(np.sum(H.omega[H.free] * f * g))
    raise ValueError(f"vector of shape {f.shape} matches neither V nor N")


def norm_omega(H, f):
    return float(np.sqrt(inner_product_omega(H, f, f)))


def _check_expansion_input(H):
    if H.stationary:
        raise HypergraphError("edge expansion is undefined with stationary vertices")


def expansion(H, S):
    """Outgoing/incoming edge expansion of the vertex set S."""
    _check_expansion_input(H)
    S = frozenset(int(v) for v in S)
    if not S or len(S) >= H.n or not S <= set(range(H.n)):
        raise ValueError("S must be a nonempty proper subset of V")
    out_w = sum(e.w for e in H.edges if e.tail & S and e.head - S)
    in_w = sum(e.w for e in H.edges if e.head & S and e.tail - S)
    vol = float(H.omega[list(S)].sum())
    return CutReport(S, out_w, in_w, out_w / vol, in_w / vol)


def brute_force_phi_H(H, cap=ENUMERATION_CAP):
    """Exact edge expansion by enumerating every admissible subset.

    Returns ``(phi_H, argmin)``; among minimizers the first in mask order wins.
    """
    _check_expansion_input(H)
    if H.n > cap:
        raise ValueError(f"n={H.n} exceeds enumeration cap {cap}")
    if H.n < 2:
        raise ValueError("edge expansion needs at least two vertices")
    tmask, hmask = H.masks
    outw, inw, vol = kernels.cut_weights(H.n, H.omega, tmask, hmask, H.weights)
    total = H.omega.sum()
    phi = np.minimum(outw, inw) / vol
    phi[vol > total / 2 * (1 + 1e-12)] = np.inf
    phi[-1] = np.inf  # S = V is never admissible
    k = int(np.argmin(phi))
    x = k + 1
    return float(phi[k]), frozenset(v for v in range(H.n) if (x >> v) & 1)
