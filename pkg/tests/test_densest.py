import itertools

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperdiff import densest
from hyperdiff.densest import (MAX, MIN, FlowNetwork, brute_force, density, lex_compare,
                               make_instance, max_flow, solve, split)
from hyperdiff.generators import random_densest_instance

seeds = st.integers(0, 2 ** 32 - 1)


def test_density_examples():
    inst = make_instance([0, 1], [], [(0, 1.0, {0, 1})], [1.0, 1.0])
    assert density(inst, {0}) == -1
    assert density(inst, {0, 1}) == -0.5
    inc = make_instance([0, 1], [(0, 1.0, {0})], [], [1.0, 1.0])
    assert density(inc, {0}) == 1 and density(inc, {1}) == 0 and density(inc, {0, 1}) == 0.5
    st_inst = make_instance([0, 1], [(0, 1.0, {0})], [], [1.0, 0.0], stationary={1})
    assert density(st_inst, {0, 1}) == 0
    with pytest.raises(ValueError):
        density(inc, set())


def test_solve_examples():
    inc = make_instance([0, 1], [(0, 1.0, {0})], [], [1.0, 1.0])
    sol = solve(inc, MAX)
    assert sol.P == {0} and sol.density == 1
    out = make_instance([0, 1], [], [(0, 1.0, {0, 1})], [1.0, 1.0])
    sol = solve(out, MAX)
    assert sol.P == {0, 1} and sol.density == -0.5
    # v=0 free, s=1 stationary, one outgoing arc from v
    vs = make_instance([0, 1], [], [(0, 1.0, {0})], [1.0, 0.0], stationary={1})
    sol = solve(vs, MIN)
    assert sol.P == {0} and sol.density == -1


def test_no_edges_returns_universe():
    inst = make_instance([0, 1, 2], [], [], [1.0, 1.0, 1.0])
    for mode in (MAX, MIN):
        sol = solve(inst, mode)
        assert sol.P == {0, 1, 2} and sol.density == 0


def test_lex_compare():
    assert lex_compare((3, 43.5), (1, 95)) == 1
    assert lex_compare((1, 2), (1, 2)) == 0
    assert lex_compare((0, -1), (0, 0)) == -1
    with pytest.raises(ValueError):
        lex_compare((1,), (1, 2))


def test_max_flow_examples():
    net = FlowNetwork(2)
    net.add_arc(0, 1, 3.0)
    assert max_flow(net, 0, 1).value == 3
    net = FlowNetwork(4)
    for u, v, c in [(0, 2, 1.0), (2, 1, 1.0), (0, 3, 2.0), (3, 1, 2.0)]:
        net.add_arc(u, v, c)
    assert max_flow(net, 0, 1).value == 3
    # diamond s=0 -> {2,3} -> 4 -> t=1 with bottleneck 4->1
    net = FlowNetwork(5)
    for u, v, c in [(0, 2, 5.0), (0, 3, 5.0), (2, 4, 5.0), (3, 4, 5.0), (4, 1, 1.0)]:
        net.add_arc(u, v, c)
    res = max_flow(net, 0, 1)
    assert res.value == 1 and res.source_side == {0, 2, 3, 4}


def test_max_flow_errors():
    net = FlowNetwork(2)
    with pytest.raises(ValueError):
        net.add_arc(0, 5, 1.0)
    with pytest.raises(ValueError):
        net.add_arc(0, 1, -1.0)
    net.add_arc(0, 1, np.inf)
    with pytest.raises(ValueError, match="unbounded"):
        max_flow(net, 0, 1)


@given(seeds)
def test_mincut_matches_enumeration(seed):
    rng = np.random.default_rng(seed)
    size = int(rng.integers(1, 11))
    stat = int(rng.integers(0, min(2, size - 1) + 1))
    inst = random_densest_instance(rng, size, stationary=stat)
    for mode in (MAX, MIN):
        a = solve(inst, mode, method="mincut")
        b = brute_force(inst, mode)
        c = solve(inst, mode, method="enumerate")
        assert a.P == b.P == c.P
        assert abs(a.density - b.density) <= 1e-12 and abs(c.density - b.density) <= 1e-12


def test_mincut_matches_enumeration_sixteen(rng):
    for _ in range(6):
        inst = random_densest_instance(rng, 16, max_arcs=10)
        for mode in (MAX, MIN):
            a = solve(inst, mode, method="mincut")
            b = solve(inst, mode, method="enumerate")
            assert a.P == b.P and abs(a.density - b.density) <= 1e-12


@given(seeds)
def test_project_selection_reduction(seed):
    rng = np.random.default_rng(seed)
    size = int(rng.integers(1, 9))
    inst = random_densest_instance(rng, size)
    gain, cost = densest._free_arcs(inst, densest.Level(inst.incoming, inst.outgoing), MAX)
    verts = sorted(inst.free)
    for lam in rng.uniform(-2, 2, size=3):
        val, X, _ = densest._mincut_best(inst.free, inst.omega, gain, cost, lam)

        def objective(S):
            return (sum(a.c for a in gain if a.members <= S) - sum(a.c for a in cost if a.members & S)
                    - lam * sum(inst.omega[v] for v in S))

        best = max(objective(frozenset(S)) for r in range(len(verts) + 1)
                   for S in itertools.combinations(verts, r))
        assert val == pytest.approx(best, abs=1e-9)
        assert objective(X) == pytest.approx(best, abs=1e-9)


def test_split_partitions_arcs():
    inst = make_instance([0, 1, 2], [(0, 1.0, {0}), (1, 2.0, {0, 2})], [(2, 1.0, {1, 2})],
                         [1.0, 1.0, 1.0])
    sol = solve(inst, MAX)
    inner, rest = split(inst, sol.P, MAX)
    assert inner.universe == sol.P and rest.universe == inst.universe - sol.P
    assert density(inner, sol.P) == pytest.approx(sol.density)


def test_brute_force_cap():
    inst = make_instance(range(21), [], [], np.ones(21))
    with pytest.raises(ValueError):
        brute_force(inst)
