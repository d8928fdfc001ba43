import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperdiff.core import DirectedHypergraph
from hyperdiff.generators import random_hypergraph, tied_vector
from hyperdiff.operator import diffusion_operator
from hyperdiff.quadratic import OrderedPartition
from hyperdiff.sssl import LabelProblem, solve, verify_gradient_mixture, verify_subgradient
from hyperdiff.verification import grid_oracle, path_instance

seeds = st.integers(0, 2 ** 32 - 1)


def unit(n, edges, T=()):
    return DirectedHypergraph(n, edges, frozenset(T), "unit")


@pytest.mark.parametrize("mode", ["diffusion", "subgradient"])
def test_path_instance(mode):
    rep = solve(path_instance(), mode)
    assert rep.f_star[1] == pytest.approx(0.5, abs=1e-6)
    assert rep.Q_star == pytest.approx(0.25, abs=1e-6)
    assert rep.to_dict()["Q"] == rep.Q_star


def test_flat_minimum():
    H = unit(2, [({0}, {1}, 1.0)], T={0})
    for mode in ("diffusion", "subgradient"):
        rep = solve(LabelProblem(H, {0: 1.0}, [0.0]), mode)
        assert rep.Q_star <= 1e-8


def test_no_edges():
    H = DirectedHypergraph(2, [], frozenset({0}), "unit")
    rep = solve(LabelProblem(H, {0: 1.0}, [0.3]))
    assert rep.f_star[1] == 0.3 and rep.Q_star == 0


def test_diffusion_history_non_increasing():
    rep = solve(path_instance())
    assert np.all(np.diff(rep.history) <= 1e-12)


def test_problem_validation():
    H = unit(2, [({0}, {1}, 1.0)], T={0})
    with pytest.raises(ValueError, match="without labels"):
        LabelProblem(H, {})
    with pytest.raises(ValueError, match="non-stationary"):
        LabelProblem(H, {0: 1.0, 1: 0.0})
    with pytest.raises(ValueError, match="stationary vertex"):
        LabelProblem(unit(2, [({0}, {1}, 1.0)]), {})
    Hd = DirectedHypergraph(2, [({0}, {1}, 2.0)], frozenset({0}))
    with pytest.raises(ValueError, match="unit"):
        LabelProblem(Hd, {0: 1.0})


def test_mixture_examples():
    H = unit(3, [({0, 1}, {2}, 1.0)])
    rep = verify_gradient_mixture(H, [1, 1, 0])
    assert rep["passed"] and sorted(w for _, w in rep["witness"]) == pytest.approx([0.5, 0.5])
    rep = verify_gradient_mixture(H, [1, 2, 0])
    assert len(rep["witness"]) == 1
    # stationary s=0 tied with v=1, one outgoing edge from v
    S = unit(3, [({1}, {2}, 1.0)], T={0})
    rep = verify_gradient_mixture(S, [1, 1, 0])
    assert rep["passed"]


def test_mixture_cap():
    H = unit(8, [({0, 1, 2, 3, 4, 5, 6, 7}, {0}, 1.0)])
    with pytest.raises(ValueError, match="cap"):
        verify_gradient_mixture(H, np.zeros(8))


def test_subgradient_examples():
    H = unit(3, [({0, 1}, {2}, 1.0)])
    assert verify_subgradient(H, [1, 1, 0])["passed"]
    P = path_instance()
    f = np.array([0.0, 0.5, 1.0])
    assert np.allclose(diffusion_operator(P.H, f), 0)
    assert verify_subgradient(P.H, f)["passed"]


@given(seeds)
def test_subgradient_property(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    H = random_hypergraph(rng, n, int(rng.integers(1, 8)), weight_mode="unit",
                          stationary=int(rng.integers(0, 3)) if n > 2 else 0)
    f = tied_vector(rng, n)
    assert verify_subgradient(H, f, 50, seed=seed)["worst_violation"] <= 1e-9


@given(seeds)
def test_mixture_property(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 7))
    H = random_hypergraph(rng, n, int(rng.integers(1, 8)), weight_mode="unit",
                          stationary=int(rng.integers(0, 2)))
    f = tied_vector(rng, n)
    if max(len(c) for c in OrderedPartition.from_values(f).classes) > 5:
        return
    assert verify_gradient_mixture(H, f)["error"] <= 1e-8


@given(seeds)
def test_solver_matches_grid(seed):
    rng = np.random.default_rng(seed)
    H = random_hypergraph(rng, 3, int(rng.integers(1, 5)), weight_mode="unit", stationary=1)
    labels = {v: float(rng.uniform(-1, 1)) for v in H.stationary}
    prob = LabelProblem(H, labels)
    q = solve(prob).Q_star
    g = grid_oracle(prob)
    assert abs(q - g) <= 1e-4 * max(g, 1e-4)
