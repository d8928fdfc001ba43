import csv
import json

import numpy as np
import pytest
from hypothesis import given, strategies as st

from hyperdiff.core import DirectedHypergraph, inner_product_omega
from hyperdiff.diffusion import (IntegratorConfig, StepUnderflowError, clipped_step, default_step,
                                 run, step, write_density_jsonl, write_trajectory_csv)
from hyperdiff.generators import random_hypergraph

seeds = st.integers(0, 2 ** 32 - 1)
EDGE = DirectedHypergraph(2, [({0}, {1}, 1.0)], weight_mode="unit")
PATH = DirectedHypergraph(3, [({0, 1}, {0, 1}, 1.0), ({1, 2}, {1, 2}, 1.0)], frozenset({0, 2}), "unit")


def test_step_examples():
    assert np.allclose(step(EDGE, [1, 0], 0.1), [0.9, 0.1])
    assert np.array_equal(step(EDGE, [3, 3], 0.7), [3, 3])
    assert np.array_equal(step(EDGE, [3, 3], 0.7, "rk4"), [3, 3])
    with pytest.raises(ValueError):
        step(EDGE, [1, 0], 0.0)


def test_euler_matches_closed_form():
    f = np.array([1.0, 0.0])
    h = 1e-4
    for _ in range(10000):
        f = step(EDGE, f, h)
    assert abs(f[0] - (1 + np.exp(-2)) / 2) <= 1e-3


def test_rk4_is_more_accurate():
    exact = (1 + np.exp(-2 * 0.5)) / 2
    fe, fr = np.array([1.0, 0.0]), np.array([1.0, 0.0])
    for _ in range(50):
        fe = step(EDGE, fe, 0.01)
        fr = step(EDGE, fr, 0.01, "rk4")
    assert abs(fr[0] - exact) < 1e-8 < abs(fe[0] - exact)


def test_run_long_horizon():
    recs = run(EDGE, [1.0, 0.0], IntegratorConfig(step=1e-2, max_time=30))
    assert np.allclose(recs[-1].f, [0.5, 0.5], atol=1e-6) and recs[-1].Q < 1e-12


def test_run_stationary_path():
    recs = run(PATH, [0.0, -3.0, 1.0], IntegratorConfig(step=1e-2, max_time=50))
    last = recs[-1]
    assert last.f[1] == pytest.approx(0.5, abs=1e-6) and last.Q == pytest.approx(0.25, abs=1e-6)
    assert last.D is None
    assert last.f[0] == 0 and last.f[2] == 1


def test_constant_trajectory():
    recs = run(EDGE, [2.0, 2.0], IntegratorConfig(step=0.1, max_time=1))
    assert len(recs) == 1 and np.array_equal(recs[0].f, [2, 2])


def test_record_every_and_config_validation():
    recs = run(EDGE, [1.0, 0.0], IntegratorConfig(step=0.01, max_time=1, record_every=10,
                                                   stop_grad_tol=0))
    assert len(recs) == 11 and recs[-1].t == pytest.approx(1.0)
    for bad in (dict(step=-1), dict(max_time=0), dict(method="midpoint"), dict(record_every=0)):
        with pytest.raises(ValueError):
            IntegratorConfig(**bad)


def test_default_step():
    H = DirectedHypergraph(2, [({0}, {1}, 4.0)], weight_mode="unit")
    assert default_step(H) == pytest.approx(1e-3 / 4)


def test_adaptive_underflow_is_reported(monkeypatch):
    import hyperdiff.diffusion as dmod
    monkeypatch.setattr(dmod, "clipped_step", lambda H, f, h, m: np.asarray(f) + np.array([1.0, -1.0]))
    with pytest.raises(StepUnderflowError):
        run(EDGE, [1.0, 0.0], IntegratorConfig(step=0.1, adaptive=True))


def test_clipped_step_stops_at_merge():
    # values 0 and 2 move toward each other at rate 1; they meet after 1 time unit
    H = DirectedHypergraph(2, [({1}, {0}, 1.0)], weight_mode="unit")
    f = clipped_step(H, np.array([0.0, 2.0]), 5.0)
    assert f[0] == f[1] == 1.0
    raw = step(H, np.array([0.0, 2.0]), 5.0)
    assert raw[0] > raw[1]


@given(seeds, st.booleans())
def test_descent_and_conservation(seed, stationary):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 8))
    H = random_hypergraph(rng, n, int(rng.integers(1, 8)),
                          stationary=int(rng.integers(1, n)) if stationary else 0)
    h = default_step(H)
    recs = run(H, rng.standard_normal(n), IntegratorConfig(step=h, max_time=150 * h, stop_grad_tol=0))
    slack = 10 * h * h * max(1.0, max(r.grad_norm for r in recs) ** 2)
    assert np.all(np.diff([r.Q for r in recs]) <= slack)
    if not stationary:
        assert np.all(np.diff([r.D for r in recs]) <= slack)
        mass = [inner_product_omega(H, np.ones(n), r.f) for r in recs]
        assert np.ptp(mass) <= 1e-9 * max(1.0, recs[-1].t)


def test_writers(tmp_path):
    recs = run(PATH, [0.0, 0.2, 1.0], IntegratorConfig(step=0.1, max_time=0.3))
    write_trajectory_csv(recs, tmp_path / "t.csv")
    rows = list(csv.reader(open(tmp_path / "t.csv")))
    assert rows[0] == ["t", "Q", "D", "grad_norm"] and len(rows) == len(recs) + 1
    assert rows[1][2] == ""
    write_density_jsonl(recs, tmp_path / "f.jsonl")
    lines = [json.loads(x) for x in open(tmp_path / "f.jsonl")]
    assert lines[0]["f"] == [0.0, 0.2, 1.0]
