"""Acceptance-criteria runner and per-instance invariant checks.

Every criterion is a function ``(seed) -> CriterionResult``; ``run_criteria``
runs them in order. The ``verify`` CLI command and the acceptance tests share
this module.
"""
import time
from dataclasses import dataclass

import numpy as np

from . import densest
from .core import DirectedHypergraph, inner_product_omega
from .diffusion import IntegratorConfig, default_step, run, step
from .generators import random_densest_instance, random_hypergraph, tied_vector
from .operator import derivative_tower, first_derivative, flow_assignment
from .quadratic import OrderedPartition, quadratic_form
from .spectral import cheeger_verify, estimate_gamma2
from .sssl import LabelProblem, solve, verify_gradient_mixture, verify_subgradient


@dataclass
class CriterionResult:
    name: str
    passed: bool
    detail: str
    seconds: float = 0.0

    def line(self):
        tag = "PASS" if self.passed else "FAIL"
        return f"[{tag}] {self.name}: {self.detail} ({self.seconds:.1f}s)"


def _rng(seed, salt):
    return np.random.default_rng([seed, salt])


def operator_corpus(seed, count=200):
    """Random V = N instances with degree weights, each paired with a vector f.

    Half the vectors are Gaussian, half integer valued so that ties occur.
    """
    rng = _rng(seed, 1)
    out = []
    for k in range(count):
        n = int(rng.integers(2, 11))
        m = int(rng.integers(1, 13))
        H = random_hypergraph(rng, n, m)
        while H.m > 12:
            H = random_hypergraph(rng, n, m)
        f = rng.standard_normal(n) if k % 2 else tied_vector(rng, n)
        out.append((H, f))
    return out


# -- criteria -----------------------------------------------------------------


def rayleigh_identity(seed=0):
    worst = 0.0
    for H, f in operator_corpus(seed):
        Lf = -first_derivative(H, f)[0]
        q = quadratic_form(H, f)
        err = abs(inner_product_omega(H, f, Lf) - 2 * q) / max(1.0, q)
        worst = max(worst, err)
    return worst <= 1e-9, f"worst scaled error {worst:.2e} (tol 1e-9)"


def kernel_conservation(seed=0):
    worst_k = worst_c = 0.0
    for H, f in operator_corpus(seed):
        worst_k = max(worst_k, float(np.abs(first_derivative(H, np.ones(H.n))[0]).max()))
        worst_c = max(worst_c, abs(inner_product_omega(H, np.ones(H.n), first_derivative(H, f)[0])))
    ok = worst_k <= 1e-12 and worst_c <= 1e-9
    return ok, f"max|L1| {worst_k:.2e} (tol 1e-12), max|<1,Lf>| {worst_c:.2e} (tol 1e-9)"


def norm_identity(seed=0):
    worst = 0.0
    for H, f in operator_corpus(seed):
        tw = derivative_tower(H, f, 1)
        lhs = inner_product_omega(H, tw.derivatives[1], tw.derivatives[1])
        rhs = sum(H.edges[e].w * tw.deltas[0][e] * tw.deltas[1][e] for e in tw.active[0])
        worst = max(worst, abs(lhs + rhs))
    return worst <= 1e-9, f"worst |norm identity| {worst:.2e} (tol 1e-9)"


def densest_oracle(seed=0, count=500):
    rng = _rng(seed, 4)
    worst = 0.0
    set_mismatch = 0
    for k in range(count):
        size = int(rng.integers(1, 13))
        stat = int(rng.integers(0, min(2, size - 1) + 1)) if k % 3 == 0 else 0
        inst = random_densest_instance(rng, size, stationary=stat)
        for mode in (densest.MAX, densest.MIN):
            a = densest.solve(inst, mode, method="mincut")
            b = densest.brute_force(inst, mode)
            worst = max(worst, abs(a.density - b.density))
            set_mismatch += a.P != b.P
    ok = worst <= 1e-12 and set_mismatch == 0
    return ok, f"worst density gap {worst:.2e} (tol 1e-12), set mismatches {set_mismatch}/{2 * count}"


def flow_residuals(seed=0):
    worst = {"R0": 0.0, "R1": 0.0, "R2": 0.0}
    for H, f in operator_corpus(seed):
        f1 = first_derivative(H, f)[0]
        res = flow_assignment(H, f, f1).residuals(H, f, f1)
        for key in worst:
            worst[key] = max(worst[key], res[key])
    ok = max(worst.values()) <= 1e-9
    return ok, ", ".join(f"{k} {v:.2e}" for k, v in worst.items()) + " (tol 1e-9)"


def _min_gap(f):
    s = np.sort(f)
    return float(np.min(np.diff(s))) if len(s) > 1 else np.inf


def monotone_descent(seed=0, runs=50, steps=400):
    rng = _rng(seed, 6)
    worst_q = worst_d = 0.0
    fd_worst = 0.0
    fd_points = 0
    for k in range(runs):
        n = int(rng.integers(2, 9))
        stat = int(rng.integers(1, min(3, n - 1) + 1)) if k % 2 else 0
        H = random_hypergraph(rng, n, int(rng.integers(1, 10)), stationary=stat)
        h = default_step(H)
        f0 = rng.standard_normal(n)
        recs = run(H, f0, IntegratorConfig(step=h, max_time=h * steps, stop_grad_tol=0.0))
        g2 = max(r.grad_norm for r in recs) ** 2
        slack = 10 * h * h * max(g2, 1.0)
        qs = np.array([r.Q for r in recs])
        worst_q = max(worst_q, float(np.max(np.diff(qs), initial=-np.inf)) - slack)
        if not H.stationary:
            ds = np.array([r.D for r in recs])
            worst_d = max(worst_d, float(np.max(np.diff(ds), initial=-np.inf)) - slack)
        for r in recs[:: max(1, len(recs) // 5)]:
            if _min_gap(r.f) < 1e-4 or r.grad_norm < 1e-6:
                continue
            f1 = first_derivative(H, r.f)[0]
            eps = 1e-6
            dq = (quadratic_form(H, r.f + eps * f1) - quadratic_form(H, r.f - eps * f1)) / (2 * eps)
            target = -r.grad_norm ** 2
            fd_worst = max(fd_worst, abs(dq - target) / abs(target))
            fd_points += 1
    ok = worst_q <= 0 and worst_d <= 0 and fd_worst <= 1e-3 and fd_points > 0
    return ok, (f"Q excess over slack {max(worst_q, 0):.2e}, D excess {max(worst_d, 0):.2e}, "
                f"dQ/dt rel err {fd_worst:.2e} over {fd_points} points (tol 1e-3)")


def _k2():
    return DirectedHypergraph(2, [({0, 1}, {0, 1}, 1.0)])


def _c4():
    return DirectedHypergraph(4, [({i, (i + 1) % 4}, {i, (i + 1) % 4}, 1.0) for i in range(4)])


def _two_edges():
    return DirectedHypergraph(4, [({0, 1}, {0, 1}, 1.0), ({2, 3}, {2, 3}, 1.0)])


def cheeger_sandwich(seed=0, count=100):
    rng = _rng(seed, 7)
    failures = 0
    for _ in range(count):
        n = int(rng.integers(2, 9))
        H = random_hypergraph(rng, n, int(rng.integers(n, 13)))
        failures += not cheeger_verify(H, seed=seed, use_diffusion=False)["passed"]
    closed = []
    for name, H, g, p in (("K2", _k2(), 2.0, 1.0), ("C4", _c4(), 1.0, 0.5),
                          ("disconnected", _two_edges(), 0.0, 0.0)):
        rep = cheeger_verify(H, restarts=2, seed=seed)
        good = rep["passed"] and abs(rep["gamma2"] - g) <= 1e-6 and abs(rep["phi_H"] - p) <= 1e-12
        closed.append(f"{name} {'ok' if good else 'bad'}")
        failures += not good
    return failures == 0, f"{failures} failures over {count} random + 3 closed-form ({', '.join(closed)})"


def eigenpair(seed=0):
    parts = []
    ok = True
    for name, H, g in (("K2", _k2(), 2.0), ("C4", _c4(), 1.0)):
        res = estimate_gamma2(H, restarts=8, seed=seed)
        good = abs(res.gamma2 - g) <= 1e-3 and res.residual <= 1e-3
        ok &= good
        parts.append(f"{name} gamma2 {res.gamma2:.6f} residual {res.residual:.1e}")
    return ok, "; ".join(parts)


def _stationary_instance(rng, n_free_max=6):
    nN = int(rng.integers(1, n_free_max + 1))
    nT = int(rng.integers(1, 3))
    n = nN + nT
    return random_hypergraph(rng, n, int(rng.integers(1, 9)), weight_mode="unit", stationary=nT)


def subgradient(seed=0, count=100, mixtures=50):
    rng = _rng(seed, 9)
    worst = 0.0
    for _ in range(count):
        H = _stationary_instance(rng)
        f = tied_vector(rng, H.n) if rng.random() < 0.5 else rng.standard_normal(H.n)
        rep = verify_subgradient(H, f, 100, seed=int(rng.integers(2 ** 31)))
        worst = max(worst, rep["worst_violation"])
    mix_err = 0.0
    done = 0
    while done < mixtures:
        H = _stationary_instance(rng) if done % 2 else random_hypergraph(
            rng, int(rng.integers(2, 7)), int(rng.integers(1, 9)), weight_mode="unit")
        f = tied_vector(rng, H.n)
        if max(len(c) for c in OrderedPartition.from_values(f).classes) > 5:
            continue
        try:
            mix_err = max(mix_err, verify_gradient_mixture(H, f)["error"])
        except RuntimeError:
            mix_err = np.inf
        done += 1
    ok = worst <= 1e-9 and mix_err <= 1e-8
    return ok, f"worst subgradient violation {worst:.2e} (tol 1e-9), worst mixture error {mix_err:.2e} (tol 1e-8)"


def path_instance():
    H = DirectedHypergraph(3, [({0, 1}, {0, 1}, 1.0), ({1, 2}, {1, 2}, 1.0)],
                           frozenset({0, 2}), "unit")
    return LabelProblem(H, {0: 0.0, 2: 1.0})


def grid_oracle(problem, points=21, rounds=12):
    """Coarse-to-fine grid minimization of Q over the box spanned by the labels."""
    H = problem.H
    free = np.flatnonzero(H.free)
    labels = list(problem.fixed_labels.values())
    lo = np.full(len(free), min(labels))
    hi = np.full(len(free), max(labels))
    base = problem.initial()
    best_q, best = np.inf, None
    for _ in range(rounds):
        axes = [np.linspace(a, b, points) for a, b in zip(lo, hi)]
        for pt in np.array(np.meshgrid(*axes, indexing="ij")).reshape(len(free), -1).T:
            g = base.copy()
            g[free] = pt
            q = quadratic_form(H, g)
            if q < best_q:
                best_q, best = q, pt
        width = (hi - lo) / (points - 1) * 2
        lo, hi = best - width, best + width
    return best_q


def sssl_optimum(seed=0, count=20):
    rng = _rng(seed, 10)
    rep = solve(path_instance())
    fv, q = rep.f_star[1], rep.Q_star
    path_ok = abs(fv - 0.5) <= 1e-6 and abs(q - 0.25) <= 1e-6
    worst = 0.0
    for _ in range(count):
        nN = int(rng.integers(1, 4))
        nT = int(rng.integers(1, 3))
        H = random_hypergraph(rng, nN + nT, int(rng.integers(1, 7)), weight_mode="unit",
                              stationary=nT)
        labels = {v: float(rng.uniform(-1, 1)) for v in sorted(H.stationary)}
        prob = LabelProblem(H, labels, rng.uniform(-1, 1, size=nN))
        q_solver = solve(prob).Q_star
        q_grid = grid_oracle(prob)
        worst = max(worst, abs(q_solver - q_grid) / max(q_grid, 1e-4))
    ok = path_ok and worst <= 1e-4
    return ok, f"path f_v {fv:.8f} Q {q:.8f}; worst relative Q gap vs grid {worst:.2e} (tol 1e-4)"


def exact_trajectory():
    H = DirectedHypergraph(2, [({0}, {1}, 1.0)], weight_mode="unit")
    h = 1e-4
    f = np.array([1.0, 0.0])
    worst = 0.0
    k = 0
    for t_target in (0.5, 1.0, 2.0):
        while k * h < t_target - h / 2:
            f = step(H, f, h, "euler")
            k += 1
        worst = max(worst, abs(f[0] - (1 + np.exp(-2 * t_target)) / 2))
    return worst <= 1e-3, f"worst trajectory error {worst:.2e} (tol 1e-3)"


CRITERIA = [
    ("1 rayleigh identity", rayleigh_identity),
    ("2 kernel and conservation", kernel_conservation),
    ("3 norm identity", norm_identity),
    ("4 densest subset oracle", densest_oracle),
    ("5 flow assignment residuals", flow_residuals),
    ("6 monotone descent", monotone_descent),
    ("7 cheeger sandwich", cheeger_sandwich),
    ("8 eigenpair at convergence", eigenpair),
    ("9 subgradient and mixture", subgradient),
    ("10 sssl optimum", sssl_optimum),
    ("11 single-edge trajectory", exact_trajectory),
]


def run_criterion(name, fn, seed=0):
    t0 = time.perf_counter()
    try:
        passed, detail = fn(seed) if fn.__code__.co_argcount else fn()
    except Exception as exc:  # report, never crash the table
        passed, detail = False, f"error: {type(exc).__name__}: {exc}"
    return CriterionResult(name, bool(passed), detail, time.perf_counter() - t0)


def run_criteria(seed=0, names=None):
    return [run_criterion(name, fn, seed) for name, fn in CRITERIA
            if names is None or name.split()[0] in names]


# -- per-instance checks ------------------------------------------------------


def verify_instance(H, seed=0, samples=20):
    """Invariant checks applicable to one input hypergraph."""
    rng = np.random.default_rng(seed)
    vectors = [rng.standard_normal(H.n) for _ in range(samples)]
    vectors += [tied_vector(rng, H.n) for _ in range(samples)]
    out = []

    def add(name, fn):
        t0 = time.perf_counter()
        try:
            passed, detail = fn()
        except Exception as exc:
            passed, detail = False, f"error: {type(exc).__name__}: {exc}"
        out.append(CriterionResult(name, bool(passed), detail, time.perf_counter() - t0))

    def rayleigh():
        worst = 0.0
        for f in vectors:
            q = quadratic_form(H, f)
            Lf = -first_derivative(H, f)[0]
            worst = max(worst, abs(inner_product_omega(H, f, Lf) - 2 * q) / max(1, q))
        return worst <= 1e-9, f"worst {worst:.2e}"

    def kernel():
        err = float(np.abs(first_derivative(H, np.ones(H.n))[0]).max())
        return err <= 1e-12, f"max|L1| {err:.2e}"

    def norm():
        worst = 0.0
        for f in vectors:
            tw = derivative_tower(H, f, 1)
            lhs = inner_product_omega(H, tw.derivatives[1], tw.derivatives[1])
            rhs = sum(H.edges[e].w * tw.deltas[0][e] * tw.deltas[1][e] for e in tw.active[0])
            worst = max(worst, abs(lhs + rhs))
        return worst <= 1e-9, f"worst {worst:.2e}"

    def flows():
        worst = 0.0
        for f in vectors:
            f1 = first_derivative(H, f)[0]
            worst = max(worst, max(flow_assignment(H, f, f1).residuals(H, f, f1).values()))
        return worst <= 1e-9, f"worst residual {worst:.2e}"

    if not H.stationary:
        add("rayleigh identity", rayleigh)
        add("constant kernel", kernel)
    add("norm identity", norm)
    add("flow assignment", flows)
    if np.all(H.omega[H.free] == 1.0):
        def sub():
            worst = max(verify_subgradient(H, f, 50, seed)["worst_violation"] for f in vectors)
            return worst <= 1e-9, f"worst violation {worst:.2e}"
        add("subgradient inequality", sub)
    if not H.stationary and 2 <= H.n <= 8:
        def cheeger():
            rep = cheeger_verify(H, restarts=2, seed=seed)
            return rep["passed"], f"gamma2 {rep['gamma2']:.6g} phi_H {rep['phi_H']:.6g}"
        add("cheeger sandwich", cheeger)
    return out
