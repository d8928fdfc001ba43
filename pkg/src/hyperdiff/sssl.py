"""Semi-supervised learning: minimize Q over the free coordinates with the
stationary labels fixed, plus finite checks of the subgradient structure."""
import json
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import nnls

from .core import DirectedHypergraph, HypergraphError, inner_product_omega
from .diffusion import IntegratorConfig, run
from .operator import first_derivative
from .quadratic import OrderedPartition, _is_unit, grad_Q_sigma, quadratic_form

MIXTURE_CAP = 7
MIXTURE_TOL = 1e-8
SUBGRADIENT_TOL = 1e-9


@dataclass
class LabelProblem:
    H: DirectedHypergraph
    fixed_labels: dict
    f0_N: np.ndarray = None

    def __post_init__(self):
        if not self.H.stationary:
            raise ValueError("label problem needs at least one stationary vertex")
        _require_unit(self.H)
        labels = {int(k): float(v) for k, v in self.fixed_labels.items()}
        missing = self.H.stationary - set(labels)
        if missing:
            raise ValueError(f"stationary vertices without labels: {sorted(missing)}")
        extra = set(labels) - self.H.stationary
        if extra:
            raise ValueError(f"labels given for non-stationary vertices: {sorted(extra)}")
        self.fixed_labels = labels
        nfree = int(self.H.free.sum())
        if self.f0_N is None:
            self.f0_N = np.zeros(nfree)
        self.f0_N = np.asarray(self.f0_N, dtype=float)
        if self.f0_N.shape != (nfree,):
            raise ValueError(f"f0_N must have length {nfree}")

    def initial(self):
        f = np.zeros(self.H.n)
        f[self.H.free] = self.f0_N
        for v, y in self.fixed_labels.items():
            f[v] = y
        return f


@dataclass
class SolveReport:
    f_star: np.ndarray
    Q_star: float
    iterations: int
    grad_norm_final: float
    history: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {"f": self.f_star.tolist(), "Q": self.Q_star}


def _require_unit(H):
    if not _is_unit(H):
        raise ValueError("semi-supervised routines require unit weights on free vertices")


def solve(problem, mode="diffusion", step=None, max_time=200.0, grad_tol=1e-10,
          max_iter=20000, eta0=None):
    """Minimize Q(f) over f_N with the labels fixed.

    ``diffusion`` integrates df_N/dt = -L f; ``subgradient`` takes steps
    eta0/sqrt(k+1) along -L f and keeps the best iterate seen.
    """
    H = problem.H
    _require_unit(H)
    f = problem.initial()
    if mode == "diffusion":
        if step is None:
            step = 0.5 / float(H.weights.max()) / max(1, _max_degree(H)) if H.m else 1.0
        cfg = IntegratorConfig(method="euler", step=step, max_time=max_time,
                               stop_grad_tol=grad_tol)
        recs = run(H, f, cfg)
        last = recs[-1]
        return SolveReport(last.f, last.Q, len(recs) - 1, last.grad_norm, [r.Q for r in recs])
    if mode == "subgradient":
        if eta0 is None:
            eta0 = 0.5 / float(H.weights.max()) / max(1, _max_degree(H)) if H.m else 1.0
        best_f, best_Q = f.copy(), quadratic_form(H, f)
        history = [best_Q]
        grad = np.inf
        k = 0
        for k in range(max_iter):
            f1 = first_derivative(H, f)[0]
            grad = float(np.sqrt(inner_product_omega(H, f1, f1)))
            if grad <= grad_tol:
                break
            f = f + eta0 / np.sqrt(k + 1) * f1
            q = quadratic_form(H, f)
            history.append(q)
            if q < best_Q:
                best_f, best_Q = f.copy(), q
        f1 = first_derivative(H, best_f)[0]
        return SolveReport(best_f, best_Q, k, float(np.sqrt(inner_product_omega(H, f1, f1))),
                           history)
    raise ValueError(f"unknown mode {mode!r}")


def _max_degree(H):
    deg = np.zeros(H.n)
    for e in H.edges:
        for v in e.tail | e.head:
            deg[v] += 1
    return int(deg.max())


def verify_subgradient(H, f, num_samples=100, seed=0, tol=SUBGRADIENT_TOL):
    """Check Q(g) >= Q(f) + <g - f, L f> on Gaussian samples g around f."""
    _require_unit(H)
    f = np.asarray(f, dtype=float)
    Lf = -first_derivative(H, f)[0]
    qf = quadratic_form(H, f)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for _ in range(num_samples):
        g = f.copy()
        g[H.free] += rng.standard_normal(int(H.free.sum()))
        gap = qf + float(np.dot((g - f)[H.free], Lf[H.free])) - quadratic_form(H, g)
        worst = max(worst, gap / max(1.0, abs(qf)))
    return {"passed": worst <= tol, "worst_violation": worst, "samples": num_samples}


def verify_gradient_mixture(H, f, cap=MIXTURE_CAP, tol=MIXTURE_TOL):
    """Find a distribution over orders consistent with f whose average
    permutation-resolved gradient reproduces L f."""
    _require_unit(H)
    f = np.asarray(f, dtype=float)
    part = OrderedPartition.from_values(f)
    big = max(len(c) for c in part.classes)
    if big > cap:
        raise ValueError(f"equivalence class of size {big} exceeds cap {cap}")
    Lf = -first_derivative(H, f)[0][H.free]
    grads, orders, seen = [], [], {}
    for sigma in part.permutations():
        g = grad_Q_sigma(H, f, sigma)
        key = tuple(np.round(g, 12))
        if key in seen:
            continue
        seen[key] = len(grads)
        grads.append(g)
        orders.append(sigma)
    G = np.array(grads).T
    A = np.vstack([G, np.ones((1, G.shape[1]))])
    b = np.concatenate([Lf, [1.0]])
    lam, _ = nnls(A, b)
    error = float(np.max(np.abs(G @ lam - Lf), initial=0.0))
    error = max(error, abs(float(lam.sum()) - 1.0))
    witness = [(orders[i], float(lam[i])) for i in np.flatnonzero(lam > 1e-14)]
    report = {"passed": error <= tol, "error": error, "witness": witness,
              "permutations": part.count_permutations(), "distinct_gradients": len(grads)}
    if not report["passed"]:
        raise RuntimeError(f"no gradient mixture reproduces L f (error {error:.3e})")
    return report


def load_labels(path):
    with open(path, encoding="utf-8") as fh:
        doc = json.load(fh)
    if not isinstance(doc, dict) or not isinstance(doc.get("labels"), dict):
        raise HypergraphError("labels file must be an object with a 'labels' object")
    return doc["labels"]
