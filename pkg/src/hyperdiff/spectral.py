"""Second-eigenvalue estimation by normalized diffusion descent, sweep-cut
rounding and the Cheeger sandwich check."""
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .core import CutReport, brute_force_phi_H, expansion, inner_product_omega, norm_omega
from .diffusion import IntegratorConfig
from .operator import first_derivative
from .quadratic import quadratic_form

CHEEGER_SLACK = 1e-6


@dataclass
class SpectralResult:
    gamma2: float
    minimizer: np.ndarray
    residual: float
    sweep: CutReport
    history: list = field(default_factory=list, repr=False)

    def to_dict(self):
        return {"gamma2": self.gamma2, "residual": self.residual,
                "phi_sweep": self.sweep.phi if self.sweep else None,
                "S": sorted(self.sweep.S) if self.sweep else None}


def _require_free(H):
    if H.stationary:
        raise ValueError("spectral routines require V = N (no stationary vertices)")


def _project(H, f):
    """Remove the omega-weighted mean so that <1, f>_omega = 0."""
    return f - float(np.dot(H.omega, f)) / float(H.omega.sum())


def _ratio(H, f):
    return 2.0 * quadratic_form(H, f) / float(np.dot(H.omega, f * f))


def default_spectral_config(H):
    step = 1e-2 if H.m == 0 else 1e-2 * float(H.omega.min()) / float(H.weights.max())
    return IntegratorConfig(method="euler", step=step, max_time=100.0, stop_grad_tol=1e-6)


def _descend(H, f, config):
    """Projected, renormalized Euler descent on D from one start."""
    h = config.step
    f = _project(H, f)
    f /= norm_omega(H, f)
    history = []
    t = 0.0
    while True:
        f1 = first_derivative(H, f)[0]
        D = _ratio(H, f)
        history.append(D)
        residual = norm_omega(H, -f1 - D * f)
        if residual <= config.stop_grad_tol or t >= config.max_time:
            return D, f, residual, history
        g = _project(H, f + h * f1)
        nrm = norm_omega(H, g)
        if nrm == 0.0:
            return D, f, residual, history
        f = g / nrm
        t += h


def estimate_gamma2(H, restarts=8, config=None, seed=0, threads=1):
    """Estimate gamma_2 as the best D reached by diffusion descent over random starts."""
    _require_free(H)
    if H.n < 2:
        raise ValueError("gamma_2 needs at least two vertices")
    base = default_spectral_config(H)
    if config is None:
        config = base
    elif config.step is None:
        config = IntegratorConfig(config.method, base.step, config.adaptive, config.max_time,
                                  config.stop_grad_tol, config.record_every)
    starts = []
    for child in np.random.SeedSequence(seed).spawn(max(1, restarts)):
        f0 = np.random.default_rng(child).standard_normal(H.n)
        if norm_omega(H, _project(H, f0)) == 0.0:
            f0 = np.arange(H.n, dtype=float)
        starts.append(f0)
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            runs = list(pool.map(lambda f0: _descend(H, f0, config), starts))
    else:
        runs = [_descend(H, f0, config) for f0 in starts]
    best = min(runs, key=lambda r: r[0])
    D, f, residual, history = best
    return SpectralResult(float(D), f, float(residual), sweep_cut(H, f), history)


def _admissible_sets(H, f):
    total = float(H.omega.sum())
    for order in (np.lexsort((np.arange(H.n), f)), np.lexsort((-np.arange(H.n), f))):
        for i in range(1, H.n):
            for S in (order[:i], order[i:]):
                if float(H.omega[S].sum()) <= total / 2 * (1 + 1e-12):
                    yield frozenset(S.tolist())


def sweep_cut(H, f):
    """Best expansion over the prefix and suffix sets of f, for both tie orders."""
    _require_free(H)
    f = np.asarray(f, dtype=float)
    if f.shape != (H.n,):
        raise ValueError(f"density vector must have length {H.n}")
    if np.ptp(f) == 0.0:
        raise ValueError("constant vector has no nontrivial sweep")
    best = None
    for S in dict.fromkeys(_admissible_sets(H, f)):
        rep = expansion(H, S)
        if best is None or rep.phi < best.phi:
            best = rep
    return best


def _orthonormal_basis(H):
    """Columns form an omega-orthonormal basis of the complement of 1."""
    sq = np.sqrt(H.omega)
    # orthonormal complement of sqrt(omega) in the Euclidean sense, then rescale
    q, _ = np.linalg.qr(np.column_stack([sq, np.eye(H.n)]))
    comp = q[:, 1:H.n]
    return comp / sq[:, None]


def gamma2_oracle(H, seed=0, random_starts=2, cut_starts=3, maxiter=None):
    """Derivative-free minimization of D over vectors omega-orthogonal to 1.

    Uses Nelder-Mead in coordinates of an omega-orthonormal basis, started from
    the best signed cut vectors and from random points. Returns ``(gamma2, f)``.
    """
    _require_free(H)
    if H.n < 2:
        raise ValueError("gamma_2 needs at least two vertices")
    B = _orthonormal_basis(H)

    def obj(y):
        ny = float(np.dot(y, y))
        return 2.0 * quadratic_form(H, B @ y) / ny if ny > 0 else np.inf

    def coords(f):
        return B.T @ (H.omega * _project(H, f))

    cuts = []
    total = float(H.omega.sum())
    for x in range(1, 2 ** H.n - 1):
        chi = np.array([(x >> v) & 1 for v in range(H.n)], dtype=float)
        if float(np.dot(H.omega, chi)) <= total / 2 * (1 + 1e-12):
            for sign in (1.0, -1.0):
                y = coords(sign * chi)
                cuts.append((obj(y), x, sign, y))
    cuts.sort(key=lambda c: (c[0], c[1], -c[2]))
    rng = np.random.default_rng(seed)
    starts = [c[3] for c in cuts[:cut_starts]]
    starts += [rng.standard_normal(H.n - 1) for _ in range(random_starts)]
    best_val, best_y = np.inf, None
    if cuts and cuts[0][0] == 0.0:
        # a component indicator already attains the lower bound 0
        return 0.0, B @ cuts[0][3]
    for y0 in starts:
        y0 = y0 / np.linalg.norm(y0)
        val0 = obj(y0)
        if val0 < best_val:
            best_val, best_y = val0, y0
        if H.n == 2:
            continue
        res = minimize(obj, y0, method="Nelder-Mead",
                       options={"xatol": 1e-9, "fatol": 1e-12,
                                "maxiter": maxiter or 1500 * H.n})
        if res.fun < best_val:
            best_val, best_y = float(res.fun), res.x / np.linalg.norm(res.x)
    return float(best_val), B @ best_y


def cheeger_verify(H, restarts=4, seed=0, config=None, use_diffusion=True):
    """Check gamma_2/2 <= phi_H <= 2 sqrt(gamma_2) with exact phi_H.

    gamma_2 is the smaller of the diffusion estimate and the numeric oracle
    (both are values of D at feasible points, hence upper bounds).
    """
    _require_free(H)
    phi, S = brute_force_phi_H(H)
    oracle, _ = gamma2_oracle(H, seed=seed)
    estimate = None
    gamma2 = oracle
    if use_diffusion:
        estimate = estimate_gamma2(H, restarts=restarts, config=config, seed=seed).gamma2
        gamma2 = min(gamma2, estimate)
    gamma2 = max(gamma2, 0.0)
    lower = gamma2 / 2 - CHEEGER_SLACK <= phi
    upper = phi <= 2 * np.sqrt(gamma2) + CHEEGER_SLACK
    return {"phi_H": phi, "S": sorted(S), "gamma2": gamma2, "gamma2_oracle": oracle,
            "gamma2_diffusion": estimate, "lower_ok": bool(lower),
            "upper_ok": bool(upper), "passed": bool(lower and upper)}


def rayleigh_quotient(H, f):
    """<f, L f>_omega / <f, f>_omega."""
    _require_free(H)
    f = np.asarray(f, dtype=float)
    Lf = -first_derivative(H, f)[0]
    return inner_product_omega(H, f, Lf) / inner_product_omega(H, f, f)
