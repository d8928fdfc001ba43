"""Explicit time integration of df_N/dt = -L_omega f."""
import csv
import json
from dataclasses import dataclass

import numpy as np

from .core import norm_omega
from .operator import first_derivative
from .quadratic import TAU_GROUP, discrepancy_ratio, quadratic_form

METHODS = ("euler", "rk4")
MIN_STEP = 1e-15


class StepUnderflowError(RuntimeError):
    """Adaptive step shrank below MIN_STEP (stiffness near a class merge)."""


@dataclass(frozen=True)
class TrajectoryRecord:
    t: float
    f: np.ndarray
    Q: float
    D: float  # None when stationary vertices are present
    grad_norm: float


@dataclass
class IntegratorConfig:
    method: str = "euler"
    step: float = None          # default_step(H) when None
    adaptive: bool = False
    max_time: float = 10.0
    stop_grad_tol: float = 1e-9
    record_every: int = 1
    clip_merges: bool = True    # shorten steps that would carry two values past each other

    def __post_init__(self):
        if self.method not in METHODS:
            raise ValueError(f"method must be one of {METHODS}")
        if self.step is not None and not self.step > 0:
            raise ValueError("step must be positive")
        if not self.max_time > 0:
            raise ValueError("max_time must be positive")
        if self.stop_grad_tol < 0:
            raise ValueError("stop_grad_tol must be nonnegative")
        if self.record_every < 1:
            raise ValueError("record_every must be >= 1")


def default_step(H):
    """1e-3 * omega_min / w_max, which keeps the explicit scheme stable."""
    if H.m == 0:
        return 1e-3
    return 1e-3 * float(H.omega[H.free].min()) / float(H.weights.max())


def step(H, f, h, method="euler"):
    """One explicit step; stationary coordinates never move."""
    if not h > 0:
        raise ValueError("step size must be positive")
    f = np.asarray(f, dtype=float)
    if method == "euler":
        return f + h * first_derivative(H, f)[0]
    if method == "rk4":
        k1 = first_derivative(H, f)[0]
        k2 = first_derivative(H, f + 0.5 * h * k1)[0]
        k3 = first_derivative(H, f + 0.5 * h * k2)[0]
        k4 = first_derivative(H, f + h * k3)[0]
        return f + h / 6.0 * (k1 + 2 * k2 + 2 * k3 + k4)
    raise ValueError(f"unknown method {method!r}")


def _first_crossing(f, d, tol=TAU_GROUP):
    """Smallest s in (0, 1) at which f + s d brings two distinct values
    together, with the pair that meets; ``(1.0, None)`` if none do."""
    order = np.argsort(f, kind="stable")
    gap = np.diff(f[order])
    closing = d[order[:-1]] - d[order[1:]]
    ok = (gap > tol) & (closing > 0)
    if not ok.any():
        return 1.0, None
    s = np.full(len(gap), np.inf)
    s[ok] = gap[ok] / closing[ok]
    i = int(np.argmin(s))
    if s[i] >= 1.0:
        return 1.0, None
    return float(s[i]), (order[i], order[i + 1])


def clipped_step(H, f, h, method="euler", max_events=None):
    """Advance by h, stopping at each class merge and snapping the merged pair.

    The plain explicit step overshoots when two values meet inside a step and
    then chatters around the merge; splitting the step at the meeting point
    removes that first-order error. Returns the new vector.
    """
    f = np.asarray(f, dtype=float).copy()
    remaining = h
    events = 0
    cap = 2 * H.n + 4 if max_events is None else max_events
    while remaining > 0:
        d = step(H, f, remaining, method) - f
        s, pair = _first_crossing(f, d) if events < cap else (1.0, None)
        if pair is None:
            return f + d
        f = f + s * d
        u, v = pair
        if H.free[u] and H.free[v]:
            f[u] = f[v] = 0.5 * (f[u] + f[v])
        else:
            # a stationary value never moves
            f[v if H.free[v] else u] = f[u if H.free[v] else v]
        remaining *= 1.0 - s
        events += 1
    return f


def _record(H, t, f, f1):
    D = None if H.stationary or not np.any(f * H.omega * f) else discrepancy_ratio(H, f)
    grad = norm_omega(H, f1)
    return TrajectoryRecord(t, f.copy(), quadratic_form(H, f), D, grad)


def run(H, f0, config=None):
    """Integrate from f0 until max_time or until ||L_omega f||_omega <= stop_grad_tol.

    In adaptive mode a step that raises the monitored potential (Q with
    stationary vertices, D without) by more than 1e-12 is retried at half the
    step size. With ``clip_merges`` a step is split where two values meet.
    """
    config = config or IntegratorConfig()
    advance = clipped_step if config.clip_merges else step
    h = config.step or default_step(H)
    f = np.array(f0, dtype=float)
    if f.shape != (H.n,):
        raise ValueError(f"f0 must have length {H.n}")
    monitor_D = not H.stationary

    def potential(g):
        if monitor_D:
            return discrepancy_ratio(H, g) if np.any(g * H.omega * g) else 0.0
        return quadratic_form(H, g)

    t = 0.0
    k = 0
    records = []
    f1 = first_derivative(H, f)[0]
    while True:
        grad = norm_omega(H, f1)
        done = grad <= config.stop_grad_tol or t >= config.max_time * (1 - 1e-12)
        if k % config.record_every == 0 or done:
            records.append(_record(H, t, f, f1))
        if done:
            break
        hk = min(h, config.max_time - t)
        if config.adaptive:
            before = potential(f)
            while True:
                cand = advance(H, f, hk, config.method)
                if potential(cand) <= before + 1e-12:
                    break
                hk *= 0.5
                h = hk
                if hk < MIN_STEP:
                    raise StepUnderflowError(f"step underflow at t={t}")
        else:
            cand = advance(H, f, hk, config.method)
        f = cand
        t += hk
        k += 1
        f1 = first_derivative(H, f)[0]
    return records


def write_trajectory_csv(records, out):
    """CSV with header t,Q,D,grad_norm; ``out`` is a path or a text stream."""
    if hasattr(out, "write"):
        _write_rows(records, out)
        return
    with open(out, "w", newline="", encoding="utf-8") as fh:
        _write_rows(records, fh)


def _write_rows(records, fh):
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(["t", "Q", "D", "grad_norm"])
    for r in records:
        w.writerow([repr(r.t), repr(r.Q), "" if r.D is None else repr(r.D), repr(r.grad_norm)])


def write_density_jsonl(records, path):
    with open(path, "w", encoding="utf-8") as fh:
        for r in records:
            fh.write(json.dumps({"t": r.t, "f": r.f.tolist()}) + "\n")
