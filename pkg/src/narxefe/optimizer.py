"""Multi-start box-constrained minimisation.

Each start runs a spectral (Barzilai-Borwein) projected-gradient method with
a monotone Armijo backtracking search along the projection arc.  All starts
advance together so that a batched objective is evaluated once per sweep.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

ARMIJO = 1e-4
MAX_BACKTRACK = 40
STEP_MIN, STEP_MAX = 1e-10, 1e10


class OptimizerError(RuntimeError):
    pass


@dataclass(frozen=True)
class OptimizerConfig:
    n_starts: int = 8
    max_iters: int = 200
    gtol: float = 1e-8
    step_tol: float = 1e-10
    seed: int = 0

    def __post_init__(self):
        if self.n_starts < 1:
            raise ValueError(f"n_starts must be >= 1, got {self.n_starts}")
        if self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")
        if not (self.gtol > 0 and self.step_tol > 0):
            raise ValueError("tolerances must be positive")


@dataclass
class OptimizerResult:
    u_star: np.ndarray
    value: float
    iterations: int
    converged: bool
    start_values: np.ndarray = field(repr=False)
    final_values: np.ndarray = field(repr=False)
    trace: Optional[list[list[float]]] = field(default=None, repr=False)


def start_points(lo: np.ndarray, hi: np.ndarray, config: OptimizerConfig, warm: Optional[np.ndarray] = None) -> np.ndarray:
    """Deterministic lattice of constant sequences plus seeded uniform draws.

    In one dimension every start is a lattice point (bounds and midpoint
    included).  A warm start, when given, replaces the last start.
    """
    n, dim = config.n_starts, lo.size
    if dim == 1:
        pts = np.linspace(lo[0], hi[0], n)[:, None] if n > 1 else 0.5 * (lo + hi)[None, :]
    else:
        n_lattice = min(n, 5)
        order = [0.5, 0.0, 1.0, 0.25, 0.75][:n_lattice]
        lattice = np.array([lo + w * (hi - lo) for w in order])
        rng = np.random.default_rng(config.seed)
        draws = rng.uniform(lo, hi, size=(n - n_lattice, dim))
        pts = np.vstack([lattice, draws])
    if warm is not None:
        pts[-1] = np.clip(warm, lo, hi)
    return pts


def _as_batched(fun: Callable, batched: bool) -> Callable:
    if batched:
        return fun

    def wrapped(xs):
        out = [fun(x) for x in xs]
        return np.array([o[0] for o in out], dtype=float), np.array([o[1] for o in out], dtype=float)

    return wrapped


def minimize(
    fun: Callable,
    bounds: tuple,
    config: OptimizerConfig = OptimizerConfig(),
    *,
    batched: bool = False,
    warm_start=None,
    record_trace: bool = False,
) -> OptimizerResult:
    """Minimise ``fun`` over the box ``bounds = (lo, hi)``.

    ``fun(x) -> (value, gradient)``; with ``batched=True`` it instead maps an
    (n, dim) array to ``(values (n,), gradients (n, dim))``.
    """
    lo = np.atleast_1d(np.asarray(bounds[0], dtype=float))
    hi = np.atleast_1d(np.asarray(bounds[1], dtype=float))
    if lo.shape != hi.shape or np.any(lo > hi):
        raise ValueError("invalid bounds")
    f_batch = _as_batched(fun, batched)
    width = float(np.max(hi - lo))

    def evaluate(xs):
        vals, grads = f_batch(xs)
        vals, grads = np.asarray(vals, dtype=float), np.asarray(grads, dtype=float)
        if not (np.all(np.isfinite(vals)) and np.all(np.isfinite(grads))):
            raise OptimizerError("objective or gradient is not finite")
        return vals, grads

    warm = None if warm_start is None else np.asarray(warm_start, dtype=float)
    x = start_points(lo, hi, config, warm)
    n = x.shape[0]
    f, g = evaluate(x)
    f0 = f.copy()
    trace = [[v] for v in f] if record_trace else None

    pg = np.clip(x - g, lo, hi) - x
    step = 1.0 / np.maximum(np.max(np.abs(pg), axis=1), 1e-12)
    step = np.clip(step, STEP_MIN, STEP_MAX)
    active = np.max(np.abs(pg), axis=1) >= config.gtol
    converged = ~active
    iters = np.zeros(n, dtype=int)

    for _ in range(config.max_iters):
        idx = np.flatnonzero(active)
        if idx.size == 0:
            break
        xa, fa, ga = x[idx], f[idx], g[idx]
        d = np.clip(xa - step[idx, None] * ga, lo, hi) - xa
        slope = np.einsum("ij,ij->i", ga, d)
        lam = np.ones(idx.size)
        x_new, f_new, g_new = xa.copy(), fa.copy(), ga.copy()
        pending = np.ones(idx.size, dtype=bool)
        for _ in range(MAX_BACKTRACK):
            p = np.flatnonzero(pending)
            if p.size == 0:
                break
            trial = np.clip(xa[p] + lam[p, None] * d[p], lo, hi)
            ft, gt = evaluate(trial)
            ok = ft <= fa[p] + ARMIJO * lam[p] * slope[p]
            acc = p[ok]
            x_new[acc], f_new[acc], g_new[acc] = trial[ok], ft[ok], gt[ok]
            pending[acc] = False
            # safeguarded quadratic interpolation of the step
            rej = p[~ok]
            denom = 2.0 * (ft[~ok] - fa[rej] - lam[rej] * slope[rej])
            lq = np.where(denom > 0, -slope[rej] * lam[rej] ** 2 / np.where(denom > 0, denom, 1.0), 0.5 * lam[rej])
            lam[rej] = np.clip(lq, 0.1 * lam[rej], 0.5 * lam[rej])
        stalled = pending  # no acceptable step: already at numerical optimum

        s = x_new - xa
        yv = g_new - ga
        sy = np.einsum("ij,ij->i", s, yv)
        ss = np.einsum("ij,ij->i", s, s)
        # steps beyond one box width only land on the same face after projection
        cap = width / np.maximum(np.max(np.abs(g_new), axis=1), 1e-300)
        new_step = np.where(sy > 0, ss / np.where(sy > 0, sy, 1.0), cap)
        step[idx] = np.clip(np.minimum(new_step, cap), STEP_MIN, STEP_MAX)
        x[idx], f[idx], g[idx] = x_new, f_new, g_new
        iters[idx] += 1
        if trace is not None:
            for j, i in enumerate(idx):
                trace[i].append(float(f_new[j]))

        pgn = np.max(np.abs(np.clip(x[idx] - g[idx], lo, hi) - x[idx]), axis=1)
        small_step = np.max(np.abs(s), axis=1) < config.step_tol
        done = (pgn < config.gtol) | small_step | stalled
        converged[idx[done & ((pgn < config.gtol) | small_step)]] = True
        active[idx[done]] = False

    best = int(np.argmin(f))  # first index wins ties
    return OptimizerResult(
        u_star=np.clip(x[best], lo, hi),
        value=float(f[best]),
        iterations=int(iters[best]),
        converged=bool(converged[best]),
        start_values=f0,
        final_values=f.copy(),
        trace=trace,
    )
