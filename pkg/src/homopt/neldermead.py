"""Box-constrained Nelder-Mead simplex search.

Candidates are projected onto the box before every evaluation. Axes whose
box has zero width are frozen and excluded from the simplex.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np


class SolverError(RuntimeError):
    def __init__(self, message, point=None):
        super().__init__(message)
        self.point = point


@dataclass(frozen=True)
class NmConfig:
    max_iter: Optional[int] = None  # None -> 200 * dim
    x_tol: float = 1e-6
    f_tol: float = 1e-9
    alpha: float = 1.0
    gamma: float = 2.0
    rho: float = 0.5
    sigma: float = 0.5
    initial_step: float = 0.05

    def __post_init__(self):
        if not (self.alpha > 0 and self.gamma > 1 and 0 < self.rho < 1 and 0 < self.sigma < 1):
            raise ValueError("Nelder-Mead coefficients need alpha>0, gamma>1, 0<rho<1, 0<sigma<1")
        if self.initial_step <= 0:
            raise ValueError("initial_step must be positive")
        if self.max_iter is not None and self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class NmResult:
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool
    n_evals: int


def minimize(
    objective: Callable[[np.ndarray], float],
    x0,
    lower,
    upper,
    config: NmConfig = NmConfig(),
    callback: Optional[Callable[[int, np.ndarray, float], None]] = None,
    bound_tol: float = 1e-9,
) -> NmResult:
    """Minimize ``objective`` over the box ``[lower, upper]`` starting at ``x0``.

    ``callback(iteration, best_x, best_f)`` is called after every iteration.
    Returns the best vertex ever evaluated, so the result is never worse
    than ``objective(x0)``.
    """
    lower = np.asarray(lower, dtype=float)
    upper = np.asarray(upper, dtype=float)
    x0 = np.asarray(x0, dtype=float).reshape(-1)
    if np.any(x0 < lower - bound_tol) or np.any(x0 > upper + bound_tol):
        raise SolverError("starting point outside the box", point=x0)
    x0 = np.clip(x0, lower, upper)

    active = np.flatnonzero(upper > lower)
    m = active.size
    max_iter = config.max_iter if config.max_iter is not None else 200 * max(x0.size, 1)
    n_evals = 0

    def full(z):
        x = x0.copy()
        x[active] = np.clip(z, lower[active], upper[active])
        return x

    def f(z):
        nonlocal n_evals
        x = full(z)
        val = float(objective(x))
        n_evals += 1
        if not np.isfinite(val):
            raise SolverError(f"objective returned {val}", point=x)
        return val

    if m == 0:
        return NmResult(x0, f(x0[active]), 0, True, n_evals)

    lo, hi = lower[active], upper[active]
    start = x0[active]
    sim = np.tile(start, (m + 1, 1))
    for i in range(m):
        step = config.initial_step * (hi[i] - lo[i])
        if start[i] + step > hi[i]:
            step = -step
        sim[i + 1, i] = np.clip(start[i] + step, lo[i], hi[i])
    fs = np.array([f(v) for v in sim])

    best_x, best_f = sim[0].copy(), fs[0]
    converged = False
    it = 0
    while it < max_iter:
        order = np.argsort(fs, kind="stable")
        sim, fs = sim[order], fs[order]
        if fs[0] < best_f:
            best_x, best_f = sim[0].copy(), fs[0]
        diameter = np.max(np.abs(sim[1:] - sim[0]))
        if diameter < config.x_tol and fs[-1] - fs[0] < config.f_tol:
            converged = True
            break
        it += 1

        centroid = sim[:-1].mean(axis=0)
        xr = np.clip(centroid + config.alpha * (centroid - sim[-1]), lo, hi)
        fr = f(xr)
        if fr < fs[0]:
            xe = np.clip(centroid + config.gamma * (xr - centroid), lo, hi)
            fe = f(xe)
            if fe < fr:
                sim[-1], fs[-1] = xe, fe
            else:
                sim[-1], fs[-1] = xr, fr
        elif fr < fs[-2]:
            sim[-1], fs[-1] = xr, fr
        else:
            if fr < fs[-1]:
                xc = np.clip(centroid + config.rho * (xr - centroid), lo, hi)
                fc = f(xc)
                accept = fc <= fr
            else:
                xc = np.clip(centroid + config.rho * (sim[-1] - centroid), lo, hi)
                fc = f(xc)
                accept = fc < fs[-1]
            if accept:
                sim[-1], fs[-1] = xc, fc
            else:
                for i in range(1, m + 1):
                    sim[i] = np.clip(sim[0] + config.sigma * (sim[i] - sim[0]), lo, hi)
                    fs[i] = f(sim[i])

        i_min = int(np.argmin(fs))
        if fs[i_min] < best_f:
            best_x, best_f = sim[i_min].copy(), fs[i_min]
        if callback is not None:
            callback(it, full(best_x), best_f)

    return NmResult(full(best_x), float(best_f), it, converged, n_evals)
