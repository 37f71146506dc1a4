"""Derivative-free simplex minimizer used by the statistical model fits.

Plain Nelder-Mead with optional box projection. Convergence is declared
when the simplex diameter falls below ``diameter_tol`` or after
``max_iter`` iterations.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

DIAMETER_TOL = 1e-8
MAX_ITER = 2000


@dataclass
class OptimResult:
    x: np.ndarray
    fun: float
    iterations: int
    converged: bool
    evaluations: int


def nelder_mead(func: Callable[[np.ndarray], float], x0: np.ndarray, *,
                bounds: tuple[np.ndarray, np.ndarray] | None = None,
                initial_step: float | np.ndarray = 0.1,
                diameter_tol: float = DIAMETER_TOL,
                max_iter: int = MAX_ITER) -> OptimResult:
    """Minimize ``func`` from ``x0``.

    ``bounds`` is an optional (lower, upper) pair; candidate points are
    projected into the box before evaluation, so the returned point always
    satisfies the bounds. ``initial_step`` may be a per-dimension array.
    """
    x0 = np.asarray(x0, dtype=float)
    n = len(x0)
    steps = np.broadcast_to(np.asarray(initial_step, dtype=float), (n,))
    if bounds is not None:
        lo, hi = (np.asarray(b, dtype=float) for b in bounds)
    else:
        lo = hi = None

    def project(x: np.ndarray) -> np.ndarray:
        return x if lo is None else np.clip(x, lo, hi)

    evals = 0

    def evaluate(x: np.ndarray) -> float:
        nonlocal evals
        evals += 1
        val = func(x)
        return float(val) if np.isfinite(val) else np.inf

    if n == 0:
        return OptimResult(x0, evaluate(x0), 0, True, evals)

    alpha, gamma, rho, sigma = 1.0, 2.0, 0.5, 0.5

    simplex = [project(x0)]
    for i in range(n):
        vertex = x0.copy()
        vertex[i] += steps[i]
        simplex.append(project(vertex))
    values = [evaluate(v) for v in simplex]

    iterations = 0
    converged = False
    while iterations < max_iter:
        order = np.argsort(values, kind="stable")
        simplex = [simplex[i] for i in order]
        values = [values[i] for i in order]

        # Max distance from the best vertex is within a factor 2 of the true
        # diameter; testing it against tol/2 guarantees diameter < tol.
        spread = np.linalg.norm(np.stack(simplex[1:]) - simplex[0], axis=1).max()
        if spread < diameter_tol / 2.0:
            converged = True
            break
        iterations += 1

        centroid = np.mean(simplex[:-1], axis=0)
        worst = simplex[-1]

        reflected = project(centroid + alpha * (centroid - worst))
        f_ref = evaluate(reflected)
        if values[0] <= f_ref < values[-2]:
            simplex[-1], values[-1] = reflected, f_ref
            continue
        if f_ref < values[0]:
            expanded = project(centroid + gamma * (centroid - worst))
            f_exp = evaluate(expanded)
            if f_exp < f_ref:
                simplex[-1], values[-1] = expanded, f_exp
            else:
                simplex[-1], values[-1] = reflected, f_ref
            continue
        contracted = project(centroid + rho * (worst - centroid))
        f_con = evaluate(contracted)
        if f_con < values[-1]:
            simplex[-1], values[-1] = contracted, f_con
            continue
        best = simplex[0]
        for i in range(1, n + 1):
            simplex[i] = project(best + sigma * (simplex[i] - best))
            values[i] = evaluate(simplex[i])

    order = np.argsort(values, kind="stable")
    best = simplex[order[0]]
    return OptimResult(best, values[order[0]], iterations, converged, evals)


def nelder_mead_restarts(func: Callable[[np.ndarray], float], x0: np.ndarray, *,
                         restarts: int, spread: float, seed: int,
                         bounds: tuple[np.ndarray, np.ndarray] | None = None,
                         diameter_tol: float = DIAMETER_TOL,
                         max_iter: int = MAX_ITER) -> OptimResult:
    """Run one deterministic start plus ``restarts`` seeded random restarts,
    keeping the best result."""
    rng = np.random.default_rng(seed)
    best = nelder_mead(func, x0, bounds=bounds, diameter_tol=diameter_tol, max_iter=max_iter)
    for _ in range(restarts):
        start = x0 + rng.uniform(-spread, spread, size=len(x0))
        result = nelder_mead(func, start, bounds=bounds,
                             diameter_tol=diameter_tol, max_iter=max_iter)
        if result.fun < best.fun:
            best = result
    return best
