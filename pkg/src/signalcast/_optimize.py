"""Minimal Nelder-Mead simplex for the conditional-sum-of-squares search.

Deterministic given the starting point; converges when the spread of
objective values across the simplex falls below a relative tolerance.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

_REFLECT, _EXPAND, _CONTRACT, _SHRINK = 1.0, 2.0, 0.5, 0.5
_NONZERO_STEP = 0.05
_ZERO_STEP = 0.00025


def nelder_mead(
    fn: Callable[[np.ndarray], float],
    x0: np.ndarray,
    f_tol_rel: float = 1e-10,
    max_iter: int = 5000,
) -> tuple[np.ndarray, float, bool]:
    """Returns (argmin, min, converged)."""
    x0 = np.asarray(x0, dtype=float)
    n = len(x0)
    if n == 0:
        return x0, fn(x0), True

    sim = [x0.copy()]
    for i in range(n):
        x = x0.copy()
        x[i] = x[i] * (1.0 + _NONZERO_STEP) if x[i] != 0.0 else _ZERO_STEP
        sim.append(x)
    fvals = [fn(x) for x in sim]

    converged = False
    for _ in range(max_iter):
        order = np.argsort(fvals, kind="stable")
        sim = [sim[i] for i in order]
        fvals = [fvals[i] for i in order]
        f_best, f_worst = fvals[0], fvals[-1]
        if f_worst - f_best <= f_tol_rel * (abs(f_best) + 1e-300):
            converged = True
            break

        centroid = np.mean(sim[:-1], axis=0)
        reflected = centroid + _REFLECT * (centroid - sim[-1])
        f_reflected = fn(reflected)
        if f_reflected < fvals[0]:
            expanded = centroid + _EXPAND * (reflected - centroid)
            f_expanded = fn(expanded)
            if f_expanded < f_reflected:
                sim[-1], fvals[-1] = expanded, f_expanded
            else:
                sim[-1], fvals[-1] = reflected, f_reflected
        elif f_reflected < fvals[-2]:
            sim[-1], fvals[-1] = reflected, f_reflected
        else:
            if f_reflected < fvals[-1]:
                contracted = centroid + _CONTRACT * (reflected - centroid)
            else:
                contracted = centroid - _CONTRACT * (centroid - sim[-1])
            f_contracted = fn(contracted)
            if f_contracted < min(f_reflected, fvals[-1]):
                sim[-1], fvals[-1] = contracted, f_contracted
            else:
                best = sim[0]
                sim = [best] + [best + _SHRINK * (x - best) for x in sim[1:]]
                fvals = [fvals[0]] + [fn(x) for x in sim[1:]]

    i_best = int(np.argmin(fvals))
    return sim[i_best], fvals[i_best], converged
