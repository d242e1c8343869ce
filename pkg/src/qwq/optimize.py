"""Bracketed scalar minimization over a probability p in [0, 1]."""

from __future__ import annotations

import math
from typing import Callable, Optional

import numpy as np
from numpy.typing import NDArray

__all__ = ["golden_section", "minimize_unit_interval"]

_INV_PHI = (math.sqrt(5.0) - 1.0) / 2.0


def golden_section(
    f: Callable[[float], float], a: float, b: float, tol: float = 1e-8
) -> tuple[float, float]:
    """Golden-section search for the minimum of a unimodal ``f`` on [a, b].

    Returns ``(x, f(x))`` for the best point evaluated, endpoints included, so
    a minimum sitting on the boundary is found exactly.
    """
    fa, fb = f(a), f(b)
    best = (a, fa) if fa <= fb else (b, fb)
    h = b - a
    if h <= tol:
        return best
    c = b - _INV_PHI * h
    d = a + _INV_PHI * h
    fc, fd = f(c), f(d)
    while h > tol:
        if fc <= fd:
            b, d, fd = d, c, fc
            h = b - a
            c = b - _INV_PHI * h
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            h = b - a
            d = a + _INV_PHI * h
            fd = f(d)
    for x, fx in ((c, fc), (d, fd)):
        if fx < best[1]:
            best = (x, fx)
    return best


def minimize_unit_interval(
    f: Callable[[float], float],
    f_grid: Optional[Callable[[NDArray[np.float64]], NDArray[np.float64]]] = None,
    n_grid: int = 1024,
    tol: float = 1e-8,
) -> tuple[float, float]:
    """Minimize ``f`` over [0, 1]: grid scan, then golden-section refinement.

    The refinement runs on the two grid cells around the best grid point.
    ``f_grid`` evaluates ``f`` on a whole array at once when available. ``f``
    may return ``inf``.
    """
    grid = np.linspace(0.0, 1.0, n_grid)
    vals = f_grid(grid) if f_grid is not None else np.array([f(p) for p in grid])
    vals = np.where(np.isnan(vals), np.inf, vals)
    i = int(np.argmin(vals))
    if not np.isfinite(vals[i]):
        return float(grid[i]), math.inf
    lo = grid[max(i - 1, 0)]
    hi = grid[min(i + 1, n_grid - 1)]
    x, fx = golden_section(f, float(lo), float(hi), tol)
    if vals[i] < fx:
        return float(grid[i]), float(vals[i])
    return x, fx
