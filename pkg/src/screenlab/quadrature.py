"""Composite Simpson quadrature and bisection on piecewise-smooth integrands.

Integrands in this package are smooth between a known set of kinks (density
knots, threshold minus noise-support edges).  Quadrature splits the interval
at those kinks and runs composite Simpson on each piece so the convergence
order is not lost at the kinks.
"""

from __future__ import annotations

from typing import Callable

import numpy as np

# Minimum number of Simpson cells per kink-free piece (must be even).
MIN_CELLS = 2


def simpson_rule(lo: float, hi: float, breaks, n: int) -> tuple[np.ndarray, np.ndarray]:
    """Nodes and weights of composite Simpson on [lo, hi] split at ``breaks``.

    About ``n`` cells are shared between the pieces in proportion to their
    length; each piece gets an even count of at least ``MIN_CELLS``.
    """
    if not hi > lo:
        return np.zeros(0), np.zeros(0)
    cuts = np.asarray(breaks, dtype=float).ravel()
    cuts = cuts[(cuts > lo) & (cuts < hi)]
    edges = np.unique(np.concatenate(([lo], cuts, [hi])))
    width = hi - lo
    # drop slivers created by round-off around coincident kinks
    keep = np.concatenate(([True], np.diff(edges) > 1e-14 * max(1.0, abs(width))))
    edges = edges[keep]
    edges[-1] = hi
    a, b = edges[:-1], edges[1:]
    length = b - a
    cells = 2 * np.maximum(MIN_CELLS // 2, np.rint(n * length / (2.0 * width))).astype(np.int64)

    counts = cells + 1
    piece = np.repeat(np.arange(a.size), counts)
    starts = np.concatenate(([0], np.cumsum(counts)[:-1]))
    local = np.arange(piece.size) - starts[piece]
    h = length / cells
    nodes = a[piece] + local * h[piece]
    # pin the last node of each piece exactly to its edge
    last = local == cells[piece]
    nodes[last] = b[piece[last]]

    w = np.where(local % 2 == 1, 4.0, 2.0)
    w[(local == 0) | last] = 1.0
    weights = w * h[piece] / 3.0
    return nodes, weights


def integrate(func: Callable[[np.ndarray], np.ndarray], lo: float, hi: float, breaks=(), n: int = 4096) -> float:
    nodes, weights = simpson_rule(lo, hi, breaks, n)
    if nodes.size == 0:
        return 0.0
    return float(np.dot(weights, func(nodes)))


def bisect_decreasing(func: Callable[[float], float], target: float, lo: float, hi: float,
                      xtol: float = 1e-13, maxiter: int = 200) -> float:
    """Find ``x`` in [lo, hi] with ``func(x) == target`` for nonincreasing ``func``.

    The bracket is assumed valid: ``func(lo) >= target >= func(hi)``.  Stops once
    the bracket is narrower than ``xtol`` and returns its midpoint.
    """
    for _ in range(maxiter):
        if hi - lo <= xtol:
            break
        mid = 0.5 * (lo + hi)
        if func(mid) > target:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def bisect_sign(func: Callable[[float], float], lo: float, hi: float, xtol: float = 1e-8) -> float:
    """Root of ``func`` on [lo, hi] given a sign change between the endpoints."""
    flo = func(lo)
    while hi - lo > xtol:
        mid = 0.5 * (lo + hi)
        fmid = func(mid)
        if fmid == 0.0:
            return mid
        if (fmid > 0) == (flo > 0):
            lo, flo = mid, fmid
        else:
            hi = mid
    return 0.5 * (lo + hi)
