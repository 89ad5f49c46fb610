"""Independent reference computations used only by the tests.

Nothing here calls into the polar/slice machinery: volumes are integrated in
x-space directly and supports come from brute-force sampling.
"""

from __future__ import annotations

import itertools
import math

import numpy as np
from scipy import integrate, optimize


def brute_support(points: np.ndarray, y) -> float:
    """``max <p, y>`` over a point cloud sampled from the body."""
    return float(np.max(points @ np.asarray(y, dtype=float)))


def hull_samples(generators, count: int, rng: np.random.Generator) -> np.ndarray:
    """Random convex combinations of generators plus orthant jitter."""
    g = np.asarray([[float(v) for v in row] for row in generators])
    w = rng.dirichlet(np.ones(len(g)), size=count)
    return w @ g + rng.exponential(0.5, size=(count, g.shape[1])) * (rng.random((count, 1)) < 0.5)


def in_hull_lp(generators, x) -> bool:
    """Membership in ``conv(G) + orthant`` by a feasibility LP: ``G^T w <= x``, ``w`` on the simplex."""
    g = np.asarray([[float(v) for v in row] for row in generators])
    k = len(g)
    res = optimize.linprog(
        np.zeros(k),
        A_ub=g.T,
        b_ub=np.asarray(x, dtype=float) + 1e-12,
        A_eq=np.ones((1, k)),
        b_eq=[1.0],
        bounds=[(0, None)] * k,
        method="highs",
    )
    return res.status == 0


def planar_volume_function(support, s: float, lower: float = -60.0) -> float:
    """``v(s) = int_{h(x) < s} e^{x1 + x2} dx`` for planar bodies, by nested quadrature.

    For fixed ``x1`` the set ``{x2 : h(x1, x2) < s}`` is an interval ``(-inf, r(x1))``
    because ``h`` is nondecreasing in ``x2``; ``r`` is found by root bracketing.
    """

    def upper(x1: float) -> float:
        if support((x1, lower)) >= s:
            return lower
        lo, hi = lower, 0.0
        if support((x1, hi)) < s:
            return hi
        return optimize.brentq(lambda x2: support((x1, x2)) - s, lo, hi, xtol=1e-14, rtol=1e-14)

    def inner(x1: float) -> float:
        r = upper(x1)
        return math.exp(x1) * math.exp(r) if r > lower else 0.0

    val, _ = integrate.quad(inner, lower, 0.0, limit=400, epsabs=0.0, epsrel=1e-11, points=[s, s / 2, s / 8])
    return val


def simplex_grid(n: int, resolution: int):
    for combo in itertools.combinations(range(resolution + n - 1), n - 1):
        parts, prev = [], -1
        for c in combo:
            parts.append(c - prev - 1)
            prev = c
        parts.append(resolution + n - 2 - prev)
        yield tuple(p / resolution for p in parts)


def flat_membership(x) -> bool:
    """Membership oracle of the halfplane body ``x1 + x2 >= 2`` (importable by path)."""
    return x[0] + x[1] >= 2
