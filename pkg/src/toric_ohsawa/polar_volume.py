"""Polar bodies, diagonal slice volumes and the singularity verdict.

The polar body is ``P° = {x <= 0 : h_P(x) <= -1}`` and
``g(b)`` is the induced Euclidean ``(n-1)``-volume of ``P° ∩ {sum(x) = b - 1}``.
With ``h(b) = -g(b)^(1/(n-1))`` (convex by Brunn-Minkowski) the Ohsawa norm of
a log canonical toric singularity is non-singular exactly when ``g(0) = 0``
and ``L = lim_{b->0-} h(b)/b`` is finite.
"""

from __future__ import annotations

import abc
import csv
import enum
import itertools
import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np
from scipy import integrate, optimize
from scipy.spatial import ConvexHull, QhullError

from ._rational import determinant, rank, solve
from .newton_body import (
    BodyError,
    Corner,
    Curved,
    Facet,
    HyperbolicHullBody,
    NewtonBody,
    OracleBody,
    PolyhedralNewtonBody,
    Probed,
)
from .valuations import lct, lc_places

#: Geometric b-grid ``b_k = -2^-k`` used for slice profiles.
DEFAULT_B_GRID = tuple(-(2.0**-k) for k in range(3, 21))
#: ``limit_L`` declares divergence once ``h(b)/b`` exceeds this cap.
DIVERGENCE_CAP = 1e6
#: Relative change below which ``h(b)/b`` counts as stabilized.
STABILIZATION_TOL = 1e-4
#: Required coefficient of determination for power-law divergence fits.
FIT_R2 = 0.99


class ProfileError(RuntimeError):
    """Slice profile too short, or not monotone beyond its error bars."""


class RouteDisagreement(RuntimeError):
    """Independent singularity routes returned different answers."""


class VerdictError(RuntimeError):
    """No route could decide the verdict."""


@dataclass(frozen=True)
class SliceValue:
    b: float
    g: float
    exact: bool
    stderr: float = 0.0
    #: projected rational measure, available on exact polyhedral paths
    rational: Optional[Fraction] = None


@dataclass(frozen=True)
class LocalExpansion:
    """``g(b) ≈ coefficient * (b_max - b)^exponent`` as ``b -> b_max-``."""

    coefficient: float
    exponent: float
    b_max: float


@dataclass(frozen=True)
class SliceProfile:
    dimension: int
    points: tuple
    expansion: Optional[LocalExpansion] = None

    def __post_init__(self):
        bs = [p.b for p in self.points]
        if any(b2 <= b1 for b1, b2 in zip(bs, bs[1:])):
            raise ProfileError("profile b values must be strictly increasing")

    @property
    def g0(self) -> Optional[SliceValue]:
        return next((p for p in self.points if p.b == 0), None)

    def h_values(self) -> list[tuple[float, float]]:
        """``(b, h(b))`` pairs with ``h = -g^(1/(n-1))``."""
        k = self.dimension - 1
        return [(p.b, -(p.g ** (1.0 / k))) for p in self.points]


# ---------------------------------------------------------------------------
# Polar bodies
# ---------------------------------------------------------------------------


def _simplex_measure(n: int, size: float) -> float:
    """Induced volume of ``{y >= 0, sum(y) = size}`` in ``R^n``."""
    return math.sqrt(n) * size ** (n - 1) / math.factorial(n - 1)


class PolarBody(abc.ABC):
    def __init__(self, body: NewtonBody):
        self.body = body
        self.dimension = body.dimension
        kappa = body.diagonal_entry()
        #: largest b with a nonempty slice: sup over P° of sum(x) is -1/kappa
        self.b_max = 1 - 1 / kappa if isinstance(kappa, Fraction) else 1.0 - 1.0 / kappa

    def contains(self, x: Sequence) -> bool:
        if len(x) != self.dimension or any(v > 0 for v in x):
            return False
        return self.body.support_value(x) <= -1

    @abc.abstractmethod
    def slice_volume(self, b) -> SliceValue: ...

    def local_expansion(self) -> Optional[LocalExpansion]:
        return None

    def normalized_volume(self, t: float) -> float:
        """``I(t) = e^-t * int_{h_P < t} e^{sum x} dx``, exact where supported."""
        raise NotImplementedError(f"{type(self).__name__} has no exact volume path")

    @property
    def exact(self) -> bool:
        return False


class PolyhedralPolar(PolarBody):
    """``{x <= 0 : <g, x> <= -1 for every vertex generator g}``, exact rationals.

    The slice volume is piecewise polynomial in ``b`` with breakpoints at the
    levels of the polar's vertices; the pieces are recovered by exact
    interpolation at construction and used for closed-form Laplace integrals.
    """

    def __init__(self, body: PolyhedralNewtonBody):
        super().__init__(body)
        n = self.dimension
        ones = tuple(Fraction(1) for _ in range(n))
        self._ones = ones
        self.constraints = tuple((g, Fraction(-1)) for g in body.generators) + tuple(
            (tuple(Fraction(int(i == j)) for j in range(n)), Fraction(0)) for i in range(n)
        )
        self.vertices = self._vertices()
        levels = sorted({sum(v) + 1 for v in self.vertices})
        if levels[-1] != self.b_max:
            raise AssertionError("polar vertex levels disagree with the diagonal entry point")
        self.levels = tuple(levels)
        self.pieces = self._pieces()

    @property
    def exact(self) -> bool:
        return True

    def halfspaces(self) -> list[tuple[tuple, Fraction]]:
        """``(a, r)`` pairs meaning ``<a, x> <= r``."""
        return list(self.constraints)

    def contains(self, x):
        if len(x) != self.dimension:
            return False
        xe = tuple(v if isinstance(v, Fraction) else Fraction(v) for v in x)
        return all(sum(a * v for a, v in zip(ai, xe)) <= r for ai, r in self.constraints)

    def _feasible(self, x) -> bool:
        return all(sum(a * v for a, v in zip(ai, x)) <= r for ai, r in self.constraints)

    def _vertices(self) -> tuple:
        n = self.dimension
        found = set()
        for combo in itertools.combinations(self.constraints, n):
            sol = solve([c[0] for c in combo], [c[1] for c in combo])
            if sol is not None and self._feasible(sol):
                found.add(sol)
        return tuple(sorted(found))

    # exact slice measure -------------------------------------------------

    def _slice_vertices(self, b: Fraction) -> set:
        n = self.dimension
        total = b - 1
        found = set()
        for combo in itertools.combinations(self.constraints, n - 1):
            rows = [c[0] for c in combo] + [self._ones]
            sol = solve(rows, [c[1] for c in combo] + [total])
            if sol is not None and self._feasible(sol):
                found.add(sol)
        return found

    def projected_measure(self, b: Fraction) -> Fraction:
        """Volume of the slice projected on the first ``n-1`` coordinates.

        The induced volume on the hyperplane is ``sqrt(n)`` times this value.
        """
        n = self.dimension
        if b > self.b_max:
            return Fraction(0)
        if n == 1:
            return Fraction(int(self._feasible((b - 1,))))
        if n == 2:
            lo, hi = b - 1, Fraction(0)
            for (a1, a2), r in self.constraints:
                # a1*s + a2*(b-1-s) <= r
                coef, rest = a1 - a2, r - a2 * (b - 1)
                if coef > 0:
                    hi = min(hi, rest / coef)
                elif coef < 0:
                    lo = max(lo, rest / coef)
                elif rest < 0:
                    return Fraction(0)
            return max(hi - lo, Fraction(0))
        verts = self._slice_vertices(b)
        pts = [v[: n - 1] for v in verts]
        if len(pts) < n:
            return Fraction(0)
        if n == 3:
            return _polygon_area(pts)
        return _polytope_volume(pts)

    def slice_volume(self, b) -> SliceValue:
        bf = b if isinstance(b, Fraction) else Fraction(b)
        q = self.projected_measure(bf)
        return SliceValue(float(bf), math.sqrt(self.dimension) * float(q), True, 0.0, q)

    # piecewise polynomial structure ---------------------------------------

    def _interpolate(self, bs: list) -> tuple:
        rows = [[b**j for j in range(self.dimension)] for b in bs]
        coeffs = solve(rows, [self.projected_measure(b) for b in bs])
        if coeffs is None:
            raise AssertionError("singular interpolation nodes")
        return coeffs

    def _pieces(self) -> tuple:
        """``(lo, hi, coeffs)`` with ``q(b) = sum coeffs[j] b^j`` on ``[lo, hi]``."""
        n = self.dimension
        out = []
        bounds = [None] + list(self.levels)
        for lo, hi in zip(bounds, bounds[1:]):
            if lo is None:
                nodes = [hi - k for k in range(1, n + 2)]
            else:
                nodes = [lo + (hi - lo) * Fraction(k, n + 2) for k in range(1, n + 2)]
            coeffs = self._interpolate(nodes[:n])
            check = nodes[n]
            if sum(c * check**j for j, c in enumerate(coeffs)) != self.projected_measure(check):
                raise AssertionError("slice volume is not polynomial between vertex levels")
            out.append((lo, hi, coeffs))
        return tuple(out)

    def local_expansion(self) -> LocalExpansion:
        """Leading term of ``g`` at ``b_max`` from the last polynomial piece."""
        n = self.dimension
        coeffs = self.pieces[-1][2]
        bm = self.b_max
        # re-expand q(bm - u) = sum d_j u^j
        d = [Fraction(0)] * n
        for j, c in enumerate(coeffs):
            for i in range(j + 1):
                d[i] += c * math.comb(j, i) * bm ** (j - i) * (-1) ** i
        j = next((i for i, v in enumerate(d) if v != 0), None)
        if j is None:
            return LocalExpansion(0.0, float(n - 1), float(bm))
        return LocalExpansion(math.sqrt(n) * float(d[j]), float(j), float(bm))

    def expansion_coefficients(self) -> tuple:
        """Exact ``d_j`` with ``q(b_max - u) = sum d_j u^j`` on the last piece."""
        n = self.dimension
        coeffs = self.pieces[-1][2]
        bm = self.b_max
        d = [Fraction(0)] * n
        for j, c in enumerate(coeffs):
            for i in range(j + 1):
                d[i] += c * math.comb(j, i) * bm ** (j - i) * (-1) ** i
        return tuple(d)

    def normalized_volume(self, t) -> float:
        """Closed form of ``I(t) = (-t)^n * int e^{-t b} q(b) db``.

        On each piece ``int e^{lam b} p(b) db = e^{lam b} sum_j (-1)^j p^(j)(b) / lam^(j+1)``;
        everything except the exponentials is exact rational.
        """
        lam = -Fraction(t)
        if lam <= 0:
            raise ValueError("t must be negative")
        n = self.dimension
        jumps: dict[Fraction, Fraction] = {}
        for lo, hi, coeffs in self.pieces:
            for end, sign in ((hi, 1), (lo, -1)):
                if end is None:
                    continue
                jumps[end] = jumps.get(end, Fraction(0)) + sign * _exp_antiderivative(coeffs, lam, end)
        total = 0.0
        for beta, r in sorted(jumps.items()):
            coef = lam**n * r
            if coef == 0:
                continue
            expo = float(lam * beta)
            if expo > 709.0:
                return math.inf
            total += float(coef) * (1.0 if beta == 0 else math.exp(expo))
        return total


def _exp_antiderivative(coeffs: Sequence[Fraction], lam: Fraction, b: Fraction) -> Fraction:
    """``sum_j (-1)^j p^(j)(b) / lam^(j+1)`` for ``p(b) = sum coeffs[k] b^k``."""
    out = Fraction(0)
    poly = list(coeffs)
    j = 0
    while poly:
        val = sum(c * b**k for k, c in enumerate(poly))
        out += (-1) ** j * val / lam ** (j + 1)
        poly = [k * c for k, c in enumerate(poly)][1:]
        j += 1
    return out


def _polygon_area(pts: list) -> Fraction:
    cx = sum(p[0] for p in pts) / len(pts)
    cy = sum(p[1] for p in pts) / len(pts)
    ordered = sorted(pts, key=lambda p: math.atan2(float(p[1] - cy), float(p[0] - cx)))
    area = Fraction(0)
    for (x1, y1), (x2, y2) in zip(ordered, ordered[1:] + ordered[:1]):
        area += x1 * y2 - x2 * y1
    return abs(area) / 2


def _polytope_volume(pts: list) -> Fraction:
    """Exact volume of ``conv(pts)`` using Qhull only for the combinatorics."""
    d = len(pts[0])
    base = pts[0]
    if rank([[a - b for a, b in zip(p, base)] for p in pts[1:]]) < d:
        return Fraction(0)
    try:
        hull = ConvexHull(np.array([[float(v) for v in p] for p in pts]))
    except QhullError:
        return Fraction(0)
    center = tuple(sum(p[i] for p in pts) / len(pts) for i in range(d))
    vol = Fraction(0)
    for simplex in hull.simplices:
        mat = [[pts[k][i] - center[i] for i in range(d)] for k in simplex]
        vol += abs(determinant(mat))
    return vol / math.factorial(d)


class HyperbolicPolar(PolarBody):
    """Polar of a hyperbolic hull, in flipped coordinates ``u = -x1, v = -x2``.

    ``(u, v)`` is in the polar iff ``A*u >= 1``, ``A*v >= 1`` and
    ``u*x + v*c/x >= 1`` for every arc abscissa ``x``; on the tangency part
    this is ``u*v >= 1/(4c)``.
    """

    def __init__(self, body: HyperbolicHullBody):
        super().__init__(body)
        self.b_max = float(self.b_max)
        self._c = float(body.c)
        self._a = float(body.anchor)
        self._hi_u = float(body.x_hi)
        self._hi_v = float(body.c / body.x_lo)

    @property
    def exact(self) -> bool:
        return True

    def _lower(self, m: float, window: float) -> float:
        c = self._c
        disc = m * m * c * c - c
        if disc <= 0:
            return math.inf
        x = min(m * c + math.sqrt(disc), window)
        if x * x <= c:
            return math.inf
        return max(1.0 / self._a, (x - m * c) / (x * x - c))

    def slice_bounds(self, b: float) -> Optional[tuple[float, float]]:
        """``[u_lo, u_hi]`` of the slice on ``u + v = 1 - b``; None when empty."""
        m = 1.0 - b
        u_lo = self._lower(m, self._hi_u)
        v_lo = self._lower(m, self._hi_v)
        if not math.isfinite(u_lo) or not math.isfinite(v_lo) or u_lo + v_lo >= m:
            return None
        return u_lo, m - v_lo

    def slice_volume(self, b) -> SliceValue:
        b = float(b)
        bounds = self.slice_bounds(b)
        g = 0.0 if bounds is None else math.sqrt(2.0) * (bounds[1] - bounds[0])
        return SliceValue(b, g, True, 0.0)

    def local_expansion(self) -> LocalExpansion:
        # tangency regime near b_max: length sqrt(m^2 - 1/c) with m = 1 - b
        c = self._c
        m0 = 1.0 / math.sqrt(c)
        return LocalExpansion(math.sqrt(2.0) * math.sqrt(2.0 * m0), 0.5, self.b_max)

    def breakpoints(self) -> list[float]:
        """b values where the active constraint set of the slice changes."""
        c, a = self._c, self._a
        out = []
        for w in (self._hi_u, self._hi_v):
            m_tan = (w * w + c) / (2.0 * c * w)  # tangency point leaves the arc window
            m_anchor = (w - (w * w - c) / a) / c  # endpoint constraint meets the anchor
            out += [1.0 - m_tan, 1.0 - m_anchor]
        return sorted(b for b in out if b < self.b_max)

    def normalized_volume(self, t) -> float:
        lam = -float(t)
        if lam <= 0:
            raise ValueError("t must be negative")
        n = 2
        bm = self.b_max
        # int_{-inf}^{bm} e^{lam b} g(b) db = e^{lam bm}/lam * int_0^inf e^{-s} g(bm - s/lam) ds
        pts = sorted(lam * (bm - b) for b in self.breakpoints())
        pts = [p for p in pts if 0 < p < 60.0]

        def f(s):
            return math.exp(-s) * self.slice_volume(bm - s / lam).g

        head, _ = integrate.quad(f, 0.0, 60.0, points=pts or None, limit=400, epsabs=0.0, epsrel=1e-12)
        tail, _ = integrate.quad(f, 60.0, math.inf, limit=200, epsabs=0.0, epsrel=1e-10)
        scale = lam ** (n - 1) / math.sqrt(n)
        return scale * math.exp(lam * bm) * (head + tail)


class NumericPolar(PolarBody):
    """Polar of an oracle body: root-finding slices in the plane, Monte Carlo above."""

    def __init__(self, body: OracleBody, *, samples: int = 20000, seed: int = 0):
        super().__init__(body)
        self.samples = samples
        self.seed = seed
        self._endpoints: dict[float, tuple] = {}

    def slice_endpoints(self, b: float) -> Optional[tuple[np.ndarray, np.ndarray]]:
        """Boundary points of the planar slice ``{x1 + x2 = b - 1}``."""
        if self.dimension != 2:
            raise ValueError("endpoints are only available in the plane")
        total = float(b) - 1.0
        body = self.body

        def h(s: float) -> float:
            return body.support_value((s, total - s)) + 1.0

        res = optimize.minimize_scalar(h, bounds=(total, 0.0), method="bounded", options={"xatol": 1e-14})
        s_star = float(res.x)
        if res.fun > 0:
            return None
        lo = optimize.brentq(h, total, s_star, xtol=1e-15, rtol=1e-15) if h(total) > 0 else total
        hi = optimize.brentq(h, s_star, 0.0, xtol=1e-15, rtol=1e-15) if h(0.0) > 0 else 0.0
        return np.array([lo, total - lo]), np.array([hi, total - hi])

    def slice_volume(self, b) -> SliceValue:
        b = float(b)
        if self.dimension == 1:
            return SliceValue(b, float(b - 1.0 <= -1.0 / float(self.body.axis_intercepts()[0])), False)
        if self.dimension == 2:
            ends = self.slice_endpoints(b)
            g = 0.0 if ends is None else math.sqrt(2.0) * float(ends[1][0] - ends[0][0])
            return SliceValue(b, g, False, 0.0)
        return self._mc_slice(b)

    def _mc_slice(self, b: float) -> SliceValue:
        n = self.dimension
        inv_a = 1.0 / np.asarray([float(a) for a in self.body.axis_intercepts()])
        size = 1.0 - b - inv_a.sum()
        if size <= 0:
            return SliceValue(b, 0.0, False, 0.0)
        rng = np.random.default_rng([self.seed, int(abs(b) * 2**52) & 0xFFFFFFFF])
        y = rng.dirichlet(np.ones(n), size=self.samples) * size
        x = -inv_a - y
        hits = self.body.support_batch(x) <= -1.0
        p = hits.mean()
        vol = _simplex_measure(n, size)
        return SliceValue(b, vol * p, False, vol * math.sqrt(p * (1.0 - p) / self.samples))


def polar(body: NewtonBody) -> PolarBody:
    if isinstance(body, PolyhedralNewtonBody):
        return PolyhedralPolar(body)
    if isinstance(body, HyperbolicHullBody):
        return HyperbolicPolar(body)
    if isinstance(body, OracleBody):
        return NumericPolar(body)
    raise TypeError(f"unsupported body type {type(body).__name__}")


def slice_volume(pol: PolarBody, b) -> SliceValue:
    if b > 0:
        raise ValueError("slices are only defined for b <= 0")
    return pol.slice_volume(b)


def slice_profile(pol: PolarBody, grid: Sequence[float] = DEFAULT_B_GRID, *, include_zero: bool = True) -> SliceProfile:
    bs = sorted(set(float(b) for b in grid) | ({0.0} if include_zero else set()))
    points = tuple(pol.slice_volume(Fraction(b) if pol.exact and isinstance(pol, PolyhedralPolar) else b) for b in bs)
    expansion = None
    if pol.exact and pol.b_max == 0:
        expansion = pol.local_expansion()
    return SliceProfile(pol.dimension, points, expansion)


def asymptotic_slope(pol: PolarBody, b_far: float = -1e6) -> float:
    """Slope of ``h`` far out, ``(h(b1) - h(b2)) / (b1 - b2)`` with ``b2 = 2 b1``."""
    k = pol.dimension - 1
    b1, b2 = b_far, 2.0 * b_far
    g1, g2 = pol.slice_volume(b1).g, pol.slice_volume(b2).g
    return (-(g1 ** (1.0 / k)) + g2 ** (1.0 / k)) / (b1 - b2)


def c_n(n: int) -> float:
    """``(sqrt(n)/(n-1)!)^(1/(n-1))``: the slope limit when the polar contains a shifted orthant."""
    return (math.sqrt(n) / math.factorial(n - 1)) ** (1.0 / (n - 1))


# ---------------------------------------------------------------------------
# The limit L
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class LimitResult:
    value: float
    classification: str  # "finite" | "infinite" | "inconclusive"
    exponent: Optional[float] = None
    r_squared: Optional[float] = None
    method: str = "numeric"


def _loglog_fit(xs: Sequence[float], ys: Sequence[float]) -> tuple[float, float]:
    lx, ly = np.log(np.asarray(xs)), np.log(np.asarray(ys))
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(((ly - ly.mean()) ** 2).sum())
    r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
    return float(slope), r2


def classify_growth(bs: Sequence[float], ratios: Sequence[float], errs: Sequence[float]) -> LimitResult:
    """Classify a nondecreasing sequence ``ratios`` sampled as ``b -> 0-``."""
    for k in range(1, len(ratios)):
        if ratios[k] < ratios[k - 1] - (3.0 * (errs[k] + errs[k - 1]) + 1e-9 * abs(ratios[k - 1])):
            raise ProfileError(f"h(b)/b decreases between b={bs[k - 1]:g} and b={bs[k]:g}: measurement noise")
    last = ratios[-1]
    tail = min(8, len(ratios))
    slope, r2 = _loglog_fit([-b for b in bs[-tail:]], ratios[-tail:])
    if last > DIVERGENCE_CAP:
        return LimitResult(math.inf, "infinite", -slope, r2)
    if abs(last - ratios[-2]) <= STABILIZATION_TOL * abs(last):
        return LimitResult(last, "finite")
    if -slope > 0 and r2 > FIT_R2:
        return LimitResult(math.inf, "infinite", -slope, r2)
    return LimitResult(last, "inconclusive", -slope, r2)


def limit_L(profile: SliceProfile) -> LimitResult:
    """``L = lim_{b->0-} h(b)/b`` where ``h(b) = -g(b)^(1/(n-1))``."""
    n = profile.dimension
    if n < 2:
        raise ProfileError("L is defined for n >= 2")
    g0 = profile.g0
    if g0 is not None and g0.g > 0 and (g0.exact or g0.g > 3 * g0.stderr):
        raise ProfileError("g(0) > 0; L is only defined when g(0) = 0")
    if profile.expansion is not None:
        e = profile.expansion
        k = n - 1
        if e.exponent >= k:
            return LimitResult(e.coefficient ** (1.0 / k), "finite", method="analytic")
        return LimitResult(math.inf, "infinite", 1.0 - e.exponent / k, 1.0, method="analytic")
    pts = [p for p in profile.points if p.b < 0]
    if len(pts) < 8:
        raise ProfileError("limit_L needs at least 8 negative b values")
    k = n - 1
    bs = [p.b for p in pts]
    ratios = [p.g ** (1.0 / k) / (-p.b) for p in pts]
    errs = [
        (p.stderr / k) * p.g ** (1.0 / k - 1.0) / (-p.b) if p.g > 0 and p.stderr > 0 else 0.0
        for p in pts
    ]
    return classify_growth(bs, ratios, errs)


# ---------------------------------------------------------------------------
# Cone condition
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class ConeResult:
    holds: Optional[bool]
    theta_sup: float
    apex: Optional[tuple] = None
    violating: Optional[tuple] = None
    method: str = "exact"


def _angle_to_diagonal(d: Sequence[float]) -> float:
    d = np.asarray([float(v) for v in d])
    cosv = d.sum() / (np.linalg.norm(d) * math.sqrt(len(d)))
    return math.acos(max(-1.0, min(1.0, cosv)))


def cone_condition(pol: PolarBody, eps: float) -> ConeResult:
    """Search for an apex ``v`` on ``{sum = -1}`` seeing ``P°`` within ``pi/2 - eps``."""
    if not 0 < eps < math.pi / 2:
        raise ValueError("eps must lie in (0, pi/2)")
    res = _cone_geometry(pol)
    if res.holds is None:
        return res
    holds = res.theta_sup < math.pi / 2 - eps
    return ConeResult(holds, res.theta_sup, res.apex, None if holds else res.violating, res.method)


def _cone_geometry(pol: PolarBody) -> ConeResult:
    """Apex and supremal angle, before comparing against any ``eps``."""
    if pol.b_max != 0:
        raise ValueError("cone condition needs (1,...,1) on the boundary of P")
    n = pol.dimension
    if isinstance(pol, PolyhedralPolar):
        top = [w for w in pol.vertices if sum(w) == -1]
        if len(top) > 1:
            return ConeResult(False, math.pi / 2, top[0], top[1])
        v = top[0]
        gens = [(tuple(a - b for a, b in zip(v, w)), w) for w in pol.vertices if w != v]
        gens += [
            (tuple(Fraction(int(i == j)) for j in range(n)), tuple(v[j] - int(i == j) for j in range(n)))
            for i in range(n)
        ]
        angles = [(_angle_to_diagonal(d), x) for d, x in gens]
        theta, worst = max(angles, key=lambda t: t[0])
        return ConeResult(True, theta, v, worst)
    if isinstance(pol, HyperbolicPolar):
        apex = (-0.5, -0.5)
        return ConeResult(False, math.pi / 2, apex, apex, method="analytic")
    if isinstance(pol, NumericPolar) and n == 2:
        return _sampled_cone(pol)
    return ConeResult(None, math.nan, method="unavailable")


def _hyperbolic_violator(pol: HyperbolicPolar, eps: float) -> tuple:
    u = 0.75
    apex = np.array([-0.5, -0.5])
    for _ in range(200):
        x = np.array([-u, -1.0 / (4.0 * u)])
        if _angle_to_diagonal(apex - x) > math.pi / 2 - eps:
            return tuple(x)
        u = 0.5 + 0.5 * (u - 0.5)
    raise AssertionError("no violating point found")


def _sampled_cone(pol: NumericPolar) -> ConeResult:
    normals = pol.body.diagonal_normals()
    apex = -np.asarray(normals.normals[0], dtype=float)
    if not normals.unique:
        return ConeResult(False, math.pi / 2, tuple(apex), tuple(-np.asarray(normals.normals[1])), method="sampled")
    bs, tans, pts = [], [], []
    for b in DEFAULT_B_GRID:
        ends = pol.slice_endpoints(b)
        if ends is None:
            continue
        best = 0.0
        for x in ends:
            d = apex - x
            par = d.sum() / math.sqrt(2.0)
            perp = abs(d[0] - d[1]) / math.sqrt(2.0)
            best = max(best, perp / par)
            pts.append(tuple(x))
        bs.append(b)
        tans.append(best)
    order = np.argsort(bs)
    bs = [bs[i] for i in order]
    tans = [tans[i] for i in order]
    # numeric slice endpoints carry ~1e-12 absolute error
    errs = [1e-12 / max(-b, 1e-300) for b in bs]
    try:
        cls = classify_growth(bs, tans, errs)
    except ProfileError:
        return ConeResult(None, math.nan, tuple(apex), method="sampled")
    if cls.classification == "finite":
        return ConeResult(True, math.atan(max(tans)), tuple(apex), pts[-1], method="sampled")
    if cls.classification == "infinite":
        return ConeResult(False, math.pi / 2, tuple(apex), pts[-1], method="sampled")
    return ConeResult(None, math.atan(max(tans)), tuple(apex), method="sampled")


def cone_violation(pol: PolarBody, eps: float) -> Optional[tuple]:
    """A point of ``P°`` whose angle from the apex exceeds ``pi/2 - eps``, if any."""
    res = cone_condition(pol, eps)
    if res.holds:
        return None
    if isinstance(pol, HyperbolicPolar):
        return _hyperbolic_violator(pol, eps)
    return res.violating


# ---------------------------------------------------------------------------
# Verdict
# ---------------------------------------------------------------------------


class Outcome(str, enum.Enum):
    NON_SINGULAR = "NonSingular"
    SINGULAR = "Singular"
    INTEGRABLE_LOCUS = "IntegrableLocus"


class Reason(str, enum.Enum):
    G0_POSITIVE = "g0_positive"
    L_INFINITE = "L_infinite"
    CORNER = "corner"
    LCT_BELOW_ONE = "lct_below_one"


@dataclass(frozen=True)
class SingularityVerdict:
    outcome: Outcome
    reason: Optional[Reason] = None
    facet_normal: Optional[tuple] = None
    evidence: dict = field(default_factory=dict)
    routes: dict = field(default_factory=dict)

    @property
    def routes_agreed(self) -> tuple:
        return tuple(k for k, v in self.routes.items() if v != "unavailable")

    @property
    def singular(self) -> bool:
        return self.outcome is Outcome.SINGULAR


def _compare_to_one(c0) -> int:
    if isinstance(c0, Fraction):
        return (c0 > 1) - (c0 < 1)
    if abs(c0 - 1.0) <= 1e-9:
        return 0
    return 1 if c0 > 1 else -1


def verdict(body: NewtonBody, *, grid: Sequence[float] = DEFAULT_B_GRID) -> SingularityVerdict:
    """Decide whether the Ohsawa norm of the toric function of ``body`` is singular at 0.

    Decision order: the lct against 1, then ``g(0)``, then the three
    equivalent routes (facet model, finiteness of ``L``, cone condition).
    Any disagreement between decisive routes raises :class:`RouteDisagreement`.
    """
    if not body.has_bounded_complement:
        raise BodyError("verdict needs a body whose complement in the orthant is bounded")
    lres = lct(body)
    evidence: dict = {"c0": lres.c0}
    side = _compare_to_one(lres.c0)
    if side < 0:
        return SingularityVerdict(Outcome.SINGULAR, Reason.LCT_BELOW_ONE, evidence=evidence, routes={"lct": "singular"})
    if side > 0:
        return SingularityVerdict(Outcome.INTEGRABLE_LOCUS, evidence=evidence, routes={"lct": "integrable"})
    n = body.dimension
    if n == 1:
        return SingularityVerdict(Outcome.NON_SINGULAR, facet_normal=(1,), evidence=evidence, routes={"dimension_one": "non_singular"})

    pol = polar(body)
    model = body.local_boundary_model(body.diagonal_point())
    evidence["local_model"] = type(model).__name__
    if isinstance(model, Facet):
        facet_route = "non_singular"
        evidence["facet"] = model.normal
    elif isinstance(model, (Corner, Curved)):
        facet_route = "singular"
        if isinstance(model, Corner):
            evidence["corner_normals"] = model.normals
        else:
            evidence["curvature"] = model.curvature
    else:
        facet_route = "unavailable"

    g0 = pol.slice_volume(Fraction(0) if isinstance(pol, PolyhedralPolar) else 0.0)
    evidence["g0"] = g0.g
    g0_positive = g0.g > 0 if g0.exact else g0.g > max(3.0 * g0.stderr, 1e-9)
    if g0_positive:
        routes = {"g0": "singular", "facet": facet_route}
        if facet_route == "non_singular":
            raise RouteDisagreement(f"g(0) = {g0.g} > 0 but the boundary is a facet near the diagonal point")
        return SingularityVerdict(Outcome.SINGULAR, Reason.G0_POSITIVE, evidence=evidence, routes=routes)

    profile = slice_profile(pol, grid)
    try:
        lim = limit_L(profile)
        l_route = {"finite": "non_singular", "infinite": "singular"}.get(lim.classification, "unavailable")
        evidence["L"] = lim.value
        if lim.exponent is not None:
            evidence["L_exponent"] = lim.exponent
    except ProfileError as exc:
        l_route = "unavailable"
        evidence["L_error"] = str(exc)

    cone = _cone_geometry(pol)
    cone_route = {True: "non_singular", False: "singular", None: "unavailable"}[cone.holds]
    evidence["cone_theta_sup"] = cone.theta_sup
    if cone.apex is not None:
        evidence["cone_apex"] = cone.apex

    routes = {"facet": facet_route, "L": l_route, "cone": cone_route}
    decided = {v for v in routes.values() if v != "unavailable"}
    if len(decided) > 1:
        raise RouteDisagreement(f"singularity routes disagree: {routes}")
    if not decided:
        raise VerdictError(f"no route could decide the verdict: {routes}")
    if decided == {"non_singular"}:
        if isinstance(model, Facet):
            normal = model.normal
        elif cone.apex is not None:
            normal = tuple(-v for v in cone.apex)
        else:
            normal = lc_places(body).places[0]
        return SingularityVerdict(Outcome.NON_SINGULAR, facet_normal=normal, evidence=evidence, routes=routes)
    reason = Reason.CORNER if isinstance(model, Corner) else Reason.L_INFINITE
    return SingularityVerdict(Outcome.SINGULAR, reason, evidence=evidence, routes=routes)


def independent_routes(body: NewtonBody, *, grid: Sequence[float] = DEFAULT_B_GRID) -> dict:
    """Evaluate every singularity route separately, without the ``g(0)`` shortcut.

    Returns ``{"facet", "L_analytic", "L_numeric", "cone"}`` mapped to
    ``"singular"``, ``"non_singular"`` or ``"unavailable"``.  Needs ``c0 = 1``.
    """
    if _compare_to_one(lct(body).c0) != 0:
        raise ValueError("routes are only defined when c0 = 1")
    pol = polar(body)
    model = body.local_boundary_model(body.diagonal_point())
    if isinstance(model, Facet):
        facet = "non_singular"
    elif isinstance(model, (Corner, Curved)):
        facet = "singular"
    else:
        facet = "unavailable"
    out = {"facet": facet}
    to_route = {"finite": "non_singular", "infinite": "singular"}
    profile = slice_profile(pol, grid, include_zero=False)
    for name, prof in (
        ("L_analytic", profile),
        ("L_numeric", SliceProfile(profile.dimension, profile.points, None)),
    ):
        if name == "L_analytic" and prof.expansion is None:
            out[name] = "unavailable"
            continue
        try:
            out[name] = to_route.get(limit_L(prof).classification, "unavailable")
        except ProfileError:
            out[name] = "unavailable"
    holds = _cone_geometry(pol).holds
    out["cone"] = {True: "non_singular", False: "singular", None: "unavailable"}[holds]
    return out


# ---------------------------------------------------------------------------
# Export
# ---------------------------------------------------------------------------


def write_profile_csv(profile: SliceProfile, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["b", "g_b", "exact_flag", "stderr"])
        for p in profile.points:
            writer.writerow([repr(float(p.b)), repr(float(p.g)), int(p.exact), "" if p.exact else repr(float(p.stderr))])
