"""Newton convex bodies, their support functions and local boundary models.

A Newton convex body is a closed convex ``P`` inside the nonnegative orthant
with ``P + R^n_{>=0} = P``.  Three concrete kinds are provided:

* :class:`PolyhedralNewtonBody` -- ``conv(generators) + orthant`` handled in
  exact rational arithmetic.
* :class:`HyperbolicHullBody` -- planar hull of an arc of ``x*y = c`` and two
  axis anchors; the boundary is exactly the hyperbola near the diagonal.
* :class:`OracleBody` -- any body given by a membership predicate.

The induced toric psh function is ``Psi(z) = h_P(log|z_1|^2, ..., log|z_n|^2)``
with ``h_P(y) = sup_{a in P} <a, y>`` on the closed negative orthant.
"""

from __future__ import annotations

import abc
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy import optimize

from ._rational import exact_sqrt, exact_vector, fraction_str, parse_number, rank, solve

Number = Union[Fraction, float]

#: Absolute tolerance of the numeric support supremum for oracle bodies.
ORACLE_SUPPORT_TOL = 1e-9
#: Absolute tolerance of bisection for diagonal / axis entry points.
BISECTION_TOL = 1e-12


class BodyError(ValueError):
    """Invalid body, or an operation whose precondition the body violates."""


@dataclass(frozen=True)
class Hyperplane:
    """``{x : <normal, x> = offset}`` with ``normal >= 0`` and ``sum(normal) == 1``.

    As an inequality it reads ``<normal, x> >= offset`` on the body side.
    """

    normal: tuple
    offset: Number

    def __post_init__(self):
        if any(a < 0 for a in self.normal):
            raise BodyError(f"hyperplane normal {self.normal} has a negative entry")
        total = sum(self.normal)
        if isinstance(total, Fraction):
            if total != 1:
                raise BodyError(f"hyperplane normal {self.normal} is not normalized")
        elif abs(total - 1.0) > 1e-12:
            raise BodyError(f"hyperplane normal {self.normal} is not normalized")

    def value(self, x: Sequence) -> Number:
        return sum(a * xi for a, xi in zip(self.normal, x)) - self.offset

    def to_json(self) -> dict:
        return {"normal": [_num_json(a) for a in self.normal], "offset": _num_json(self.offset)}


# Local boundary models ------------------------------------------------------


@dataclass(frozen=True)
class Facet:
    normal: tuple
    radius: float


@dataclass(frozen=True)
class Curved:
    curvature: float
    radius: float


@dataclass(frozen=True)
class Corner:
    normals: tuple


@dataclass(frozen=True)
class Probed:
    samples: tuple
    normal_estimate: tuple


LocalBoundaryModel = Union[Facet, Curved, Corner, Probed]


@dataclass(frozen=True)
class DiagonalNormals:
    """Supporting hyperplane normals of ``P`` at its diagonal entry point."""

    normals: tuple
    unique: bool
    exact: bool


def _num_json(x):
    if isinstance(x, Fraction):
        return fraction_str(x)
    return float(x)


def _as_float_vector(x: Sequence) -> np.ndarray:
    return np.asarray([float(v) for v in x], dtype=float)


class NewtonBody(abc.ABC):
    """Common interface of all Newton convex bodies."""

    kind: str = ""
    dimension: int

    #: True when every parameter of the body is an exact rational.
    exact: bool = True

    # -- primitives implemented per kind -------------------------------------

    @abc.abstractmethod
    def _support(self, y: Sequence) -> Number:
        """``h_P(y)`` for ``y`` in the closed negative orthant (finite entries)."""

    @abc.abstractmethod
    def _support_extended(self, y: Sequence[float]) -> float:
        """``h_P(y)`` where entries may be ``-inf``; ``0 * -inf`` counts as 0."""

    @abc.abstractmethod
    def support_batch(self, ys: np.ndarray) -> np.ndarray:
        """Vectorized ``h_P`` on an ``(N, n)`` array of nonpositive points."""

    @abc.abstractmethod
    def _contains(self, x: Sequence) -> bool: ...

    @abc.abstractmethod
    def diagonal_entry(self) -> Number:
        """``kappa = inf{t > 0 : t*(1,...,1) in P}``."""

    @abc.abstractmethod
    def min_linear(self, alpha: Sequence) -> Number:
        """``inf_{x in P} <x, alpha>`` for ``alpha >= 0``."""

    @abc.abstractmethod
    def axis_intercepts(self) -> tuple:
        """``a_i = inf{s : s*e_i in P}`` (``inf`` when the axis never enters)."""

    @abc.abstractmethod
    def local_boundary_model(self, base: Sequence, radius_hint: float = 1.0) -> LocalBoundaryModel: ...

    @abc.abstractmethod
    def diagonal_normals(self) -> DiagonalNormals: ...

    @abc.abstractmethod
    def to_spec(self) -> dict: ...

    # -- shared API ----------------------------------------------------------

    @property
    def has_bounded_complement(self) -> bool:
        return all(math.isfinite(float(a)) for a in self.axis_intercepts())

    def _check_dim(self, x: Sequence) -> None:
        if len(x) != self.dimension:
            raise BodyError(f"expected a point of dimension {self.dimension}, got {len(x)}")

    def support_value(self, y: Sequence) -> Number:
        self._check_dim(y)
        if any(not math.isfinite(float(v)) for v in y):
            raise BodyError("support_value needs finite coordinates")
        if any(v > 0 for v in y):
            raise BodyError(f"support function is evaluated on the negative orthant; got {tuple(y)}")
        return self._support(y)

    def contains(self, x: Sequence) -> bool:
        self._check_dim(x)
        if any(v < 0 for v in x):
            return False
        return self._contains(x)

    def psi_eval(self, moduli: Sequence[float]) -> float:
        """``Psi(z) = h_P(log|z_1|^2, ..., log|z_n|^2)`` from the moduli ``|z_i|``."""
        self._check_dim(moduli)
        y = []
        for r in moduli:
            r = float(r)
            if not 0.0 <= r < 1.0:
                raise BodyError(f"modulus {r} is outside the open unit polydisc")
            y.append(-math.inf if r == 0.0 else 2.0 * math.log(r))
        return float(self._support_extended(y))

    def diagonal_point(self) -> tuple:
        k = self.diagonal_entry()
        return tuple(k for _ in range(self.dimension))


# ---------------------------------------------------------------------------
# Polyhedral bodies
# ---------------------------------------------------------------------------


def _enumerate_facets(gens: Sequence[tuple], n: int) -> list[Hyperplane]:
    """All facets ``<a, x> >= s`` (``s > 0``) of ``conv(gens) + orthant``.

    A facet hyperplane contains ``n`` affinely independent elements drawn from
    the generators and the recession directions ``e_i`` (those with ``a_i = 0``),
    so it suffices to try every such choice and keep the valid ones.
    """
    found: dict[tuple, Fraction] = {}
    for nzero in range(n):
        k = n - nzero
        if k > len(gens):
            continue
        for zeros in itertools.combinations(range(n), nzero):
            free = [i for i in range(n) if i not in zeros]
            for combo in itertools.combinations(gens, k):
                g0 = combo[0]
                rows = [[g[i] - g0[i] for i in free] for g in combo[1:]]
                rows.append([Fraction(1)] * k)
                sol = solve(rows, [Fraction(0)] * (k - 1) + [Fraction(1)])
                if sol is None or any(a < 0 for a in sol):
                    continue
                alpha = [Fraction(0)] * n
                for i, a in zip(free, sol):
                    alpha[i] = a
                alpha = tuple(alpha)
                s = sum(a * x for a, x in zip(alpha, g0))
                if s <= 0 or alpha in found:
                    continue
                if all(sum(a * x for a, x in zip(alpha, g)) >= s for g in gens):
                    found[alpha] = s
    return [Hyperplane(a, s) for a, s in sorted(found.items())]


class PolyhedralNewtonBody(NewtonBody):
    """``P = conv(generators) + R^n_{>=0}`` with exact rational data.

    Redundant generators (those that are not vertices of ``P``) are dropped
    at construction; the facet description is computed once and cached.
    """

    kind = "polyhedral"

    def __init__(self, generators: Sequence[Sequence], *, require_bounded_complement: bool = True):
        if not generators:
            raise BodyError("a polyhedral body needs at least one generator")
        parsed = []
        exact = True
        for g in generators:
            row = []
            for v in g:
                frac, ok = parse_number(v)
                exact &= ok
                row.append(frac)
            parsed.append(tuple(row))
        n = len(parsed[0])
        if n < 1 or any(len(g) != n for g in parsed):
            raise BodyError("generators must share a common dimension >= 1")
        if any(v < 0 for g in parsed for v in g):
            raise BodyError("generators must lie in the nonnegative orthant")
        unique = sorted(set(parsed))
        facets = _enumerate_facets(unique, n)
        vertices = tuple(g for g in unique if self._is_vertex(g, facets, n))
        self.dimension = n
        self.exact = exact
        self.generators = vertices
        self._facets = tuple(facets)
        self._gen_array = np.array([[float(v) for v in g] for g in vertices], dtype=float)
        self._axis = tuple(
            min((g[i] for g in vertices if all(g[j] == 0 for j in range(n) if j != i)), default=math.inf)
            for i in range(n)
        )
        if require_bounded_complement and not self.has_bounded_complement:
            raise BodyError(
                "the complement of P in the orthant is unbounded (some axis has no generator); "
                "the singularity at 0 would not be isolated"
            )

    @staticmethod
    def _is_vertex(g: tuple, facets: Sequence[Hyperplane], n: int) -> bool:
        active = [h.normal for h in facets if h.value(g) == 0]
        active += [tuple(Fraction(int(i == j)) for j in range(n)) for i in range(n) if g[i] == 0]
        return rank(active) == n

    def __repr__(self) -> str:
        gens = ", ".join("(" + ", ".join(fraction_str(v) for v in g) + ")" for g in self.generators)
        return f"PolyhedralNewtonBody([{gens}])"

    def facet_description(self) -> list[Hyperplane]:
        return list(self._facets)

    def facets_through(self, x: Sequence) -> list[Hyperplane]:
        xe = exact_vector(x)
        if xe is None:
            xe = tuple(Fraction(float(v)) for v in x)
        return [h for h in self._facets if h.value(xe) == 0]

    def _support(self, y):
        ye = exact_vector(y)
        if ye is not None:
            return max(sum(a * b for a, b in zip(g, ye)) for g in self.generators)
        return float(np.max(self._gen_array @ _as_float_vector(y)))

    def _support_extended(self, y):
        best = -math.inf
        for g in self.generators:
            total = 0.0
            for gi, yi in zip(g, y):
                if gi != 0:
                    total += float(gi) * yi
            best = max(best, total)
        return best

    def support_batch(self, ys):
        ys = np.asarray(ys, dtype=float)
        return np.max(ys @ self._gen_array.T, axis=1)

    def _contains(self, x):
        xe = exact_vector(x)
        if xe is None:
            xe = tuple(Fraction(float(v)) for v in x)
        return all(h.value(xe) >= 0 for h in self._facets)

    def diagonal_entry(self) -> Fraction:
        if not self._facets:
            raise BodyError("P is the whole orthant; the diagonal enters at t = 0")
        # t*1 satisfies <a, t*1> = t >= s for every facet since sum(a) = 1.
        return max(h.offset for h in self._facets)

    def min_linear(self, alpha):
        ae = exact_vector(alpha)
        if ae is not None:
            return min(sum(a * b for a, b in zip(g, ae)) for g in self.generators)
        return float(np.min(self._gen_array @ _as_float_vector(alpha)))

    def axis_intercepts(self):
        return self._axis

    def local_boundary_model(self, base, radius_hint=1.0):
        self._check_dim(base)
        be = exact_vector(base)
        if be is None:
            be = tuple(Fraction(float(v)) for v in base)
        if not self.contains(be):
            raise BodyError(f"{tuple(base)} is not in P")
        n = self.dimension
        tight = [h for h in self._facets if h.value(be) == 0]
        coord_tight = [i for i in range(n) if be[i] == 0]
        if not tight and not coord_tight:
            raise BodyError(f"{tuple(base)} is an interior point of P")
        if len(tight) + len(coord_tight) >= 2:
            normals = [h.normal for h in tight]
            normals += [tuple(Fraction(int(i == j)) for j in range(n)) for i in coord_tight]
            return Corner(tuple(sorted(normals)))
        if coord_tight:
            i = coord_tight[0]
            normal = tuple(Fraction(int(i == j)) for j in range(n))
        else:
            normal = tight[0].normal
        # Half the distance to the nearest other supporting hyperplane.
        dists = []
        for h in self._facets:
            if h.normal == normal:
                continue
            norm = math.sqrt(sum(float(a) ** 2 for a in h.normal))
            dists.append(float(h.value(be)) / norm)
        dists += [float(v) for v in be if v > 0]
        radius = min([float(radius_hint)] + [0.5 * d for d in dists if d > 0])
        return Facet(normal, radius)

    def diagonal_normals(self):
        tight = self.facets_through(self.diagonal_point())
        return DiagonalNormals(tuple(h.normal for h in tight), len(tight) == 1, True)

    def to_spec(self):
        return {
            "dimension": self.dimension,
            "kind": self.kind,
            "generators": [[fraction_str(v) for v in g] for g in self.generators],
        }

    def scaled(self, factor) -> "PolyhedralNewtonBody":
        f, _ = parse_number(factor)
        return PolyhedralNewtonBody(
            [[v * f for v in g] for g in self.generators],
            require_bounded_complement=self.has_bounded_complement,
        )


# ---------------------------------------------------------------------------
# Hyperbolic hull bodies
# ---------------------------------------------------------------------------


class HyperbolicHullBody(NewtonBody):
    """Planar hull of the arc ``{x*y = c : x_lo <= x <= x_hi}`` and ``(A,0), (0,A)``.

    The lower boundary, read left to right, is the chord from ``(0, A)`` to
    the arc's left end, the arc itself, the chord to ``(A, 0)`` and the axis.
    The arc is part of the boundary as long as both chords leave it no
    steeper than its tangent, i.e. ``A >= 2*max(x_hi, c/x_lo)``.
    """

    kind = "hyperbolic_hull"
    dimension = 2

    def __init__(self, c, x_range: Sequence, anchor):
        (self.c, ec), (self.x_lo, el), (self.x_hi, eh), (self.anchor, ea) = (
            parse_number(c),
            parse_number(x_range[0]),
            parse_number(x_range[1]),
            parse_number(anchor),
        )
        self.exact = ec and el and eh and ea
        c, lo, hi, a = self.c, self.x_lo, self.x_hi, self.anchor
        if c <= 0:
            raise BodyError("arc level c must be positive")
        if not (0 < lo and lo * lo < c < hi * hi):
            raise BodyError("arc range must satisfy 0 < x_lo < sqrt(c) < x_hi")
        if a < 2 * hi or a < 2 * (c / lo):
            raise BodyError(
                f"anchor A={fraction_str(a)} must be >= 2*max(x_hi, c/x_lo) so the chords do not cut the arc"
            )
        self._check_arc_window()
        self._cf, self._lof, self._hif, self._af = float(c), float(lo), float(hi), float(a)

    def _check_arc_window(self, samples: int = 257) -> None:
        # Every arc point must be supported by its tangent line with both anchors
        # on the body side: tangent at x0 is c*x/x0^2 + y = 2c/x0.
        c, lo, hi, a = self.c, self.x_lo, self.x_hi, self.anchor
        for k in range(samples):
            x0 = lo + (hi - lo) * Fraction(k, samples - 1)
            if c * a / (x0 * x0) < 2 * c / x0 or a < 2 * c / x0:
                raise BodyError(f"anchor cuts the arc near x = {float(x0):.6g}")

    def __repr__(self) -> str:
        return (
            f"HyperbolicHullBody(c={fraction_str(self.c)}, range=[{fraction_str(self.x_lo)}, "
            f"{fraction_str(self.x_hi)}], A={fraction_str(self.anchor)})"
        )

    # arc helpers
    def _arc_opt(self, w1: float, w2: float) -> float:
        """Arc abscissa minimizing ``w1*x + w2*c/x`` (``w >= 0``)."""
        if w1 <= 0:
            return self._hif
        if w2 <= 0:
            return self._lof
        return min(max(math.sqrt(self._cf * w2 / w1), self._lof), self._hif)

    def _support(self, y):
        y1, y2 = float(y[0]), float(y[1])
        x = self._arc_opt(-y1, -y2)
        return max(self._af * y1, self._af * y2, y1 * x + y2 * self._cf / x)

    def _support_extended(self, y):
        y1, y2 = y
        if math.isinf(y1) and math.isinf(y2):
            return -math.inf
        if math.isinf(y1):
            return self._af * y2
        if math.isinf(y2):
            return self._af * y1
        return self._support(y)

    def support_batch(self, ys):
        ys = np.asarray(ys, dtype=float)
        y1, y2 = -ys[:, 0], -ys[:, 1]
        with np.errstate(divide="ignore", invalid="ignore"):
            x = np.sqrt(self._cf * y2 / y1)
        x = np.where(y1 <= 0, self._hif, np.where(y2 <= 0, self._lof, x))
        x = np.clip(np.nan_to_num(x, nan=self._hif), self._lof, self._hif)
        arc = -(y1 * x + y2 * self._cf / x)
        return np.maximum(np.maximum(-self._af * y1, -self._af * y2), arc)

    def lower_boundary(self, x1):
        """Height of the lower boundary of ``P`` above abscissa ``x1 >= 0``."""
        c, lo, hi, a = self.c, self.x_lo, self.x_hi, self.anchor
        if not isinstance(x1, Fraction):
            c, lo, hi, a = float(c), float(lo), float(hi), float(a)
        if x1 <= lo:
            return a + (c / lo - a) * x1 / lo
        if x1 <= hi:
            return c / x1
        if x1 <= a:
            return (c / hi) * (a - x1) / (a - hi)
        return 0 * x1

    def _contains(self, x):
        xe = exact_vector(x)
        if xe is not None:
            x1, x2 = xe
            if self.x_lo <= x1 <= self.x_hi:
                return x1 * x2 >= self.c
            return x2 >= self.lower_boundary(x1)
        x1, x2 = float(x[0]), float(x[1])
        return x2 >= self.lower_boundary(x1)

    def diagonal_entry(self):
        root = exact_sqrt(self.c)
        return root if root is not None else math.sqrt(self._cf)

    def min_linear(self, alpha):
        a1, a2 = float(alpha[0]), float(alpha[1])
        x = self._arc_opt(a1, a2)
        return min(self._af * a1, self._af * a2, a1 * x + a2 * self._cf / x)

    def axis_intercepts(self):
        return (self.anchor, self.anchor)

    def arc_curvature(self, x0: float) -> float:
        c = self._cf
        slope = -c / x0**2
        return (2.0 * c / x0**3) / (1.0 + slope**2) ** 1.5

    def local_boundary_model(self, base, radius_hint=1.0):
        self._check_dim(base)
        b1, b2 = float(base[0]), float(base[1])
        if not self.contains(base):
            raise BodyError(f"{tuple(base)} is not in P")
        lo, hi, a, c = self._lof, self._hif, self._af, self._cf
        if abs(b2 - self.lower_boundary(b1)) > 1e-12 * max(1.0, b2) and b1 > 0 and b2 > 0:
            raise BodyError(f"{tuple(base)} is an interior point of P")
        ends = [(0.0, a), (lo, c / lo), (hi, c / hi), (a, 0.0)]
        dist = [math.hypot(b1 - e1, b2 - e2) for e1, e2 in ends]
        if lo < b1 < hi:
            radius = min(float(radius_hint), 0.5 * min(dist[1], dist[2]))
            return Curved(self.arc_curvature(b1), radius)
        if hi < b1 < a:
            n1, n2 = c / hi, a - hi
            radius = min(float(radius_hint), 0.5 * min(dist[2], dist[3]))
            return Facet((n1 / (n1 + n2), n2 / (n1 + n2)), radius)
        if 0 < b1 < lo:
            n1, n2 = a - c / lo, lo
            radius = min(float(radius_hint), 0.5 * min(dist[0], dist[1]))
            return Facet((n1 / (n1 + n2), n2 / (n1 + n2)), radius)
        if b1 > a and b2 == 0:
            return Facet((0.0, 1.0), min(float(radius_hint), 0.5 * (b1 - a)))
        if b2 > a and b1 == 0:
            return Facet((1.0, 0.0), min(float(radius_hint), 0.5 * (b2 - a)))
        # junction points: boundary is C^1 but not locally a single model
        h = 1e-6
        samples = tuple((t, self.lower_boundary(t)) for t in (b1 - h, b1, b1 + h) if t >= 0)
        (p1, q1), (p2, q2) = samples[0], samples[-1]
        n1, n2 = (q1 - q2), (p2 - p1)
        return Probed(samples, (n1 / (n1 + n2), n2 / (n1 + n2)))

    def diagonal_normals(self):
        # gradient of x*y at (sqrt c, sqrt c) is proportional to (1, 1)
        half = Fraction(1, 2)
        return DiagonalNormals(((half, half),), True, True)

    def to_spec(self):
        return {
            "dimension": 2,
            "kind": self.kind,
            "arc": {"c": fraction_str(self.c), "range": [fraction_str(self.x_lo), fraction_str(self.x_hi)]},
            "anchorA": fraction_str(self.anchor),
        }


# ---------------------------------------------------------------------------
# Oracle bodies
# ---------------------------------------------------------------------------


def _simplex_grid(n: int, resolution: int) -> np.ndarray:
    pts = []
    for combo in itertools.combinations(range(resolution + n - 1), n - 1):
        parts, prev = [], -1
        for c in combo:
            parts.append(c - prev - 1)
            prev = c
        parts.append(resolution + n - 2 - prev)
        pts.append(parts)
    return np.asarray(pts, dtype=float) / resolution


class OracleBody(NewtonBody):
    """Body known only through a membership predicate.

    ``radius`` is a bounded-complement radius: every ``x >= 0`` with
    ``max(x) >= radius`` must be a member.  Monotonicity and the radius claim
    are spot-checked at construction.
    """

    kind = "oracle"
    exact = False

    def __init__(
        self,
        dimension: int,
        membership: Callable[[Sequence[float]], bool],
        radius: float,
        *,
        check_samples: int = 500,
        seed: int = 0,
        source: Optional[str] = None,
    ):
        if dimension < 1:
            raise BodyError("dimension must be >= 1")
        if not radius > 0:
            raise BodyError("bounded-complement radius must be positive")
        self.dimension = int(dimension)
        self.membership = membership
        self.radius = float(radius)
        self.source = source
        self._validate(check_samples, seed)
        self._axis = tuple(self._entry_along(np.eye(self.dimension)[i]) for i in range(self.dimension))
        self._kappa = self._entry_along(np.ones(self.dimension))
        res = 1024 if self.dimension <= 2 else max(4, int(round(600 ** (1.0 / (self.dimension - 1)))))
        self._dirs = _simplex_grid(self.dimension, res)
        self._step = 1.0 / res
        #: boundary points along a simplex grid of directions, for vectorized support
        self._table = np.array([self._entry_along(d) * d for d in self._dirs])

    def __repr__(self) -> str:
        return f"OracleBody(n={self.dimension}, radius={self.radius}, source={self.source!r})"

    def _member(self, x) -> bool:
        return bool(self.membership(tuple(float(v) for v in x)))

    def _validate(self, samples: int, seed: int) -> None:
        n, r = self.dimension, self.radius
        rng = np.random.default_rng(seed)
        if not self._member(np.full(n, r)):
            raise BodyError("radius*(1,...,1) is not a member")
        for i in range(n):
            if not self._member(r * np.eye(n)[i]):
                raise BodyError(f"radius*e_{i} is not a member; complement is not bounded by the radius")
        for _ in range(samples):
            x = rng.uniform(0.0, 2.0 * r, size=n)
            if max(x) >= r and not self._member(x):
                raise BodyError(f"point {tuple(x)} with max coordinate >= radius is not a member")
            if self._member(x) and not self._member(x + rng.exponential(0.25 * r, size=n)):
                raise BodyError(f"membership is not monotone above {tuple(x)}")

    def _entry_along(self, d: np.ndarray) -> float:
        """``inf{s >= 0 : s*d in P}`` by bisection with a certified bracket."""
        lo, hi = 0.0, self.radius / float(np.max(d))
        if self._member(lo * d):
            return 0.0
        if not self._member(hi * d):
            raise BodyError(f"ray along {tuple(d)} does not enter P within the radius")
        member = self.membership
        while hi - lo > BISECTION_TOL * max(1.0, hi):
            mid = 0.5 * (lo + hi)
            if member(tuple(mid * d)):
                hi = mid
            else:
                lo = mid
        return hi

    def boundary_point(self, d: Sequence[float]) -> np.ndarray:
        d = np.asarray(d, dtype=float)
        return self._entry_along(d) * d

    def _support_on(self, y: np.ndarray, active: np.ndarray) -> float:
        """Maximize ``<rho(d) d, y>`` over directions ``d`` supported on ``active``."""
        idx = np.flatnonzero(active)
        k = len(idx)

        def value(w: np.ndarray) -> float:
            d = np.zeros(self.dimension)
            d[idx] = w
            return float(self._entry_along(d) * (d @ y))

        if k == 1:
            return value(np.ones(1))
        # the tabulated boundary brackets the maximizer when every coordinate is active
        tabulated = k == self.dimension and hasattr(self, "_table")
        if k == 2:
            if tabulated:
                t0 = float(self._dirs[int(np.argmax(self._table @ y))][0])
                best = value(np.array([t0, 1.0 - t0]))
                lo, hi = max(t0 - self._step, 0.0), min(t0 + self._step, 1.0)
            else:
                grid = np.linspace(0.0, 1.0, 65)
                vals = [value(np.array([t, 1.0 - t])) for t in grid]
                j = int(np.argmax(vals))
                best = vals[j]
                lo, hi = grid[max(j - 1, 0)], grid[min(j + 1, len(grid) - 1)]
            res = optimize.minimize_scalar(
                lambda t: -value(np.array([t, 1.0 - t])),
                bounds=(lo, hi),
                method="bounded",
                options={"xatol": 1e-11},
            )
            return max(best, -float(res.fun))
        if tabulated:
            w0 = self._dirs[int(np.argmax(self._table @ y))]
            vals = [value(w0)]
        else:
            grid = _simplex_grid(k, 8)
            vals = [value(w) for w in grid]
            w0 = grid[int(np.argmax(vals))]

        def neg(z):
            w = np.exp(z - z.max())
            return -value(w / w.sum())

        z0 = np.log(np.maximum(w0, 1e-6))
        res = optimize.minimize(neg, z0, method="Nelder-Mead", options={"xatol": 1e-10, "fatol": 1e-12})
        return max(max(vals), -float(res.fun))

    def _support(self, y):
        y = _as_float_vector(y)
        return min(0.0, self._support_on(y, np.ones(self.dimension, dtype=bool)))

    def _support_extended(self, y):
        y = np.asarray(y, dtype=float)
        finite = np.isfinite(y)
        if not finite.any():
            return -math.inf
        y = np.where(finite, y, 0.0)
        return min(0.0, self._support_on(y, finite))

    def support_batch(self, ys):
        """Tabulated support: max over stored boundary points, slightly below the exact value."""
        ys = np.asarray(ys, dtype=float)
        return np.minimum(0.0, (ys @ self._table.T).max(axis=1))

    def _contains(self, x):
        return self._member(x)

    def diagonal_entry(self):
        return self._kappa

    def min_linear(self, alpha):
        return -self._support([-float(a) for a in alpha])

    def axis_intercepts(self):
        return self._axis

    def _tangent_normal(self, base_dir: np.ndarray, h: float) -> tuple[np.ndarray, np.ndarray]:
        """One-sided normal estimates at the boundary point along ``base_dir``."""
        n = self.dimension
        p0 = self.boundary_point(base_dir)
        lefts, rights = [], []
        for i in range(n - 1):
            t = np.zeros(n)
            t[i], t[n - 1] = 1.0, -1.0
            plus = self.boundary_point(base_dir + h * t) - p0
            minus = p0 - self.boundary_point(base_dir - h * t)
            rights.append(plus)
            lefts.append(minus)
        return self._normal_from_tangents(rights), self._normal_from_tangents(lefts)

    @staticmethod
    def _normal_from_tangents(tangents: list) -> np.ndarray:
        a = np.asarray(tangents, dtype=float)
        _, _, vt = np.linalg.svd(a)
        normal = vt[-1]
        if normal.sum() < 0:
            normal = -normal
        return normal / normal.sum()

    def local_boundary_model(self, base, radius_hint=1.0):
        self._check_dim(base)
        base = _as_float_vector(base)
        d = base / base.sum()
        if self.dimension == 1:
            return Probed((tuple(base),), (1.0,))
        h = 1e-4
        right, left = self._tangent_normal(d, h)
        samples = tuple(tuple(self.boundary_point(d + s * h * np.eye(self.dimension)[0] - s * h * np.eye(self.dimension)[-1]))
                        for s in (-1.0, 0.0, 1.0))
        return Probed(samples, tuple(0.5 * (right + left)))

    def diagonal_normals(self):
        n = self.dimension
        if n == 1:
            return DiagonalNormals(((1.0,),), True, False)
        d = np.full(n, 1.0 / n)
        r1, l1 = self._tangent_normal(d, 1e-4)
        r2, l2 = self._tangent_normal(d, 1e-5)
        gap1, gap2 = np.abs(r1 - l1).max(), np.abs(r2 - l2).max()
        # A kink keeps a one-sided gap that does not shrink with the step.
        if gap2 > 1e-6 and gap2 > 0.5 * gap1:
            return DiagonalNormals((tuple(l2), tuple(r2)), False, False)
        return DiagonalNormals((tuple(0.5 * (r2 + l2)),), True, False)

    def to_spec(self):
        spec = {"dimension": self.dimension, "kind": self.kind, "radius": self.radius}
        if self.source:
            spec["membership"] = self.source
        return spec


# ---------------------------------------------------------------------------
# Module-level operations
# ---------------------------------------------------------------------------


def support_value(body: NewtonBody, y: Sequence) -> Number:
    return body.support_value(y)


def contains(body: NewtonBody, x: Sequence) -> bool:
    return body.contains(x)


def diagonal_entry(body: NewtonBody) -> Number:
    return body.diagonal_entry()


def psi_eval(body: NewtonBody, moduli: Sequence[float]) -> float:
    return body.psi_eval(moduli)


def local_boundary_model(body: NewtonBody, base: Sequence, radius_hint: float = 1.0) -> LocalBoundaryModel:
    return body.local_boundary_model(base, radius_hint)


def facet_description(body: PolyhedralNewtonBody) -> list[Hyperplane]:
    if not isinstance(body, PolyhedralNewtonBody):
        raise BodyError("facet descriptions exist only for polyhedral bodies")
    return body.facet_description()
