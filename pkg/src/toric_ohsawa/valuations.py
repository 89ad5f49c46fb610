"""Monomial valuations, the log canonical threshold and log canonical places.

For a toric psh function with Newton body ``P`` the Kiselman number with
weight ``alpha`` is ``v_alpha = inf_{x in P} <x, alpha>``, the log
discrepancy of ``v_alpha`` is ``sum(alpha)``, and the log canonical threshold
is ``c0 = inf_alpha A(alpha) / v_alpha = 1 / kappa`` where ``kappa * (1,...,1)``
is the point where the diagonal enters ``P``.  The weights achieving the
infimum are exactly the normals of supporting hyperplanes of ``P`` at that
point.
"""

from __future__ import annotations

import enum
import itertools
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from ._rational import exact_vector
from .newton_body import BodyError, NewtonBody, Number


class Cardinality(str, enum.Enum):
    UNIQUE = "unique"
    FINITE = "finite"  # kept for the report schema; convex normal cones never give it
    INFINITE = "infinite"


@dataclass(frozen=True)
class ValuationReport:
    weight: tuple
    value: Number
    log_discrepancy: Number

    @property
    def ratio(self) -> Number:
        if self.value == 0:
            return math.inf
        return self.log_discrepancy / self.value


@dataclass(frozen=True)
class LctResult:
    c0: Number
    kappa: Number
    weight: tuple
    exact: bool


@dataclass(frozen=True)
class LcPlaceSet:
    cardinality: Cardinality
    places: tuple
    exact: bool


def _check_weight(alpha: Sequence) -> None:
    if any(not math.isfinite(float(a)) for a in alpha):
        raise BodyError(f"weight {tuple(alpha)} has a non-finite entry")
    if any(a < 0 for a in alpha):
        raise BodyError(f"weight {tuple(alpha)} has a negative entry")
    if all(a == 0 for a in alpha):
        raise BodyError("the zero weight does not define a valuation")


def kiselman(body: NewtonBody, alpha: Sequence, *, cross_check: bool = False) -> Number:
    """Kiselman number ``v_alpha(P) = inf_{x in P} <x, alpha>``.

    With ``cross_check`` the duality ``v_alpha = -h_P(-alpha)`` is verified.
    """
    body._check_dim(alpha)
    _check_weight(alpha)
    value = body.min_linear(alpha)
    if cross_check:
        dual = -body.support_value([-a for a in alpha])
        if value != dual and abs(float(value) - float(dual)) > 1e-9 * max(1.0, abs(float(value))):
            raise AssertionError(f"kiselman {value} disagrees with -h_P(-alpha) = {dual}")
    return value


def log_discrepancy(alpha: Sequence) -> Number:
    _check_weight(alpha)
    return sum(alpha)


def valuation_report(body: NewtonBody, alpha: Sequence) -> ValuationReport:
    return ValuationReport(tuple(alpha), kiselman(body, alpha), log_discrepancy(alpha))


def lct(body: NewtonBody) -> LctResult:
    """Log canonical threshold at the origin with a minimizing weight."""
    kappa = body.diagonal_entry()
    if kappa <= 0:
        raise BodyError("diagonal entry point must be positive")
    c0 = 1 / kappa if isinstance(kappa, Fraction) else 1.0 / kappa
    normals = body.diagonal_normals()
    return LctResult(c0, kappa, normals.normals[0], normals.exact and isinstance(kappa, Fraction))


def lc_places(body: NewtonBody) -> LcPlaceSet:
    """Supporting hyperplanes of ``P`` at ``kappa*(1,...,1)``, as normalized weights.

    A vertex-like point has a normal cone of dimension >= 2 and therefore
    infinitely many places; those are reported by their extreme normals.
    """
    normals = body.diagonal_normals()
    if not normals.normals:
        raise BodyError("diagonal entry point is not on the boundary of P")
    card = Cardinality.UNIQUE if normals.unique else Cardinality.INFINITE
    return LcPlaceSet(card, tuple(sorted(normals.normals)), normals.exact)


def series_valuation(exponents: Sequence[Sequence[int]], alpha: Sequence) -> Number:
    """``v_alpha(f) = min <beta, alpha>`` over the exponents of nonzero terms of ``f``."""
    if not exponents:
        raise ValueError("the zero series has no finite valuation")
    _check_weight(alpha)
    ae = exact_vector(alpha)
    for beta in exponents:
        if len(beta) != len(alpha):
            raise ValueError("exponent and weight dimensions differ")
        if any(int(b) != b or b < 0 for b in beta):
            raise ValueError(f"exponent {tuple(beta)} is not in Z^n_>=0")
    if ae is not None:
        return min(sum(Fraction(b) * a for b, a in zip(beta, ae)) for beta in exponents)
    return min(float(np.dot(beta, alpha)) for beta in exponents)


def simplex_ratio_scan(body: NewtonBody, resolution: int) -> tuple[float, tuple]:
    """Brute-force ``min A(alpha)/v_alpha`` over a lattice grid of the simplex.

    Independent of the diagonal-entry route; used as a cross-check for ``lct``.
    """
    n = body.dimension
    best, arg = math.inf, None
    for combo in itertools.combinations(range(resolution + n - 1), n - 1):
        parts, prev = [], -1
        for c in combo:
            parts.append(c - prev - 1)
            prev = c
        parts.append(resolution + n - 2 - prev)
        alpha = tuple(Fraction(p, resolution) for p in parts)
        v = body.min_linear(alpha)
        if v <= 0:
            continue
        ratio = float(1 / v) if isinstance(v, Fraction) else 1.0 / v
        if ratio < best:
            best, arg = ratio, alpha
    return best, arg
