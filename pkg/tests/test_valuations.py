from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import hull_samples, simplex_grid
from toric_ohsawa.newton_body import BodyError, HyperbolicHullBody, PolyhedralNewtonBody
from toric_ohsawa.valuations import (
    Cardinality,
    kiselman,
    lc_places,
    lct,
    log_discrepancy,
    series_valuation,
    simplex_ratio_scan,
    valuation_report,
)

F = Fraction


def test_kiselman_examples(halfplane, hyperbolic):
    assert kiselman(halfplane, (1, 1)) == 2
    assert kiselman(halfplane, (1, 0)) == 0
    assert kiselman(hyperbolic, (1, 1)) == pytest.approx(2.0, abs=1e-15)


def test_kiselman_against_hull_samples(corner):
    rng = np.random.default_rng(4)
    cloud = hull_samples(corner.generators, 20_000, rng)
    for alpha in [(1, 1), (1, 2), (F(1, 5), F(4, 5))]:
        brute = float(np.min(cloud @ np.asarray(alpha, dtype=float)))
        exact = float(kiselman(corner, alpha))
        assert exact <= brute + 1e-12
        assert brute - exact < 0.05


def test_kiselman_duality_cross_check(corner, hyperbolic):
    for alpha in [(1, 1), (F(1, 3), F(2, 3)), (2, 5)]:
        assert kiselman(corner, alpha, cross_check=True) == -corner.support_value([-a for a in alpha])
        kiselman(hyperbolic, alpha, cross_check=True)


def test_zero_weight_rejected(halfplane):
    with pytest.raises(BodyError):
        kiselman(halfplane, (0, 0))
    with pytest.raises(BodyError):
        kiselman(halfplane, (-1, 2))


def test_log_discrepancy_examples():
    assert log_discrepancy((1, 1)) == 2
    assert log_discrepancy((F(1, 2), F(1, 2))) == 1
    assert log_discrepancy((F(1, 3), F(2, 3))) == 1


def test_valuation_report_ratio(halfplane):
    rep = valuation_report(halfplane, (F(1, 2), F(1, 2)))
    assert rep.value == 1 and rep.log_discrepancy == 1 and rep.ratio == 1
    assert valuation_report(halfplane, (1, 0)).ratio == float("inf")


weights = st.tuples(st.integers(0, 20), st.integers(0, 20), st.integers(0, 20)).filter(any)


@settings(max_examples=100, deadline=None)
@given(a=weights, b=weights, lam=st.fractions(min_value=F(1, 10), max_value=10))
def test_kiselman_homogeneous_and_superadditive(a, b, lam):
    body = PolyhedralNewtonBody([(4, 0, 0), (0, 3, 0), (0, 0, 5), (1, 1, 2), (2, 2, 0)])
    va, vb = kiselman(body, a), kiselman(body, b)
    assert kiselman(body, [lam * x for x in a]) == lam * va
    assert kiselman(body, [x + y for x, y in zip(a, b)]) >= va + vb


# ---------------------------------------------------------------------------
# lct and lc places
# ---------------------------------------------------------------------------


def test_lct_examples(halfplane, integrable):
    r = lct(halfplane)
    assert r.c0 == 1 and r.weight == (F(1, 2), F(1, 2)) and r.exact
    r = lct(integrable)
    assert r.c0 == 2 and r.weight == (F(1, 2), F(1, 2))
    assert kiselman(integrable, r.weight) == F(1, 2)


@pytest.mark.parametrize("n,a", [(1, F(3)), (2, F(5, 2)), (3, F(7, 3))])
def test_lct_single_diagonal_generator(n, a):
    body = PolyhedralNewtonBody([(a,) * n], require_bounded_complement=False)
    assert lct(body).c0 == 1 / a
    best, _ = simplex_ratio_scan(body, 12)
    assert best == pytest.approx(float(1 / a), abs=1e-12)


def test_lct_hyperbolic(hyperbolic):
    r = lct(hyperbolic)
    assert r.c0 == 1 and r.exact
    assert r.weight == (F(1, 2), F(1, 2))


@pytest.mark.parametrize(
    "gens",
    [
        [(2, 0), (0, 2)],
        [(3, 0), (1, 1), (0, 3)],
        [(5, 0), (2, 1), (0, 3)],
        [(4, 0, 0), (0, 3, 0), (0, 0, 5), (1, 1, 2)],
        [(3, 0, 0), (0, 3, 0), (0, 0, 3)],
    ],
)
def test_lc_places_coherent_with_grid_scan(gens):
    """Every lc place attains c0 exactly; no grid weight does better."""
    body = PolyhedralNewtonBody(gens)
    c0 = lct(body).c0
    for alpha in lc_places(body).places:
        assert log_discrepancy(alpha) / kiselman(body, alpha) == c0
    n = body.dimension
    resolution = 9999 if n == 2 else 140  # about 10^4 grid weights
    gen_array = np.asarray([[float(v) for v in g] for g in body.generators])
    grid = np.asarray(list(simplex_grid(n, resolution)))
    v = np.min(grid @ gen_array.T, axis=1)
    ratios = 1.0 / v[v > 0]
    assert ratios.min() >= float(c0) - 1e-6


def test_lc_places_examples(halfplane, corner, hyperbolic):
    p = lc_places(halfplane)
    assert p.cardinality is Cardinality.UNIQUE and p.places == ((F(1, 2), F(1, 2)),)
    p = lc_places(corner)
    assert p.cardinality is Cardinality.INFINITE
    assert set(p.places) == {(F(1, 3), F(2, 3)), (F(2, 3), F(1, 3))}
    p = lc_places(hyperbolic)
    assert p.cardinality is Cardinality.UNIQUE and p.exact and p.places == ((F(1, 2), F(1, 2)),)


@settings(max_examples=30, deadline=None)
@given(lam=st.fractions(min_value=F(1, 7), max_value=7))
def test_scaling_covariance(lam):
    body = PolyhedralNewtonBody([(5, 0), (2, 1), (1, 3), (0, 6)])
    scaled = body.scaled(lam)
    assert scaled.diagonal_entry() == lam * body.diagonal_entry()
    assert lct(scaled).c0 == lct(body).c0 / lam
    assert lc_places(scaled).places == lc_places(body).places


def test_simplex_scan_agrees_with_lct():
    body = PolyhedralNewtonBody([(5, 0), (2, 1), (0, 3)])
    best, arg = simplex_ratio_scan(body, 60)
    assert best == pytest.approx(float(lct(body).c0), abs=1e-12)
    assert arg in lc_places(body).places


def test_hyperbolic_lct_matches_scan(hyperbolic):
    best, arg = simplex_ratio_scan(hyperbolic, 200)
    assert best == pytest.approx(1.0, abs=1e-12)
    assert arg == (F(1, 2), F(1, 2))


# ---------------------------------------------------------------------------
# series valuations
# ---------------------------------------------------------------------------


def test_series_valuation_examples():
    assert series_valuation([(2, 0), (0, 2)], (1, 1)) == 2
    assert series_valuation([(1, 3)], (2, 1)) == 5
    assert series_valuation([(0, 0), (4, 7)], (F(1, 3), F(2, 3))) == 0
    with pytest.raises(ValueError):
        series_valuation([], (1, 1))
    with pytest.raises(ValueError):
        series_valuation([(1, -1)], (1, 1))


exponent_sets = st.lists(st.tuples(st.integers(0, 9), st.integers(0, 9)), min_size=1, max_size=6)


@settings(max_examples=200, deadline=None)
@given(f=exponent_sets, g=exponent_sets, alpha=st.tuples(st.integers(0, 5), st.integers(0, 5)).filter(any))
def test_series_valuation_axioms(f, g, alpha):
    vf, vg = series_valuation(f, alpha), series_valuation(g, alpha)
    product = [(a[0] + b[0], a[1] + b[1]) for a in f for b in g]
    assert series_valuation(product, alpha) == vf + vg
    assert series_valuation(f + g, alpha) >= min(vf, vg)


def test_float_weight_is_inexact(halfplane):
    assert isinstance(series_valuation([(1, 2)], (0.5, 0.25)), float)
    assert isinstance(kiselman(halfplane, (0.5, 0.5)), float)


def test_hyperbolic_kiselman_anchor_branch():
    body = HyperbolicHullBody(1, (F(1, 4), 4), 8)
    # weight concentrated on x1: the anchor (0, 8) gives 0
    assert kiselman(body, (1, 0)) == 0
    # the arc optimum sqrt(99) is clamped to x = 4, and the anchor (8, 0) beats it
    assert kiselman(body, (F(1, 100), F(99, 100))) == pytest.approx(min(0.08, 0.01 * 4 + 0.99 / 4), abs=1e-15)
    assert kiselman(body, (F(1, 10), F(9, 10))) == pytest.approx(0.1 * 3 + 0.9 / 3, abs=1e-15)
