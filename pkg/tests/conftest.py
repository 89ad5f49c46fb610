from fractions import Fraction
from pathlib import Path

import pytest

from toric_ohsawa.newton_body import HyperbolicHullBody, PolyhedralNewtonBody

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


@pytest.fixture
def fixtures_dir() -> Path:
    return FIXTURES


@pytest.fixture
def halfplane():
    return PolyhedralNewtonBody([(2, 0), (0, 2)])


@pytest.fixture
def corner():
    return PolyhedralNewtonBody([(3, 0), (1, 1), (0, 3)])


@pytest.fixture
def simplex3():
    return PolyhedralNewtonBody([(3, 0, 0), (0, 3, 0), (0, 0, 3)])


@pytest.fixture
def hyperbolic():
    return HyperbolicHullBody(1, (Fraction(1, 4), 4), 8)


@pytest.fixture
def integrable():
    """c0 = 2: the diagonal enters at kappa = 1/2."""
    return PolyhedralNewtonBody([(1, 0), (0, 1)])
