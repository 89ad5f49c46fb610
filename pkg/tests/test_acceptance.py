"""Acceptance suite: one PASS/FAIL line per criterion, tolerances as contracted."""

import math
import time
from fractions import Fraction

import pytest

from test_route_equivalence import corpus
from toric_ohsawa.cli import main
from toric_ohsawa.newton_body import PolyhedralNewtonBody
from toric_ohsawa.polar_volume import (
    DEFAULT_B_GRID,
    Outcome,
    Reason,
    asymptotic_slope,
    independent_routes,
    limit_L,
    polar,
    slice_profile,
    slice_volume,
    verdict,
)
from toric_ohsawa.shell_oracle import (
    DEFAULT_T_GRID,
    calculus_checks,
    normalized_volume,
    shell_integral,
    shell_series,
    trend_classify,
)
from toric_ohsawa.valuations import Cardinality, lc_places, lct

F = Fraction
HALF = (F(1, 2), F(1, 2))


@pytest.fixture
def report(capsys):
    def emit(number: int, checks: dict, elapsed: float, detail: str = ""):
        failed = [name for name, ok in checks.items() if not ok]
        status = "PASS" if not failed else "FAIL"
        line = f"criterion {number}: {status} ({elapsed:.2f}s)"
        if failed:
            line += " failed: " + ", ".join(failed)
        if detail:
            line += " | " + detail
        with capsys.disabled():
            print("\n" + line)
        assert not failed, line

    return emit


def test_criterion_1_halfplane(report, halfplane):
    start = time.perf_counter()
    c = lct(halfplane)
    places = lc_places(halfplane)
    v = verdict(halfplane)
    pol = polar(halfplane)
    lim = limit_L(slice_profile(pol, DEFAULT_B_GRID))
    ivals = [normalized_volume(halfplane, t) for t in DEFAULT_T_GRID]
    trend = trend_classify(shell_series(halfplane))
    elapsed = time.perf_counter() - start
    report(
        1,
        {
            "c0 = 1 exact": c.c0 == 1 and isinstance(c.c0, Fraction) and c.exact,
            "unique place (1/2,1/2)": places.cardinality is Cardinality.UNIQUE and places.places == (HALF,),
            "NonSingular": v.outcome is Outcome.NON_SINGULAR,
            "three routes agree": set(v.routes.values()) == {"non_singular"} and len(v.routes) == 3,
            "L = sqrt 2": lim.classification == "finite" and abs(lim.value - math.sqrt(2)) <= 1e-9,
            "I(t) = 1": all(x == 1.0 for x in ivals),
            "trend bounded": trend.classification == "bounded",
            "runtime < 1 s": elapsed < 1.0,
        },
        elapsed,
        f"L={lim.value!r}",
    )


def test_criterion_2_hyperbolic_hull(report, hyperbolic):
    start = time.perf_counter()
    c = lct(hyperbolic)
    places = lc_places(hyperbolic)
    v = verdict(hyperbolic)
    trend = trend_classify(shell_series(hyperbolic))
    coefficient = normalized_volume(hyperbolic, -80.0) / math.sqrt(80.0)
    target = math.sqrt(math.pi / 2)
    elapsed = time.perf_counter() - start
    report(
        2,
        {
            "c0 = 1": c.c0 == 1,
            "unique place (1/2,1/2)": places.cardinality is Cardinality.UNIQUE and places.places == (HALF,),
            "Singular{L_infinite}": v.outcome is Outcome.SINGULAR and v.reason is Reason.L_INFINITE,
            "trend divergent": trend.classification == "divergent",
            "exponent 0.5 +- 0.05": trend.growth_exponent is not None and abs(trend.growth_exponent - 0.5) <= 0.05,
            "coefficient within 10%": abs(coefficient - target) <= 0.1 * target,
            "runtime < 5 s": elapsed < 5.0,
        },
        elapsed,
        f"gamma={trend.growth_exponent:.4f} coefficient={coefficient:.4f}",
    )


def test_criterion_3_corner(report, corner):
    start = time.perf_counter()
    g0 = slice_volume(polar(corner), 0).g
    v = verdict(corner)
    places = lc_places(corner)
    trend = trend_classify(shell_series(corner))
    elapsed = time.perf_counter() - start
    report(
        3,
        {
            "g(0) = sqrt2/3": abs(g0 - math.sqrt(2) / 3) <= 1e-9,
            "Singular{g0_positive}": v.outcome is Outcome.SINGULAR and v.reason is Reason.G0_POSITIVE,
            "infinitely many places": places.cardinality is Cardinality.INFINITE,
            "extreme normals exact": set(places.places) == {(F(1, 3), F(2, 3)), (F(2, 3), F(1, 3))} and places.exact,
            "trend divergent": trend.classification == "divergent",
            "exponent 1.0 +- 0.05": trend.growth_exponent is not None and abs(trend.growth_exponent - 1.0) <= 0.05,
        },
        elapsed,
        f"g0={g0!r} gamma={trend.growth_exponent:.4f}",
    )


def test_criterion_4_slope_constant(report, halfplane, hyperbolic, simplex3):
    start = time.perf_counter()
    s_half = asymptotic_slope(polar(halfplane))
    s_hyp = asymptotic_slope(polar(hyperbolic))
    s_simplex = asymptotic_slope(polar(simplex3))
    elapsed = time.perf_counter() - start
    report(
        4,
        {
            "halfplane sqrt 2": abs(s_half - math.sqrt(2)) <= 1e-6,
            "hyperbolic sqrt 2": abs(s_hyp - math.sqrt(2)) <= 1e-6,
            "simplex (sqrt3/2)^(1/2)": abs(s_simplex - math.sqrt(math.sqrt(3) / 2)) <= 1e-3,
        },
        elapsed,
        f"{s_half!r} {s_hyp!r} {s_simplex!r}",
    )


def test_criterion_5_route_equivalence(report):
    start = time.perf_counter()
    bodies = corpus(20240611, 120)
    disagreements = 0
    for _, _, body in bodies:
        if len(set(independent_routes(body).values())) != 1:
            disagreements += 1
    elapsed = time.perf_counter() - start
    report(
        5,
        {
            "at least 100 bodies": len(bodies) >= 100,
            "dimensions 2 and 3": {n for n, _, _ in bodies} == {2, 3},
            "kappa = 1": all(b.diagonal_entry() == 1 for _, _, b in bodies),
            "no disagreement": disagreements == 0,
        },
        elapsed,
        f"{len(bodies)} bodies, {disagreements} disagreements",
    )


def test_criterion_6_monte_carlo_calibration(report, halfplane):
    start = time.perf_counter()
    covered = 0
    worst_rel = 0.0
    for seed in range(100):
        est = shell_integral(halfplane, -10.0, mode="mc", samples=1_000_000, seed=seed)
        covered += abs(est.value - 1.0) <= 3 * est.stderr
        worst_rel = max(worst_rel, est.stderr / est.value)
    elapsed = time.perf_counter() - start
    report(
        6,
        {
            ">= 99 of 100 within 3 stderr": covered >= 99,
            "stderr < 1%": worst_rel < 0.01,
            "runtime < 30 s": elapsed < 30.0,
        },
        elapsed,
        f"covered={covered}/100 worst relative stderr={worst_rel:.5f}",
    )


def test_criterion_7_calculus_suite(report, halfplane, corner, hyperbolic, simplex3, integrable):
    start = time.perf_counter()
    fixtures = {
        "halfplane": halfplane,
        "corner": corner,
        "hyperbolic": hyperbolic,
        "simplex3": simplex3,
        "integrable": integrable,
    }
    checks = {}
    for name, body in fixtures.items():
        rep = calculus_checks(body)
        for c in rep.checks:
            checks[f"{name}:{c.name}"] = c.passed
    elapsed = time.perf_counter() - start
    report(7, checks, elapsed, f"{len(checks)} checks on {len(fixtures)} fixtures")


def test_criterion_8_determinism(report, fixtures_dir, tmp_path):
    start = time.perf_counter()
    checks = {}
    for path in sorted(fixtures_dir.glob("*.json")):
        outputs = []
        for run in ("a", "b"):
            out = tmp_path / f"{path.stem}-{run}"
            code = main(["analyze", str(path), "--shell", "--seed", "42", "--format", "csv-bundle", "--out", str(out)])
            outputs.append((code, {p.name: p.read_bytes() for p in sorted(out.iterdir())} if out.exists() else {}))
        (code_a, files_a), (code_b, files_b) = outputs
        checks[path.stem] = code_a == 0 and code_b == 0 and len(files_a) == 3 and files_a == files_b
    elapsed = time.perf_counter() - start
    report(8, checks, elapsed, f"{len(checks)} fixtures")
