"""Volume function, shell integrals and boundedness classification.

All integrals are in the real coordinates ``x_j = log|z_j|^2``; the complex
Lebesgue measure differs by the constant ``pi^n``, which never changes a
boundedness classification and is therefore dropped.

``v(s) = int_{h_P(x) < s} e^{sum x} dx`` is the volume function,
``I(t) = e^{-t} v(t)`` its normalization and
``S(t) = int_{t < h_P < t+1} e^{sum x - h_P(x)} dx`` the shell integral whose
boundedness as ``t -> -inf`` is the Ohsawa-norm criterion.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy import integrate

from .newton_body import BodyError, NewtonBody
from .polar_volume import PolarBody, polar, slice_profile
from .valuations import lct

DEFAULT_T_GRID = tuple(-5.0 * 2**k for k in range(5))
DEFAULT_SAMPLES = 1_000_000
#: Fixed shard count; the partition of samples never depends on the worker count.
SHARDS = 16
MIN_HITS = 100
PILOT_SAMPLES = 4096
LOW_HIT_RATE = 1e-3


class SamplingError(RuntimeError):
    """Too few Monte Carlo hits for a trustworthy estimate."""


@dataclass(frozen=True)
class VolumePoint:
    s: float
    value: float
    stderr: float = 0.0
    exact: bool = True


@dataclass(frozen=True)
class ShellEstimate:
    t: float
    value: float
    stderr: float
    samples: int
    seed: Optional[int]
    mode: str  # "exact" | "mc"

    def to_row(self) -> list:
        seed = "" if self.seed is None else self.seed
        return [repr(self.t), repr(self.value), repr(self.stderr), self.samples, seed, self.mode]


@dataclass(frozen=True)
class TrendReport:
    series: tuple  # ((t, value, stderr), ...) ordered by increasing |t|
    classification: str  # "bounded" | "divergent" | "inconclusive"
    growth_exponent: Optional[float] = None
    limit_estimate: Optional[float] = None
    r_squared: Optional[float] = None

    def to_json(self) -> dict:
        return {
            "series": [list(p) for p in self.series],
            "classification": self.classification,
            "growthExponent": self.growth_exponent,
            "limitEstimate": self.limit_estimate,
            "rSquared": self.r_squared,
        }


# ---------------------------------------------------------------------------
# Monte Carlo machinery
# ---------------------------------------------------------------------------


def _shard_sizes(samples: int) -> list[int]:
    base, extra = divmod(samples, SHARDS)
    return [base + (k < extra) for k in range(SHARDS)]


def _sample_shifted(rng: np.random.Generator, size: int, shift: np.ndarray, rate: float = 1.0) -> np.ndarray:
    """Points with density ``rate^n e^{rate sum(x - shift)}`` on ``{x < shift}``."""
    u = 1.0 - rng.random((size, len(shift)))  # in (0, 1]
    return shift + np.log(u) / rate


def _sharded_mean(
    body: NewtonBody, samples: int, seed: int, shift: np.ndarray, weight_fn, workers: int, rate: float = 1.0
):
    """Mean and standard error of ``weight_fn(X, h_P(X))`` times the likelihood ratio.

    The ratio of ``e^{sum(x - shift)}`` to the sampling density is
    ``e^{(1 - rate) sum(x - shift)} / rate^n``; it is identically 1 for
    ``rate = 1``.  Each shard owns a child seed and a fixed sample count;
    partial sums are combined in shard order, so the result is bit-identical
    for any ``workers``.
    """
    children = np.random.SeedSequence(seed).spawn(SHARDS)
    sizes = _shard_sizes(samples)

    def run(k: int):
        if sizes[k] == 0:
            return 0.0, 0.0, 0
        rng = np.random.default_rng(children[k])
        x = _sample_shifted(rng, sizes[k], shift, rate)
        w = weight_fn(x, body.support_batch(x))
        if rate != 1.0:
            w = w * np.exp((1.0 - rate) * (x - shift).sum(axis=1) - len(shift) * math.log(rate))
        return float(w.sum()), float((w * w).sum()), int(np.count_nonzero(w))

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(run, range(SHARDS)))
    else:
        parts = [run(k) for k in range(SHARDS)]
    total = sq = 0.0
    hits = 0
    for s1, s2, h in parts:
        total += s1
        sq += s2
        hits += h
    mean = total / samples
    var = max(sq / samples - mean * mean, 0.0)
    return mean, math.sqrt(var / samples), hits


def _axis_inverse(body: NewtonBody) -> np.ndarray:
    return 1.0 / np.asarray([float(a) for a in body.axis_intercepts()])


def _shell_rate(body: NewtonBody, t: float, shift: np.ndarray) -> float:
    """Exponential tilt that carries samples from the box corner to the shell.

    The shell meets the diagonal at coordinate sum ``t / kappa``; the rate is
    chosen so the expected depth ``n / rate`` below the corner matches that
    distance.  Bodies whose shell hugs the corner keep ``rate = 1``.
    """
    depth = float(shift.sum()) - t / float(body.diagonal_entry())
    n = len(shift)
    return 1.0 if depth <= n else n / depth


# ---------------------------------------------------------------------------
# Volume function and shell integral
# ---------------------------------------------------------------------------


def _exact_polar(body: NewtonBody) -> Optional[PolarBody]:
    pol = polar(body)
    return pol if pol.exact else None


def normalized_volume(body: NewtonBody, t: float, *, pol: Optional[PolarBody] = None) -> float:
    """``I(t) = e^{-t} v(t)`` by the slice identity ``I(t) = ((-t)^n/sqrt(n)) int e^{-tb} g(b) db``."""
    if not t < 0:
        raise ValueError("t must be negative")
    pol = pol or polar(body)
    return pol.normalized_volume(t)


def volume_function(
    body: NewtonBody,
    s: float,
    *,
    mode: str = "auto",
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    workers: int = 1,
) -> VolumePoint:
    """``v(s)``, exactly from the slice profile or by Monte Carlo.

    The Monte Carlo estimator samples ``X_i = log U_i`` (density ``e^{sum x}``)
    and averages the indicator of ``{h_P(X) < s}``.  If a pilot run shows a hit
    rate below ``1e-3`` the sampler is shifted by ``s/a_i`` per axis, where
    ``a_i`` are the axis intercepts of ``P``; that box contains the whole
    sublevel set, so the reweighting factor is the constant ``e^{sum shift}``.
    """
    if not s < 0:
        raise ValueError("s must be negative")
    if mode not in ("auto", "exact", "mc"):
        raise ValueError(f"unknown mode {mode!r}")
    if mode != "mc":
        pol = polar(body)
        if pol.exact:
            return VolumePoint(s, math.exp(s) * pol.normalized_volume(s))
        if mode == "exact":
            raise BodyError("no exact volume path for this body")
    n = body.dimension
    shift = np.zeros(n)

    def indicator(x, h):
        return (h < s).astype(float)

    pilot, _, _ = _sharded_mean(body, min(PILOT_SAMPLES, samples), seed, shift, indicator, 1)
    if pilot < LOW_HIT_RATE:
        shift = s * _axis_inverse(body)
    mean, err, hits = _sharded_mean(body, samples, seed, shift, indicator, workers)
    if hits < MIN_HITS:
        raise SamplingError(f"only {hits} hits for v({s}); increase samples")
    scale = math.exp(shift.sum())
    return VolumePoint(s, mean * scale, err * scale, exact=False)


def shell_integral(
    body: NewtonBody,
    t: float,
    *,
    mode: str = "exact",
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    workers: int = 1,
) -> ShellEstimate:
    """``S(t) = int_{t < h_P < t+1} e^{sum x - h_P(x)} dx``.

    ``exact``: integration by parts, ``S(t) = I(t+1) - I(t) + int_t^{t+1} I(s) ds``.
    ``mc``: the sampler is shifted to ``x_i < (t+1)/a_i``, the smallest box
    containing the whole shell, and exponentially tilted towards the diagonal
    point of the shell; the estimator is ``E[1_shell(X) e^{-h_P(X)} w(X)]`` with
    ``w`` the exact likelihood ratio against ``e^{sum x}``.
    """
    if not t + 1 < 0:
        raise ValueError("shell integral needs t + 1 < 0")
    if mode == "exact":
        pol = polar(body)
        if not pol.exact:
            raise BodyError("no exact volume path for this body; use mode='mc'")
        i_hi, i_lo = pol.normalized_volume(t + 1), pol.normalized_volume(t)
        mid, _ = integrate.quad(pol.normalized_volume, t, t + 1, epsabs=0.0, epsrel=1e-12, limit=200)
        return ShellEstimate(t, i_hi - i_lo + mid, 0.0, 0, None, "exact")
    if mode != "mc":
        raise ValueError(f"unknown mode {mode!r}")
    shift = (t + 1.0) * _axis_inverse(body)

    def weight(x, h):
        inside = (h > t) & (h < t + 1.0)
        return np.where(inside, np.exp(-np.where(inside, h, 0.0)), 0.0)

    rate = _shell_rate(body, t, shift)
    mean, err, hits = _sharded_mean(body, samples, seed, shift, weight, workers, rate)
    if hits < MIN_HITS:
        raise SamplingError(f"only {hits} shell hits at t={t}; increase samples")
    scale = math.exp(shift.sum())
    return ShellEstimate(t, mean * scale, err * scale, samples, seed, "mc")


def shell_series(
    body: NewtonBody,
    t_grid: Sequence[float] = DEFAULT_T_GRID,
    *,
    mode: str = "exact",
    samples: int = DEFAULT_SAMPLES,
    seed: int = 0,
    workers: int = 1,
) -> list[ShellEstimate]:
    return [shell_integral(body, t, mode=mode, samples=samples, seed=seed, workers=workers) for t in t_grid]


# ---------------------------------------------------------------------------
# Trend classification
# ---------------------------------------------------------------------------


def _as_points(series) -> list[tuple[float, float, float]]:
    pts = []
    for p in series:
        if isinstance(p, ShellEstimate):
            pts.append((p.t, p.value, p.stderr))
        elif len(p) == 2:
            pts.append((float(p[0]), float(p[1]), 0.0))
        else:
            pts.append((float(p[0]), float(p[1]), float(p[2])))
    return sorted(pts, key=lambda p: -p[0])  # increasing |t|


def trend_classify(series, *, min_points: int = 5) -> TrendReport:
    """Classify a series sampled along ``t -> -inf`` as bounded, divergent or inconclusive.

    Divergence uses the log-log slope of the successive increments
    ``value(t_{k+1}) - value(t_k)`` against ``-t_k``: for ``C |t|^g + const`` on a
    geometric grid the increments are exactly ``C' |t_k|^g``, so additive
    constants do not bias the exponent.
    """
    pts = _as_points(series)
    if len(pts) < min_points:
        raise ValueError(f"trend classification needs at least {min_points} points")
    ts = [p[0] for p in pts]
    vals = [p[1] for p in pts]
    errs = [p[2] for p in pts]
    report_series = tuple(pts)

    incs = [vals[k + 1] - vals[k] for k in range(len(vals) - 1)]
    inc_err = [3.0 * math.hypot(errs[k + 1], errs[k]) for k in range(len(vals) - 1)]
    if all(d > e and d > 1e-12 * abs(v) for d, e, v in zip(incs, inc_err, vals[1:])):
        x = np.log([-t for t in ts[:-1]])
        y = np.log(incs)
        slope, intercept = np.polyfit(x, y, 1)
        resid = y - (slope * x + intercept)
        ss_tot = float(((y - y.mean()) ** 2).sum())
        r2 = 1.0 - float((resid**2).sum()) / ss_tot if ss_tot > 0 else 1.0
        if slope > 0.1 and r2 > 0.99:
            return TrendReport(report_series, "divergent", float(slope), None, r2)

    # a convergent series approaches its limit monotonically from either side
    def monotone(sign: float) -> bool:
        return all(
            sign * (vals[k + 1] - vals[k]) >= -(3.0 * math.hypot(errs[k], errs[k + 1]) + 1e-12 * abs(vals[k]))
            for k in range(len(vals) - 1)
        )

    last, prev = vals[-1], vals[-2]
    # the absolute floor lets series decaying to 0 settle
    settle = 0.01 * abs(last) + 1e-9 * max(abs(v) for v in vals)
    if (monotone(1.0) or monotone(-1.0)) and abs(last - prev) <= settle:
        return TrendReport(report_series, "bounded", None, last)
    return TrendReport(report_series, "inconclusive")


# ---------------------------------------------------------------------------
# Calculus checks
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    margin: float
    detail: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        return {"name": self.name, "passed": self.passed, "margin": self.margin, "detail": self.detail}


@dataclass(frozen=True)
class CalculusReport:
    checks: tuple

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def __getitem__(self, name: str) -> CheckResult:
        return next(c for c in self.checks if c.name == name)

    def to_json(self) -> list:
        return [c.to_json() for c in self.checks]


CHECK_GRID = tuple(-1.0 - 0.5 * k for k in range(0, 159))  # -1 .. -80, uniform
SECOND_DIFF_TOL = 1e-8


def _c0_is_one(body: NewtonBody) -> bool:
    c0 = lct(body).c0
    return abs(float(c0) - 1.0) <= 1e-9


def calculus_checks(body: NewtonBody, *, t_grid: Sequence[float] = DEFAULT_T_GRID) -> CalculusReport:
    """Verify the calculus behind the shell criterion on exact values.

    (a) ``I(s) = e^{-s} v(s)`` is nonincreasing in ``s``;
    (b) the ratio ``(I(t+1) - I(t)) / I(t+1)`` tends to 0 monotonically (``c0 = 1``);
    (c) ``phi(t) = t - log v(t)`` is convex, and when ``c0 = 1`` increasing
        with forward differences tending to 0;
    (d) the classifications of ``S`` and ``I`` along ``t_grid`` agree;
    (e) ``h(b) = -g(b)^(1/(n-1))`` is convex on a uniform b-grid.
    """
    pol = polar(body)
    if not pol.exact:
        raise BodyError("calculus checks need an exact volume path")
    unit = _c0_is_one(body)
    grid = sorted(CHECK_GRID)  # ascending t
    ivals = [pol.normalized_volume(t) for t in grid]
    checks = []

    # (a)
    steps = [ivals[k] - ivals[k + 1] for k in range(len(grid) - 1)]
    margins = [d + 1e-10 * abs(ivals[k]) for k, d in enumerate(steps)]
    checks.append(CheckResult("I_nonincreasing", min(margins) >= 0 if unit else True, min(steps), {"asserted": unit}))

    # (b)
    ratios = [(pol.normalized_volume(t + 1) - pol.normalized_volume(t)) / pol.normalized_volume(t + 1) for t in sorted(t_grid, reverse=True)]
    mags = [abs(r) for r in ratios]
    mono = all(mags[k + 1] <= mags[k] + 1e-12 for k in range(len(mags) - 1))
    tends = mags[-1] <= 1e-12 or (mags[-1] < 0.1 and mags[-1] <= 0.5 * mags[0])
    detail_b = {"t": sorted(t_grid, reverse=True), "ratio": ratios, "asserted": unit}
    checks.append(CheckResult("OT1_ratio_to_zero", (mono and tends) if unit else True, mags[-1], detail_b))

    # (c)
    phi = [-math.log(v) for v in ivals]
    second = [phi[k + 1] - 2 * phi[k] + phi[k - 1] for k in range(1, len(phi) - 1)]
    convex_margin = min(second)
    forward = [phi[k + 1] - phi[k] for k in range(len(phi) - 1)]
    h = grid[1] - grid[0]
    slope_far = forward[0] / h
    detail_c = {"second_difference_min": convex_margin, "slope_at_far_end": slope_far, "asserted_increasing": unit}
    ok_c = convex_margin >= -SECOND_DIFF_TOL
    if unit:
        increasing = min(forward) >= -SECOND_DIFF_TOL
        shrinking = all(forward[k] <= forward[k + 1] + SECOND_DIFF_TOL for k in range(len(forward) - 1))
        ok_c = ok_c and increasing and shrinking and abs(slope_far) < 0.05
    checks.append(CheckResult("phi_convex_increasing", ok_c, convex_margin, detail_c))

    # (d)
    i_trend = trend_classify([(t, pol.normalized_volume(t)) for t in t_grid])
    s_trend = trend_classify(shell_series(body, t_grid, mode="exact"))
    checks.append(
        CheckResult(
            "shell_volume_equivalence",
            i_trend.classification == s_trend.classification and i_trend.classification != "inconclusive",
            0.0,
            {"I": i_trend.classification, "S": s_trend.classification},
        )
    )

    # (e)
    if body.dimension >= 2:
        # Brunn-Minkowski applies where the slices are nonempty
        top = float(pol.b_max)
        bgrid = [top - 2.0 + k / 32.0 for k in range(65)]
        hv = slice_profile(pol, bgrid, include_zero=False).h_values()
        hs = [v for _, v in hv]
        sec = [hs[k + 1] - 2 * hs[k] + hs[k - 1] for k in range(1, len(hs) - 1)]
        checks.append(CheckResult("h_convex", min(sec) >= -SECOND_DIFF_TOL, min(sec)))
    return CalculusReport(tuple(checks))


def write_series_csv(series: Sequence[ShellEstimate], path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(["t", "value", "stderr", "samples", "seed", "mode"])
        for est in series:
            writer.writerow(est.to_row())
