"""Command line entry point: ``toric-ohsawa analyze <spec.json>``.

Exit codes: 0 success, 2 invalid input (missing file, bad JSON, schema or
body validation), 3 disagreement between independent routes (or between the
verdict and the shell trend), 1 anything else.
"""

from __future__ import annotations

import argparse
import importlib
import json
import math
import os
import sys
import time
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path
from typing import Any, Optional, Sequence

import jsonschema

from . import __version__
from ._rational import fraction_str, parse_number
from .newton_body import BodyError, HyperbolicHullBody, NewtonBody, OracleBody, PolyhedralNewtonBody
from .polar_volume import (
    DEFAULT_B_GRID,
    RouteDisagreement,
    SingularityVerdict,
    SliceProfile,
    polar,
    slice_profile,
    verdict,
    write_profile_csv,
)
from .shell_oracle import (
    DEFAULT_SAMPLES,
    DEFAULT_T_GRID,
    CalculusReport,
    ShellEstimate,
    TrendReport,
    calculus_checks,
    shell_series,
    trend_classify,
    write_series_csv,
)
from .valuations import lc_places, lct

SCHEMA_VERSION = 1

_NUMBER = {
    "oneOf": [
        {"type": "number"},
        {"type": "string", "pattern": r"^\s*[+-]?\d+(\.\d+)?(\s*/\s*\d+)?\s*$"},
    ]
}

SPEC_SCHEMA = {
    "type": "object",
    "required": ["dimension", "kind"],
    "properties": {
        "dimension": {"type": "integer", "minimum": 1},
        "kind": {"enum": ["polyhedral", "hyperbolic_hull", "oracle"]},
    },
    "allOf": [
        {
            "if": {"properties": {"kind": {"const": "polyhedral"}}},
            "then": {
                "required": ["generators"],
                "properties": {
                    "generators": {"type": "array", "minItems": 1, "items": {"type": "array", "items": _NUMBER}},
                },
            },
        },
        {
            "if": {"properties": {"kind": {"const": "hyperbolic_hull"}}},
            "then": {
                "required": ["arc", "anchorA"],
                "properties": {
                    "dimension": {"const": 2},
                    "arc": {
                        "type": "object",
                        "required": ["c", "range"],
                        "properties": {
                            "c": _NUMBER,
                            "range": {"type": "array", "items": _NUMBER, "minItems": 2, "maxItems": 2},
                        },
                    },
                    "anchorA": _NUMBER,
                },
            },
        },
        {
            "if": {"properties": {"kind": {"const": "oracle"}}},
            "then": {
                "required": ["radius", "membership"],
                "properties": {
                    "radius": {"type": "number", "exclusiveMinimum": 0},
                    "membership": {"type": "string", "pattern": r"^[\w.]+:\w+$"},
                },
            },
        },
    ],
}


class SpecError(ValueError):
    """Spec file missing, unparsable, schema-invalid or describing an invalid body."""


def _line_of(text: str, key: str) -> Optional[int]:
    needle = f'"{key}"'
    for i, line in enumerate(text.splitlines(), start=1):
        if needle in line:
            return i
    return None


def _all_exact(values) -> bool:
    return all(parse_number(v)[1] for v in values)


def body_from_spec(spec: dict) -> tuple[NewtonBody, bool]:
    """Build a body from an already schema-valid spec; returns ``(body, exact)``."""
    jsonschema.validate(spec, SPEC_SCHEMA)
    n = spec["dimension"]
    kind = spec["kind"]
    if kind == "polyhedral":
        gens = spec["generators"]
        if any(len(g) != n for g in gens):
            raise BodyError(f"every generator must have {n} coordinates")
        parsed = [[parse_number(v)[0] for v in g] for g in gens]
        return PolyhedralNewtonBody(parsed), _all_exact(v for g in gens for v in g)
    if kind == "hyperbolic_hull":
        arc = spec["arc"]
        raw = [arc["c"], *arc["range"], spec["anchorA"]]
        c, lo, hi, a = (parse_number(v)[0] for v in raw)
        return HyperbolicHullBody(c, (lo, hi), a), _all_exact(raw)
    module_name, func_name = spec["membership"].split(":")
    try:
        func = getattr(importlib.import_module(module_name), func_name)
    except (ImportError, AttributeError) as exc:
        raise BodyError(f"cannot import membership oracle {spec['membership']!r}: {exc}") from exc
    return OracleBody(n, func, spec["radius"], source=spec["membership"]), False


def load_spec(path) -> tuple[dict, NewtonBody, bool]:
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise SpecError(f"{path}: cannot read spec file ({exc.strerror})") from exc
    try:
        spec = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SpecError(f"{path}:{exc.lineno}:{exc.colno}: invalid JSON: {exc.msg}") from exc
    validator = jsonschema.Draft202012Validator(SPEC_SCHEMA)
    errors = sorted(validator.iter_errors(spec), key=lambda e: list(e.absolute_path))
    if errors:
        lines = []
        for err in errors:
            pointer = "/" + "/".join(str(p) for p in err.absolute_path)
            key = next((str(p) for p in reversed(err.absolute_path) if isinstance(p, str)), None)
            line = _line_of(text, key) if key else None
            where = f"{path}:{line}" if line else str(path)
            lines.append(f"{where}: {pointer}: {err.message}")
        raise SpecError("\n".join(lines))
    try:
        body, exact = body_from_spec(spec)
    except (BodyError, ValueError, TypeError) as exc:
        raise SpecError(f"{path}: invalid body: {exc}") from exc
    return spec, body, exact


# ---------------------------------------------------------------------------
# JSON encoding
# ---------------------------------------------------------------------------


def to_jsonable(obj: Any) -> Any:
    """Fractions become ``"p/q"`` strings, non-finite floats become strings."""
    if isinstance(obj, Fraction):
        return fraction_str(obj)
    if isinstance(obj, bool) or obj is None or isinstance(obj, (int, str)):
        return obj
    if isinstance(obj, float):
        if math.isnan(obj):
            return "nan"
        if math.isinf(obj):
            return "inf" if obj > 0 else "-inf"
        return obj
    if hasattr(obj, "item") and not isinstance(obj, (list, tuple, dict)):
        return to_jsonable(obj.item())
    if hasattr(obj, "value") and hasattr(obj, "name") and not isinstance(obj, dict):
        return obj.value  # enums
    if isinstance(obj, dict):
        return {str(k): to_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_jsonable(v) for v in obj]
    raise TypeError(f"cannot encode {type(obj).__name__}")


def _number_entry(x) -> dict:
    return {"value": x, "exact": isinstance(x, Fraction)}


# ---------------------------------------------------------------------------
# Pipeline
# ---------------------------------------------------------------------------


@dataclass
class AnalyzeOptions:
    shell: bool = False
    checks: bool = False
    t_grid: Sequence[float] = DEFAULT_T_GRID
    samples: int = DEFAULT_SAMPLES
    seed: int = 0
    mode: str = "auto"
    workers: int = 1
    timestamp: Optional[str] = None


@dataclass
class AnalysisReport:
    data: dict
    profile: Optional[SliceProfile] = None
    shell: list = field(default_factory=list)

    def to_json(self) -> str:
        return json.dumps(to_jsonable(self.data), indent=2, sort_keys=True) + "\n"


_EXPECTED_TREND = {"NonSingular": "bounded", "IntegrableLocus": "bounded", "Singular": "divergent"}


def _verdict_json(v: SingularityVerdict) -> dict:
    return {
        "outcome": v.outcome.value,
        "reason": v.reason.value if v.reason else None,
        "facetNormal": v.facet_normal,
        "routes": v.routes,
        "routesAgreed": list(v.routes_agreed),
        "evidence": v.evidence,
    }


def _timestamp(explicit: Optional[str]) -> Optional[str]:
    if explicit:
        return explicit
    epoch = os.environ.get("SOURCE_DATE_EPOCH")
    if epoch:
        return time.strftime("%Y-%m-%dT%H:%M:%SZ", time.gmtime(int(epoch)))
    return None


def run_analyze(spec_path, options: Optional[AnalyzeOptions] = None) -> AnalysisReport:
    """Full pipeline: lct, lc places, verdict, and optionally the shell trend and checks.

    Raises :class:`SpecError` on invalid input and :class:`RouteDisagreement`
    when routes (or the verdict and the shell trend) disagree.
    """
    opts = options or AnalyzeOptions()
    spec, body, exact = load_spec(spec_path)
    if not body.has_bounded_complement:
        raise SpecError(f"{spec_path}: the complement of P in the orthant is unbounded")

    lres = lct(body)
    places = lc_places(body)
    v = verdict(body)
    data: dict = {
        "schemaVersion": SCHEMA_VERSION,
        "body": {"spec": spec, "canonical": body.to_spec(), "exact": exact},
        "lct": {
            "c0": _number_entry(lres.c0),
            "kappa": _number_entry(lres.kappa),
            "certificateWeight": lres.weight,
            "exact": lres.exact,
        },
        "lcPlaces": {"cardinality": places.cardinality.value, "places": places.places, "exact": places.exact},
        "verdict": _verdict_json(v),
    }

    pol = polar(body)
    profile = None
    if body.dimension >= 2:
        profile = slice_profile(pol, DEFAULT_B_GRID)
        data["slices"] = [{"b": p.b, "g": p.g, "exact": p.exact, "stderr": p.stderr} for p in profile.points]

    series: list[ShellEstimate] = []
    if opts.shell:
        mode = opts.mode
        if mode == "auto":
            mode = "exact" if pol.exact else "mc"
        series = shell_series(body, opts.t_grid, mode=mode, samples=opts.samples, seed=opts.seed, workers=opts.workers)
        trend: TrendReport = trend_classify(series)
        data["shellTrend"] = trend.to_json() | {"mode": mode}
        expected = _EXPECTED_TREND[v.outcome.value]
        if trend.classification != "inconclusive" and trend.classification != expected:
            raise RouteDisagreement(
                f"verdict {v.outcome.value} expects a {expected} shell trend, got {trend.classification}"
            )
    if opts.checks:
        report: CalculusReport = calculus_checks(body, t_grid=opts.t_grid)
        data["checks"] = {"passed": report.passed, "results": report.to_json()}

    data["provenance"] = {
        "tool": "toric-ohsawa",
        "version": __version__,
        "seed": opts.seed,
        "samples": opts.samples,
        "tGrid": list(opts.t_grid),
        "timestamp": _timestamp(opts.timestamp),
        "normalization": "x-coordinates x_j = log|z_j|^2; complex measure differs by the constant pi^n",
    }
    return AnalysisReport(data, profile, series)


def emit_report(report: AnalysisReport, fmt: str, out_dir) -> list[Path]:
    """Write ``report.json`` and, for ``csv-bundle``, ``slices.csv`` and ``shell.csv``."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = [out / "report.json"]
    written[0].write_text(report.to_json(), encoding="utf-8")
    if fmt == "csv-bundle":
        slices = out / "slices.csv"
        if report.profile is not None:
            write_profile_csv(report.profile, slices)
        else:
            slices.write_text("b,g_b,exact_flag,stderr\n", encoding="utf-8")
        shell = out / "shell.csv"
        write_series_csv(report.shell, shell)
        written += [slices, shell]
    elif fmt != "json":
        raise ValueError(f"unknown format {fmt!r}")
    return written


def _parse_grid(text: str) -> tuple[float, ...]:
    try:
        grid = tuple(float(v) for v in text.split(",") if v.strip())
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"bad t-grid {text!r}") from exc
    if not grid or any(not t + 1 < 0 for t in grid):
        raise argparse.ArgumentTypeError("every t must satisfy t + 1 < 0")
    return grid


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="toric-ohsawa", description="Ohsawa-norm analysis of toric psh functions")
    sub = parser.add_subparsers(dest="command", required=True)
    an = sub.add_parser("analyze", help="analyze a Newton body spec")
    an.add_argument("spec", help="body specification JSON file")
    an.add_argument("--shell", action="store_true", help="compute the shell integral series and its trend")
    an.add_argument("--checks", action="store_true", help="run the calculus checks (exact bodies only)")
    an.add_argument("--t-grid", type=_parse_grid, default=DEFAULT_T_GRID, help="comma separated t values")
    an.add_argument("--samples", type=int, default=DEFAULT_SAMPLES, help="Monte Carlo samples per t")
    an.add_argument("--seed", type=int, default=0)
    an.add_argument("--mode", choices=("auto", "exact", "mc"), default="auto", help="shell integral path")
    an.add_argument("--workers", type=int, default=1, help="Monte Carlo worker threads (results do not depend on it)")
    an.add_argument("--out", default=None, help="output directory (default: print JSON to stdout)")
    an.add_argument("--format", choices=("json", "csv-bundle"), default="json")
    an.add_argument("--timestamp", default=None, help="timestamp recorded in provenance")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code else 0
    opts = AnalyzeOptions(
        shell=args.shell,
        checks=args.checks,
        t_grid=args.t_grid,
        samples=args.samples,
        seed=args.seed,
        mode=args.mode,
        workers=args.workers,
        timestamp=args.timestamp,
    )
    try:
        report = run_analyze(args.spec, opts)
    except SpecError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except RouteDisagreement as exc:
        print(f"disagreement: {exc}", file=sys.stderr)
        return 3
    except Exception as exc:  # noqa: BLE001 - the exit code is the contract
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.out is None:
        if args.format != "json":
            print("error: --format csv-bundle needs --out", file=sys.stderr)
            return 2
        sys.stdout.write(report.to_json())
        return 0
    try:
        emit_report(report, args.format, args.out)
    except OSError as exc:
        print(f"error: cannot write output: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
