"""Ohsawa norms of toric plurisubharmonic functions.

A toric psh function near the origin of C^n is described by its Newton body
``P`` (a convex set with ``P + R^n_{>=0} = P``).  This package computes the
log canonical threshold and log canonical places of ``P``, decides whether
the Ohsawa norm is singular at the origin from the diagonal slices of the
polar body, and cross-checks the verdict against the defining shell
integrals.
"""

__version__ = "0.1.0"

from .newton_body import (  # noqa: E402
    BodyError,
    Corner,
    Curved,
    Facet,
    HyperbolicHullBody,
    Hyperplane,
    NewtonBody,
    OracleBody,
    PolyhedralNewtonBody,
    Probed,
)
from .polar_volume import (  # noqa: E402
    Outcome,
    Reason,
    RouteDisagreement,
    SingularityVerdict,
    SliceProfile,
    cone_condition,
    limit_L,
    polar,
    slice_profile,
    slice_volume,
    verdict,
)
from .shell_oracle import (  # noqa: E402
    ShellEstimate,
    TrendReport,
    VolumePoint,
    calculus_checks,
    shell_integral,
    trend_classify,
    volume_function,
)
from .valuations import kiselman, lc_places, lct, log_discrepancy  # noqa: E402

__all__ = [
    "BodyError",
    "Corner",
    "Curved",
    "Facet",
    "HyperbolicHullBody",
    "Hyperplane",
    "NewtonBody",
    "OracleBody",
    "PolyhedralNewtonBody",
    "Probed",
    "Outcome",
    "Reason",
    "RouteDisagreement",
    "SingularityVerdict",
    "SliceProfile",
    "cone_condition",
    "limit_L",
    "polar",
    "slice_profile",
    "slice_volume",
    "verdict",
    "ShellEstimate",
    "TrendReport",
    "VolumePoint",
    "calculus_checks",
    "shell_integral",
    "trend_classify",
    "volume_function",
    "kiselman",
    "lc_places",
    "lct",
    "log_discrepancy",
]
