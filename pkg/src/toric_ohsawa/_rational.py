"""Exact rational helpers shared by the polyhedral code paths."""

from __future__ import annotations

import math
from fractions import Fraction
from numbers import Integral, Rational
from typing import Iterable, Optional, Sequence

Vector = tuple  # tuple of Fraction


def parse_number(value) -> tuple[Fraction, bool]:
    """Convert a user-supplied number to a Fraction.

    Returns ``(fraction, exact)``. Strings of the form ``"p/q"`` and integers
    are exact; floats are converted bit-for-bit but flagged as inexact.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not numbers here")
    if isinstance(value, (Integral, Rational)):
        return Fraction(value), True
    if isinstance(value, str):
        text = value.strip()
        try:
            frac = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"cannot parse {value!r} as a rational number") from exc
        # "0.5" parses fine but came in as a decimal literal; it is still exact.
        return frac, True
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value), False
    raise TypeError(f"unsupported number type {type(value).__name__}")


def exact_vector(values: Iterable) -> Optional[Vector]:
    """Return a tuple of Fractions if every entry is an exact rational, else None."""
    out = []
    for v in values:
        if isinstance(v, bool) or not isinstance(v, (Integral, Rational)):
            return None
        out.append(Fraction(v))
    return tuple(out)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Fraction(0) if isinstance(a[0], Fraction) else 0.0)


def fraction_str(x: Fraction) -> str:
    return str(x.numerator) if x.denominator == 1 else f"{x.numerator}/{x.denominator}"


def exact_sqrt(x: Fraction) -> Optional[Fraction]:
    """Square root of a nonnegative Fraction when it is rational, else None."""
    if x < 0:
        return None
    p, q = x.numerator, x.denominator
    rp, rq = math.isqrt(p), math.isqrt(q)
    if rp * rp == p and rq * rq == q:
        return Fraction(rp, rq)
    return None


def solve(matrix: Sequence[Sequence[Fraction]], rhs: Sequence[Fraction]) -> Optional[Vector]:
    """Solve a square system exactly by Gaussian elimination; None if singular."""
    n = len(matrix)
    rows = [list(map(Fraction, row)) + [Fraction(r)] for row, r in zip(matrix, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        piv = rows[col][col]
        prow = rows[col]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col] / piv
                rows[r] = [a - f * b for a, b in zip(rows[r], prow)]
    return tuple(rows[i][n] / rows[i][i] for i in range(n))


def rank(vectors: Sequence[Sequence[Fraction]]) -> int:
    rows = [list(map(Fraction, v)) for v in vectors]
    if not rows:
        return 0
    ncols = len(rows[0])
    r = 0
    for col in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][col] != 0), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        for i in range(len(rows)):
            if i != r and rows[i][col] != 0:
                f = rows[i][col] / rows[r][col]
                rows[i] = [a - f * b for a, b in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def determinant(matrix: Sequence[Sequence[Fraction]]) -> Fraction:
    rows = [list(map(Fraction, row)) for row in matrix]
    n = len(rows)
    det = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            det = -det
        det *= rows[col][col]
        for r in range(col + 1, n):
            if rows[r][col] != 0:
                f = rows[r][col] / rows[col][col]
                rows[r] = [a - f * b for a, b in zip(rows[r], rows[col])]
    return det
