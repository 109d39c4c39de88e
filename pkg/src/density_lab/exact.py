"""Exact rational helpers: parsing, floor/ceil, integer roots, simple rationals."""

from __future__ import annotations

import os
import re
from decimal import Decimal, localcontext
from fractions import Fraction
from numbers import Rational
from typing import Union

from .errors import ValidationError

RationalLike = Union[int, Fraction, str, float]

DEFAULT_PRECISION = 50

_RATIO_RE = re.compile(r"^\s*([+-]?\d+)\s*/\s*([+-]?\d+)\s*$")


def to_fraction(value: RationalLike) -> Fraction:
    """Convert ``value`` to an exact :class:`Fraction`.

    Strings may be integers, ``"p/q"`` or decimal/scientific literals; decimal
    strings are read exactly (``"0.3"`` is 3/10). Floats go through ``repr`` so
    that ``0.3`` also becomes 3/10 rather than its binary expansion.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise ValidationError(f"not a rational: {value!r}")
    if isinstance(value, (int, Rational)):
        return Fraction(value)
    if isinstance(value, float):
        if value != value or value in (float("inf"), float("-inf")):
            raise ValidationError(f"not a finite rational: {value!r}")
        return Fraction(repr(value))
    if isinstance(value, str):
        text = value.strip()
        m = _RATIO_RE.match(text)
        if m:
            num, den = int(m.group(1)), int(m.group(2))
            if den == 0:
                raise ValidationError(f"zero denominator in {value!r}")
            return Fraction(num, den)
        try:
            return Fraction(Decimal(text))
        except Exception as exc:  # decimal.InvalidOperation, ValueError
            raise ValidationError(f"cannot parse rational literal {value!r}") from exc
    raise ValidationError(f"not a rational: {value!r}")


def floor_q(q: Fraction) -> int:
    return q.numerator // q.denominator


def ceil_q(q: Fraction) -> int:
    return -((-q.numerator) // q.denominator)


def iroot(n: int, k: int) -> int:
    """Largest integer r with r**k <= n (n >= 0, k >= 1)."""
    if n < 0 or k < 1:
        raise ValueError("iroot needs n >= 0 and k >= 1")
    if n < 2 or k == 1:
        return n
    r = 1 << ((n.bit_length() + k - 1) // k)
    while True:
        s = ((k - 1) * r + n // r ** (k - 1)) // k
        if s >= r:
            break
        r = s
    while r ** k > n:
        r -= 1
    while (r + 1) ** k <= n:
        r += 1
    return r


def root_bounds(value: Fraction, k: int, bits: int = 128) -> tuple[Fraction, Fraction]:
    """Rational ``lo <= value**(1/k) <= hi`` with ``hi - lo <= 2**-bits``."""
    if value < 0:
        raise ValueError("root of a negative number")
    scale = 1 << bits
    n = (value.numerator * scale**k) // value.denominator
    r = iroot(n, k)
    lo = Fraction(r, scale)
    if lo**k == value:
        return lo, lo
    return lo, Fraction(r + 1, scale)


def simplest_between(lo: Fraction, hi: Fraction) -> Fraction:
    """The rational with the smallest denominator in the closed interval [lo, hi]."""
    if lo > hi:
        raise ValueError("empty interval")
    if lo <= 0 <= hi:
        return Fraction(0)
    if hi < 0:
        return -simplest_between(-hi, -lo)
    # continued-fraction descent; terms accumulate as (p, q) convergent pairs
    p0, q0, p1, q1 = 0, 1, 1, 0
    while True:
        a = floor_q(lo)
        if a == lo:
            return Fraction(a * p1 + p0, a * q1 + q0)
        if a < floor_q(hi):
            a += 1
            return Fraction(a * p1 + p0, a * q1 + q0)
        p0, q0, p1, q1 = p1, q1, a * p1 + p0, a * q1 + q0
        lo, hi = 1 / (hi - a), 1 / (lo - a)


def render_precision() -> int:
    """Decimal digits used when rendering irrational quantities."""
    raw = os.environ.get("DENSITY_LAB_PRECISION")
    if not raw:
        return DEFAULT_PRECISION
    try:
        digits = int(raw)
    except ValueError as exc:
        raise ValidationError(f"DENSITY_LAB_PRECISION must be an integer, got {raw!r}") from exc
    if digits < 1:
        raise ValidationError("DENSITY_LAB_PRECISION must be positive")
    return digits


def to_decimal(q: Fraction, digits: int | None = None) -> Decimal:
    digits = render_precision() if digits is None else digits
    with localcontext() as ctx:
        ctx.prec = digits
        return Decimal(q.numerator) / Decimal(q.denominator)


def fmt(q: Fraction) -> str:
    """Canonical text form used in reports: ``"p/q"`` or an integer."""
    return str(q)
