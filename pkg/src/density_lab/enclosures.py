"""Certified rational enclosures for log and exp.

All routines return ``(lo, hi)`` with ``lo <= f(x) <= hi`` guaranteed, using
integer fixed-point arithmetic at scale ``2**bits`` and rounding every partial
result outward. Series remainders are bounded explicitly.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache

from .exact import ceil_q, floor_q, simplest_between

DEFAULT_BITS = 192


def _atanh_scaled(z: Fraction, bits: int) -> tuple[int, int]:
    # 0 <= z <= 1/2; atanh(z) = sum z^(2j+1)/(2j+1), tail <= t/(1 - z^2)
    scale = 1 << bits
    if z == 0:
        return 0, 0
    z2 = z * z
    z2_lo, z2_hi = floor_q(z2 * scale), ceil_q(z2 * scale)
    p_lo, p_hi = floor_q(z * scale), ceil_q(z * scale)
    s_lo = s_hi = 0
    j = 0
    while p_hi > 0:
        s_lo += p_lo // (2 * j + 1)
        s_hi += -((-p_hi) // (2 * j + 1))
        p_lo = (p_lo * z2_lo) >> bits
        p_hi = -((-(p_hi * z2_hi)) >> bits)
        j += 1
        if p_hi <= 1:
            break
    # remainder: next power over (2j+1), times 1/(1 - z^2) <= 4/3 for z <= 1/2
    tail = -((-(p_hi * 4)) // (3 * (2 * j + 1)))
    return s_lo, s_hi + tail + 1


@lru_cache(maxsize=8)
def _log2_scaled(bits: int) -> tuple[int, int]:
    lo, hi = _atanh_scaled(Fraction(1, 3), bits)
    return 2 * lo, 2 * hi


def log_bounds(y: Fraction, bits: int = DEFAULT_BITS) -> tuple[Fraction, Fraction]:
    """Enclosure of ``log(y)`` for rational ``y > 0``."""
    y = Fraction(y)
    if y <= 0:
        raise ValueError("log of a non-positive number")
    if y == 1:
        return Fraction(0), Fraction(0)
    k = y.numerator.bit_length() - y.denominator.bit_length()
    m = y / Fraction(2) ** k
    while m >= 2:
        m /= 2
        k += 1
    while m < 1:
        m *= 2
        k -= 1
    # m in [1, 2): z = (m-1)/(m+1) in [0, 1/3)
    z = (m - 1) / (m + 1)
    a_lo, a_hi = _atanh_scaled(z, bits)
    l2_lo, l2_hi = _log2_scaled(bits)
    if k >= 0:
        lo = 2 * a_lo + k * l2_lo
        hi = 2 * a_hi + k * l2_hi
    else:
        lo = 2 * a_lo + k * l2_hi
        hi = 2 * a_hi + k * l2_lo
    scale = 1 << bits
    return Fraction(lo, scale), Fraction(hi, scale)


def _exp_small_scaled(u: Fraction, bits: int) -> tuple[int, int]:
    # 0 <= u <= 1/2; Taylor terms, tail <= 2 * next term
    scale = 1 << bits
    u_lo, u_hi = floor_q(u * scale), ceil_q(u * scale)
    t_lo = t_hi = scale
    s_lo = s_hi = 0
    k = 0
    while True:
        s_lo += t_lo
        s_hi += t_hi
        k += 1
        t_lo = ((t_lo * u_lo) >> bits) // k
        t_hi = -((-((t_hi * u_hi + scale - 1) >> bits)) // k)
        if t_hi <= 1:
            break
    return s_lo, s_hi + 2 * t_hi + 1


def exp_bounds(t: Fraction, bits: int = DEFAULT_BITS) -> tuple[Fraction, Fraction]:
    """Enclosure of ``exp(t)`` for rational ``t`` (|t| up to a few hundred)."""
    t = Fraction(t)
    if t < 0:
        lo, hi = exp_bounds(-t, bits)
        return 1 / hi, 1 / lo
    halvings = 0
    u = t
    while u > Fraction(1, 2):
        u /= 2
        halvings += 1
    work = bits + 2 * halvings + 16
    lo, hi = _exp_small_scaled(u, work)
    for _ in range(halvings):
        lo = (lo * lo) >> work
        hi = -((-(hi * hi)) >> work)
    scale = 1 << work
    return Fraction(lo, scale), Fraction(hi, scale)


def log_ratio_bounds(xi: Fraction, eta: Fraction, bits: int = DEFAULT_BITS) -> tuple[Fraction, Fraction]:
    """Enclosure of ``log(xi)/log(eta)`` for ``xi, eta`` in (0, 1)."""
    lx_lo, lx_hi = log_bounds(xi, bits)
    le_lo, le_hi = log_bounds(eta, bits)
    # both logs are negative: ratio = |log xi| / |log eta|
    return (-lx_hi) / (-le_lo), (-lx_lo) / (-le_hi)


def exp_neg_rational(s: Fraction, tol: Fraction = Fraction(1, 10**12)) -> Fraction:
    """A simple rational within ``tol`` of ``exp(-s)``."""
    lo, hi = exp_bounds(-Fraction(s))
    if hi - lo >= tol:
        raise ArithmeticError("enclosure too wide for the requested tolerance")
    return simplest_between(hi - tol, lo + tol)


def one_minus_exp_neg_bounds(s: Fraction, bits: int = DEFAULT_BITS) -> tuple[Fraction, Fraction]:
    """Enclosure of ``1 - exp(-s)``."""
    lo, hi = exp_bounds(-Fraction(s), bits)
    return 1 - hi, 1 - lo
