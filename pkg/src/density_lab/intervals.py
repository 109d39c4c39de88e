"""Interval families: substantiality, splitting, pigeonhole selection, certificates.

Families are sequences of half-open intervals (a_n, b_n] in (0, inf) with
a_n < b_n <= a_{n+1}. A finite prefix is stored explicitly; what comes after
it is described by a symbolic tail class, which is also what decides whether
sum (b_n/a_n - 1)**2 diverges.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from decimal import Decimal, localcontext
from fractions import Fraction
from typing import Sequence, Union

from .errors import ConsequenceViolation, InvalidEta, InvalidK, InvalidWindow, NotACovering, ValidationError
from .exact import RationalLike, ceil_q, floor_q, render_precision, root_bounds, to_fraction
from .seqcore import CountingOracle

INF = math.inf
Extended = Union[Fraction, float]  # float only ever holds +inf

POWER_RATIO_RESOLUTION = 10**12


@dataclass(frozen=True)
class HalfOpenInterval:
    a: Fraction
    b: Fraction

    def __post_init__(self) -> None:
        a, b = to_fraction(self.a), to_fraction(self.b)
        if not 0 < a < b:
            raise InvalidWindow(f"need 0 < a < b, got ({a}, {b}]")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    @property
    def length(self) -> Fraction:
        return self.b - self.a

    @property
    def ratio(self) -> Fraction:
        return self.b / self.a

    def __iter__(self):
        yield self.a
        yield self.b


# --------------------------------------------------------------------------
# tail classes


@dataclass(frozen=True)
class ConstantRatio:
    """Every tail interval has b_n / a_n = ratio.

    ``spacing`` is a_{n+1} / a_n (default: ratio, i.e. contiguous intervals).
    With ``extendable=False`` the class only asserts the ratio structure of
    intervals listed in the prefix; no further intervals can be generated.
    """

    ratio: Fraction
    spacing: Fraction | None = None
    extendable: bool = True

    def __post_init__(self) -> None:
        ratio = to_fraction(self.ratio)
        if ratio <= 1:
            raise ValidationError("ConstantRatio needs ratio > 1")
        spacing = ratio if self.spacing is None else to_fraction(self.spacing)
        if spacing < ratio:
            raise ValidationError("spacing must be >= ratio so that b_n <= a_{n+1}")
        object.__setattr__(self, "ratio", ratio)
        object.__setattr__(self, "spacing", spacing)


@dataclass(frozen=True)
class PowerRatio:
    """b_n / a_n = 1 + c * n**(-p), a_{n+1} = b_n.

    Right endpoints are rounded down to multiples of 10**-12 after using a
    certified lower bound for n**(-p), so every ratio is at most the formula's.
    """

    c: Fraction
    p: Fraction

    def __post_init__(self) -> None:
        c, p = to_fraction(self.c), to_fraction(self.p)
        if c <= 0 or p <= 0:
            raise ValidationError("PowerRatio needs c > 0 and p > 0")
        object.__setattr__(self, "c", c)
        object.__setattr__(self, "p", p)


@dataclass(frozen=True)
class FinitePrefixOnly:
    pass


TailClass = Union[ConstantRatio, PowerRatio, FinitePrefixOnly]


def _power_ratio_lower(n: int, p: Fraction) -> Fraction:
    # lower bound for n**(-p) = 1 / (n**u)**(1/v)
    _, hi = root_bounds(Fraction(n**p.numerator), p.denominator, bits=96)
    return 1 / hi


@dataclass(frozen=True, eq=False)
class IntervalFamily:
    """Explicit prefix followed by a symbolic tail.

    If the prefix is empty the first generated interval starts at ``anchor``.
    """

    prefix: tuple[HalfOpenInterval, ...] = ()
    tail: TailClass = field(default_factory=FinitePrefixOnly)
    anchor: Fraction = Fraction(1)
    _cache: list = field(default_factory=list, init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        prefix = tuple(iv if isinstance(iv, HalfOpenInterval) else HalfOpenInterval(*iv) for iv in self.prefix)
        object.__setattr__(self, "prefix", prefix)
        object.__setattr__(self, "anchor", to_fraction(self.anchor))
        if self.anchor <= 0:
            raise ValidationError("anchor must be positive")
        for left, right in zip(prefix, prefix[1:]):
            if left.b > right.a:
                raise ValidationError(f"intervals out of order: {left} then {right}")
        self._cache.extend(prefix)

    @property
    def available(self) -> int | None:
        """Number of intervals that can be produced (None = unbounded)."""
        if isinstance(self.tail, FinitePrefixOnly):
            return len(self.prefix)
        if isinstance(self.tail, ConstantRatio) and not self.tail.extendable:
            return len(self.prefix)
        return None

    def _next(self) -> HalfOpenInterval:
        n = len(self._cache) + 1
        last = self._cache[-1] if self._cache else None
        tail = self.tail
        if isinstance(tail, ConstantRatio):
            if last is None:
                a = self.anchor
            else:
                a = last.b * (tail.spacing / tail.ratio)
            return HalfOpenInterval(a, a * tail.ratio)
        if isinstance(tail, PowerRatio):
            a = self.anchor if last is None else last.b
            target = a * (1 + tail.c * _power_ratio_lower(n, tail.p))
            b = Fraction(floor_q(target * POWER_RATIO_RESOLUTION), POWER_RATIO_RESOLUTION)
            if b <= a:
                raise ValidationError(f"PowerRatio increment at n={n} is below the endpoint resolution")
            return HalfOpenInterval(a, b)
        raise ValidationError("tail cannot generate intervals")

    def intervals(self, n: int) -> list[HalfOpenInterval]:
        """The first ``n`` intervals."""
        avail = self.available
        if avail is not None and n > avail:
            raise ValidationError(f"family provides only {avail} intervals, {n} requested")
        while len(self._cache) < n:
            self._cache.append(self._next())
        return list(self._cache[:n])

    def interval(self, n: int) -> HalfOpenInterval:
        """The n-th interval, 1-based."""
        return self.intervals(n)[n - 1]


# --------------------------------------------------------------------------
# subsets of [1, +inf]


@dataclass(frozen=True)
class RatioSet:
    """An interval A inside [1, +inf] (endpoints may be +inf)."""

    lo: Extended
    hi: Extended
    lo_closed: bool = True
    hi_closed: bool = True

    def __post_init__(self) -> None:
        lo = self.lo if self.lo == INF else to_fraction(self.lo)
        hi = self.hi if self.hi == INF else to_fraction(self.hi)
        if lo < 1 or hi < lo:
            raise ValidationError(f"not a subinterval of [1, +inf]: {self.lo}, {self.hi}")
        object.__setattr__(self, "lo", lo)
        object.__setattr__(self, "hi", hi)

    def __contains__(self, value: Extended) -> bool:
        above = value > self.lo or (self.lo_closed and value == self.lo)
        below = value < self.hi or (self.hi_closed and value == self.hi)
        return above and below

    def __str__(self) -> str:
        if self.lo == self.hi:
            return "{%s}" % self.lo
        lo = "[" if self.lo_closed else "("
        hi = "]" if self.hi_closed else ")"
        fmt = lambda v: "inf" if v == INF else str(v)  # noqa: E731
        return f"{lo}{fmt(self.lo)},{fmt(self.hi)}{hi}"

    @classmethod
    def parse(cls, text: str) -> "RatioSet":
        """Parse ``{1}``, ``(1,inf]``, ``[1,2]`` and similar."""
        text = text.strip().replace(" ", "")
        m = re.fullmatch(r"\{([^,]+)\}", text)
        if m:
            v = _parse_ext(m.group(1))
            return cls(v, v)
        m = re.fullmatch(r"([\[(])([^,]+),([^,]+)([\])])", text)
        if not m:
            raise ValidationError(f"cannot parse ratio set {text!r}")
        return cls(_parse_ext(m.group(2)), _parse_ext(m.group(3)), m.group(1) == "[", m.group(4) == "]")


def _parse_ext(text: str) -> Extended:
    if text.lower() in ("inf", "+inf", "infinity", "+infinity"):
        return INF
    return to_fraction(text)


ONE = RatioSet(1, 1)
GREATER_THAN_ONE = RatioSet(1, INF, lo_closed=False)
ALL_RATIOS = RatioSet(1, INF)


# --------------------------------------------------------------------------
# reports


@dataclass(frozen=True)
class SubstantialityReport:
    partial_sum: Fraction
    verdict: str  # "substantial" | "not substantial" | "undetermined"
    n_terms: int


def substantiality_report(family: IntervalFamily, n_terms: int) -> SubstantialityReport:
    """Partial sum of (b_n/a_n - 1)**2 for n <= n_terms and the tail's divergence verdict."""
    total = sum(((iv.ratio - 1) ** 2 for iv in family.intervals(n_terms)), Fraction(0))
    tail = family.tail
    if isinstance(tail, ConstantRatio):
        verdict = "substantial"
    elif isinstance(tail, PowerRatio):
        # terms ~ c**2 n**(-2p): divergent iff 2p <= 1
        verdict = "substantial" if tail.p <= Fraction(1, 2) else "not substantial"
    else:
        verdict = "undetermined"
    return SubstantialityReport(total, verdict, n_terms)


def long_report(family: IntervalFamily, n_terms: int) -> Fraction:
    """Partial sum of |I_n|**2 / (1 + dist(0, I_n)**2); dist is a_n here."""
    if n_terms == 0:
        return Fraction(0)
    return sum((iv.length**2 / (1 + iv.a**2) for iv in family.intervals(n_terms)), Fraction(0))


@dataclass(frozen=True)
class RatioClassReport:
    finite_limsup_estimate: Fraction
    symbolic_limsup: Extended | None  # None = unknown
    member_of_A: bool | None  # verdict for the symbolic value; None if unknown
    finite_member_of_A: bool
    window: tuple[int, int]


def _tail_window(n_terms: int, divisor: int = 2) -> range:
    return range(max(1, ceil_q(Fraction(n_terms, divisor))), n_terms + 1)


def ratio_class(family: IntervalFamily, n_terms: int, A: RatioSet) -> RatioClassReport:
    window = _tail_window(n_terms)
    ivs = family.intervals(n_terms)
    estimate = max(ivs[n - 1].ratio for n in window)
    tail = family.tail
    if isinstance(tail, ConstantRatio):
        symbolic: Extended | None = tail.ratio
    elif isinstance(tail, PowerRatio):
        symbolic = Fraction(1)
    else:
        symbolic = None
    member = None if symbolic is None else symbolic in A
    return RatioClassReport(estimate, symbolic, member, estimate in A, (window.start, window.stop - 1))


# --------------------------------------------------------------------------
# splitting lemmas


@dataclass(frozen=True)
class PowerPoint:
    """The real number scale * base**exponent (base > 0, exponent rational)."""

    scale: Fraction
    base: Fraction
    exponent: Fraction

    def as_fraction(self) -> Fraction | None:
        """Exact value when it is rational, else None."""
        e = self.exponent
        if e.denominator == 1:
            return self.scale * self.base**e.numerator
        k = e.denominator
        num_root, den_root = _exact_root(self.base.numerator, k), _exact_root(self.base.denominator, k)
        if num_root is None or den_root is None:
            return None
        return self.scale * Fraction(num_root, den_root) ** e.numerator

    def to_decimal(self, digits: int | None = None) -> Decimal:
        digits = render_precision() if digits is None else digits
        with localcontext() as ctx:
            ctx.prec = digits + 10
            base = Decimal(self.base.numerator) / Decimal(self.base.denominator)
            exp = Decimal(self.exponent.numerator) / Decimal(self.exponent.denominator)
            scale = Decimal(self.scale.numerator) / Decimal(self.scale.denominator)
            value = scale * base**exp
            ctx.prec = digits
            return +value

    def __str__(self) -> str:
        exact = self.as_fraction()
        if exact is not None:
            return str(exact)
        return f"{self.scale}*({self.base})^({self.exponent})"


def _exact_root(n: int, k: int) -> int | None:
    from .exact import iroot

    r = iroot(n, k)
    return r if r**k == n else None


@dataclass(frozen=True)
class GeometricPiece:
    """(c, d] with c = a*beta**((i-1)/r), d = a*beta**(i/r), beta = b/a."""

    c: PowerPoint
    d: PowerPoint

    @property
    def ratio(self) -> PowerPoint:
        """d / c as a power of the common base."""
        return PowerPoint(Fraction(1), self.c.base, self.d.exponent - self.c.exponent)


def split_geometric(a: RationalLike, b: RationalLike, k: RationalLike) -> list[GeometricPiece]:
    """Split (a, b] into r pieces of common ratio alpha = (b/a)**(1/r), 1 < alpha <= k."""
    a, b, k = to_fraction(a), to_fraction(b), to_fraction(k)
    if not 0 < a < b:
        raise InvalidWindow(f"need 0 < a < b, got ({a}, {b}]")
    if k <= 1:
        raise InvalidK(f"k must exceed 1, got {k}")
    beta = b / a
    # r = floor(log_k beta) + 1, found exactly
    m = 0
    power = k
    while power <= beta:
        m += 1
        power *= k
    r = m + 1
    pieces = [
        GeometricPiece(PowerPoint(a, beta, Fraction(i - 1, r)), PowerPoint(a, beta, Fraction(i, r)))
        for i in range(1, r + 1)
    ]
    # alpha <= k  <=>  beta <= k**r ; alpha > 1 <=> beta > 1
    if not (beta > 1 and beta <= k**r):
        raise ConsequenceViolation("geometric split ratio out of (1, k]")
    return pieces


def split_eta(a: RationalLike, b: RationalLike, eta: RationalLike) -> list[HalfOpenInterval]:
    """Split (a, b] at a, eta*a, eta**2*a, ...; last piece truncated at b."""
    a, b, eta = to_fraction(a), to_fraction(b), to_fraction(eta)
    if not 0 < a < b:
        raise InvalidWindow(f"need 0 < a < b, got ({a}, {b}]")
    if eta <= 1:
        raise InvalidEta(f"eta must exceed 1, got {eta}")
    pieces = []
    c = a
    while c < b:
        d = min(c * eta, b)
        pieces.append(HalfOpenInterval(c, d))
        c = c * eta
    return pieces


# --------------------------------------------------------------------------
# pigeonhole selection and certification


def covers(covering: Sequence[HalfOpenInterval], target: HalfOpenInterval) -> bool:
    """Whether the union of ``covering`` contains ``target`` (overlaps allowed)."""
    reach = target.a
    for iv in sorted(covering, key=lambda iv: iv.a):
        if iv.a > reach:
            break
        reach = max(reach, iv.b)
        if reach >= target.b:
            return True
    return reach >= target.b


def pigeonhole_select(
    oracle: CountingOracle,
    covering: Sequence[HalfOpenInterval],
    target: HalfOpenInterval,
) -> int:
    """Smallest index j maximizing the window ratio over ``covering``.

    The chosen ratio is at least (F(b) - F(a)) / sum of covering lengths;
    this is checked before returning.
    """
    if not covering or not covers(covering, target):
        raise NotACovering(f"intervals do not cover {target}")
    ratios = [oracle.window_ratio(iv.a, iv.b) for iv in covering]
    best = max(range(len(ratios)), key=lambda j: (ratios[j], -j))
    bound = Fraction(oracle.count_leq(target.b) - oracle.count_leq(target.a)) / sum(iv.length for iv in covering)
    if ratios[best] < bound:
        raise ConsequenceViolation(f"pigeonhole bound failed: {ratios[best]} < {bound}")
    return best


@dataclass(frozen=True)
class EllEstimate:
    value: Fraction  # min ratio over n in [N/2, N]
    wide_value: Fraction  # same over [N/4, N], convergence diagnostic
    window: tuple[int, int]


def ell_estimate(oracle: CountingOracle, family: IntervalFamily, n_terms: int) -> EllEstimate:
    """Finite-horizon proxy for the liminf of window ratios along ``family``."""
    if n_terms < 1:
        raise ValidationError("need at least one interval")
    ivs = family.intervals(n_terms)
    wide = _tail_window(n_terms, 4)
    ratios = {n: oracle.window_ratio(ivs[n - 1].a, ivs[n - 1].b) for n in wide}
    narrow = _tail_window(n_terms, 2)
    return EllEstimate(
        min(ratios[n] for n in narrow),
        min(ratios.values()),
        (narrow.start, n_terms),
    )


@dataclass(frozen=True)
class TranscriptRow:
    n: int
    a: Fraction
    b: Fraction
    ratio: Fraction


@dataclass(frozen=True, eq=False)
class Certificate:
    """Finite-horizon evidence that ``rate`` belongs to the admissible rates of class A."""

    rate: Fraction
    family: IntervalFamily
    ratio_set: RatioSet
    start_index: int
    checked_upto: int
    substantial_verdict: str
    class_report: RatioClassReport
    class_undetermined: bool
    accepted: bool
    reason: str | None  # None | "substantiality" | "class" | "ratio"
    transcript: tuple[TranscriptRow, ...]

    @property
    def min_ratio(self) -> Fraction:
        return min(row.ratio for row in self.transcript)


def bm_certificate(
    oracle: CountingOracle,
    family: IntervalFamily,
    n_terms: int,
    rate: RationalLike,
    A: RatioSet,
    start_index: int | None = None,
) -> Certificate:
    """Check the three acceptance clauses: substantial, class membership, ratios >= rate.

    A rejection is a verdict carrying the failed clause in ``reason``; clauses
    are reported in the order substantiality, class, ratio.
    """
    rate = to_fraction(rate)
    if rate < 0:
        raise ValidationError("rate must be nonnegative")
    if n_terms < 1:
        raise ValidationError("need at least one interval")
    if start_index is None:
        start_index = max(1, ceil_q(Fraction(n_terms, 2)))
    if not 1 <= start_index <= max(1, ceil_q(Fraction(n_terms, 2))):
        raise ValidationError("start_index must lie in [1, N/2]")
    subst = substantiality_report(family, n_terms)
    cls = ratio_class(family, n_terms, A)
    if cls.member_of_A is None:
        in_class, undetermined = cls.finite_member_of_A, True
    else:
        in_class, undetermined = cls.member_of_A, False
    ivs = family.intervals(n_terms)
    transcript = tuple(
        TranscriptRow(n, ivs[n - 1].a, ivs[n - 1].b, oracle.window_ratio(ivs[n - 1].a, ivs[n - 1].b))
        for n in range(start_index, n_terms + 1)
    )
    if subst.verdict != "substantial":
        reason: str | None = "substantiality"
    elif not in_class:
        reason = "class"
    elif any(row.ratio < rate for row in transcript):
        reason = "ratio"
    else:
        reason = None
    return Certificate(
        rate=rate,
        family=family,
        ratio_set=A,
        start_index=start_index,
        checked_upto=n_terms,
        substantial_verdict=subst.verdict,
        class_report=cls,
        class_undetermined=undetermined,
        accepted=reason is None,
        reason=reason,
        transcript=transcript,
    )


def geometric_family(ratio: RationalLike, spacing: RationalLike | None = None, anchor: RationalLike = 1) -> IntervalFamily:
    """{(anchor*s**k, ratio*anchor*s**k]}, k >= 0, with s = spacing (default ratio)."""
    return IntervalFamily((), ConstantRatio(to_fraction(ratio), None if spacing is None else to_fraction(spacing)), to_fraction(anchor))
