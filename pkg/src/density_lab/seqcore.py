"""Increasing real sequences and their counting functions.

A sequence is described by one of the ``*Spec`` dataclasses below and turned
into a :class:`CountingOracle` by :func:`build_sequence`. The oracle evaluates

    F(t) = #{k : lambda_k <= t}   (t > 0),   F(0) = 0

exactly. Finite-prefix variants carry a horizon beyond which evaluation is
refused instead of extrapolated.
"""

from __future__ import annotations

import bisect
from dataclasses import dataclass, field
from fractions import Fraction
from math import lcm
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np

from .errors import HorizonExceeded, InvalidWindow, ValidationError
from .exact import RationalLike, floor_q, to_fraction

_INT64_SAFE = 1 << 62


@dataclass(frozen=True)
class ArithmeticProgression:
    """lambda_n = offset + n * step for n = 1, 2, ..."""

    step: Fraction
    offset: Fraction = Fraction(0)

    def __post_init__(self) -> None:
        object.__setattr__(self, "step", to_fraction(self.step))
        object.__setattr__(self, "offset", to_fraction(self.offset))


@dataclass(frozen=True)
class PolynomialValues:
    """lambda_n = c0 + c1*n + c2*n**2 + ... for n = 1, 2, ..., realized up to ``horizon``."""

    coefficients: tuple[int, ...]
    horizon: Fraction = Fraction(10**6)

    def __post_init__(self) -> None:
        object.__setattr__(self, "coefficients", tuple(int(c) for c in self.coefficients))
        object.__setattr__(self, "horizon", to_fraction(self.horizon))


@dataclass(frozen=True)
class PrimesUpTo:
    bound: int


@dataclass(frozen=True)
class BlockIntegers:
    """The integers lying in a union of half-open ranges (lo, hi]."""

    ranges: tuple[tuple[Fraction, Fraction], ...]

    def __post_init__(self) -> None:
        object.__setattr__(
            self,
            "ranges",
            tuple((to_fraction(lo), to_fraction(hi)) for lo, hi in self.ranges),
        )

    @classmethod
    def geometric(cls, base: int = 4, ratio: int = 2, k_max: int = 8, k_min: int = 0) -> "BlockIntegers":
        """Blocks (base**k, ratio * base**k] for k_min <= k <= k_max."""
        return cls(tuple((Fraction(base**k), Fraction(ratio * base**k)) for k in range(k_min, k_max + 1)))


@dataclass(frozen=True)
class ExplicitList:
    """A finite strictly increasing prefix.

    ``horizon`` defaults to the last term. With ``tail_step`` set, the sequence
    continues as last + step, last + 2*step, ... and the horizon is unbounded.
    """

    terms: tuple[Fraction, ...]
    horizon: Fraction | None = None
    tail_step: Fraction | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "terms", tuple(to_fraction(t) for t in self.terms))
        if self.horizon is not None:
            object.__setattr__(self, "horizon", to_fraction(self.horizon))
        if self.tail_step is not None:
            object.__setattr__(self, "tail_step", to_fraction(self.tail_step))


@dataclass(frozen=True)
class FileBacked:
    path: Path
    horizon: Fraction | None = None


SequenceSpec = Union[ArithmeticProgression, PolynomialValues, PrimesUpTo, BlockIntegers, ExplicitList, FileBacked]


def _floor_affine(nums: np.ndarray, mul: int, sub: int, div: int) -> np.ndarray:
    """floor((nums * mul - sub) / div), exact, int64 when it cannot overflow."""
    peak = int(np.max(np.abs(nums))) if nums.size else 0
    if peak * abs(mul) + abs(sub) < _INT64_SAFE and abs(div) < _INT64_SAFE:
        arr = nums.astype(np.int64, copy=False)
        return (arr * mul - sub) // div
    obj = nums.astype(object)
    out = (obj * mul - sub) // div
    return out


@dataclass(frozen=True, eq=False)
class CountingOracle:
    """Exact evaluator of the counting function of a sequence.

    Either ``progression`` is set (closed form), or the realized terms are
    stored as sorted integers ``scaled`` with every term equal to
    ``scaled[k] / scale``; an optional arithmetic tail continues after the
    last stored term.
    """

    spec: SequenceSpec
    horizon: Fraction | None
    scaled: np.ndarray = field(repr=False, default_factory=lambda: np.zeros(0, dtype=np.int64))
    scale: int = 1
    progression: ArithmeticProgression | None = None
    tail_step: Fraction | None = None

    @property
    def terms(self) -> list[Fraction]:
        """Realized terms (finite variants only)."""
        return [Fraction(int(v), self.scale) for v in self.scaled]

    def _check(self, t: Fraction) -> None:
        if t < 0:
            raise InvalidWindow(f"negative argument {t}")
        if self.horizon is not None and t > self.horizon:
            raise HorizonExceeded(f"t = {t} beyond horizon {self.horizon}")

    def count_leq(self, t: RationalLike) -> int:
        t = to_fraction(t)
        self._check(t)
        if t == 0:
            return 0
        if self.progression is not None:
            q, r = self.progression.step, self.progression.offset
            return max(0, floor_q((t - r) / q))
        k = floor_q(t * self.scale)
        count = bisect.bisect_right(self.scaled, k) if self.scaled.size else 0
        if self.tail_step is not None and self.scaled.size:
            last = Fraction(int(self.scaled[-1]), self.scale)
            if t > last:
                count += floor_q((t - last) / self.tail_step)
        return count

    def count_leq_scaled(self, nums: np.ndarray, den: int) -> np.ndarray:
        """Vectorized F(nums / den) for nonnegative integer numerators."""
        nums = np.asarray(nums)
        if nums.size == 0:
            return np.zeros(0, dtype=np.int64)
        if int(np.min(nums)) < 0:
            raise InvalidWindow("negative argument")
        if self.horizon is not None and Fraction(int(np.max(nums)), den) > self.horizon:
            raise HorizonExceeded(f"t = {Fraction(int(np.max(nums)), den)} beyond horizon {self.horizon}")
        if self.progression is not None:
            q, r = self.progression.step, self.progression.offset
            # (N/D - r)/q = (N * r.den - r.num * D) * q.den / (D * r.den * q.num)
            out = _floor_affine(
                nums,
                r.denominator * q.denominator,
                r.numerator * den * q.denominator,
                den * r.denominator * q.numerator,
            )
            out = np.maximum(out, 0)
        else:
            keys = _floor_affine(nums, self.scale, 0, den)
            if keys.dtype == object or self.scaled.dtype == object:
                out = np.array([bisect.bisect_right(self.scaled, int(k)) for k in keys], dtype=np.int64)
            else:
                out = np.searchsorted(self.scaled, keys, side="right").astype(np.int64)
            if self.tail_step is not None and self.scaled.size:
                last_num = int(self.scaled[-1])
                step = self.tail_step
                # floor((N/D - last/scale) / step) where positive
                extra = _floor_affine(
                    nums,
                    self.scale * step.denominator,
                    last_num * den * step.denominator,
                    den * self.scale * step.numerator,
                )
                out = out + np.maximum(extra, 0)
        out = np.where(nums == 0, 0, out)
        if out.dtype == object and int(np.max(out)) < _INT64_SAFE:
            out = out.astype(np.int64)
        return out

    def window_ratio(self, a: RationalLike, b: RationalLike) -> Fraction:
        """(F(b) - F(a)) / (b - a) on the window (a, b]."""
        a, b = to_fraction(a), to_fraction(b)
        if a < 0 or a >= b:
            raise InvalidWindow(f"invalid window ({a}, {b}]")
        return Fraction(self.count_leq(b) - self.count_leq(a)) / (b - a)


def _validate_terms(terms: Sequence[Fraction]) -> None:
    if terms and terms[0] < 0:
        raise ValidationError(f"first term {terms[0]} is negative")
    for prev, cur in zip(terms, terms[1:]):
        if cur <= prev:
            kind = "repeated" if cur == prev else "decreasing"
            raise ValidationError(f"{kind} term: {prev} followed by {cur}")


def _table(terms: Sequence[Fraction]) -> tuple[np.ndarray, int]:
    scale = lcm(*(t.denominator for t in terms)) if terms else 1
    values = [t.numerator * (scale // t.denominator) for t in terms]
    if values and max(values) >= _INT64_SAFE:
        return np.array(values, dtype=object), scale
    return np.array(values, dtype=np.int64), scale


def primes_up_to(bound: int) -> np.ndarray:
    """Sieve of Eratosthenes."""
    if bound < 2:
        return np.zeros(0, dtype=np.int64)
    sieve = np.ones(bound + 1, dtype=bool)
    sieve[:2] = False
    for p in range(2, int(bound**0.5) + 1):
        if sieve[p]:
            sieve[p * p :: p] = False
    return np.flatnonzero(sieve).astype(np.int64)


def parse_sequence_file(path: Path | str) -> list[Fraction]:
    """Read one term per line; ``#`` lines and blank lines are skipped."""
    terms = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            text = line.strip()
            if not text or text.startswith("#"):
                continue
            try:
                terms.append(to_fraction(text))
            except ValidationError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from exc
    return terms


def build_sequence(spec: SequenceSpec) -> CountingOracle:
    """Validate ``spec`` and return its counting oracle."""
    if isinstance(spec, ArithmeticProgression):
        if spec.step <= 0:
            raise ValidationError("step must be positive")
        if spec.offset < 0:
            raise ValidationError("offset must be nonnegative")
        return CountingOracle(spec, None, progression=spec)

    if isinstance(spec, PolynomialValues):
        coeffs = spec.coefficients
        while len(coeffs) > 1 and coeffs[-1] == 0:
            coeffs = coeffs[:-1]
        if len(coeffs) < 2 or coeffs[-1] <= 0:
            raise ValidationError("polynomial must have degree >= 1 and positive leading coefficient")
        values: list[Fraction] = []
        n = 1
        while True:
            v = sum(c * n**i for i, c in enumerate(coeffs))
            if v > spec.horizon:
                if values and v <= values[-1]:
                    raise ValidationError("polynomial values are not increasing")
                break
            values.append(Fraction(v))
            n += 1
        _validate_terms(values)
        scaled, scale = _table(values)
        return CountingOracle(spec, spec.horizon, scaled=scaled, scale=scale)

    if isinstance(spec, PrimesUpTo):
        if spec.bound < 1:
            raise ValidationError("bound must be a positive integer")
        return CountingOracle(spec, Fraction(spec.bound), scaled=primes_up_to(spec.bound))

    if isinstance(spec, BlockIntegers):
        if not spec.ranges:
            raise ValidationError("no ranges given")
        ints: set[int] = set()
        for lo, hi in spec.ranges:
            if lo < 0 or hi <= lo:
                raise ValidationError(f"invalid range ({lo}, {hi}]")
            ints.update(range(floor_q(lo) + 1, floor_q(hi) + 1))
        horizon = max(hi for _, hi in spec.ranges)
        arr = np.array(sorted(ints), dtype=np.int64)
        return CountingOracle(spec, horizon, scaled=arr)

    if isinstance(spec, (ExplicitList, FileBacked)):
        if isinstance(spec, FileBacked):
            terms = parse_sequence_file(spec.path)
            tail = None
        else:
            terms = list(spec.terms)
            tail = spec.tail_step
        if not terms:
            raise ValidationError("empty sequence")
        _validate_terms(terms)
        if tail is not None and tail <= 0:
            raise ValidationError("tail step must be positive")
        horizon = None if tail is not None else (spec.horizon if spec.horizon is not None else terms[-1])
        if horizon is not None and horizon < terms[-1]:
            raise ValidationError("declared horizon lies before the last term")
        scaled, scale = _table(terms)
        return CountingOracle(spec, horizon, scaled=scaled, scale=scale, tail_step=tail)

    raise ValidationError(f"unknown sequence spec {spec!r}")


def count_leq(oracle: CountingOracle, t: RationalLike) -> int:
    return oracle.count_leq(t)


def window_ratio(oracle: CountingOracle, a: RationalLike, b: RationalLike) -> Fraction:
    return oracle.window_ratio(a, b)


def naive_count(terms: Iterable[Fraction], t: Fraction) -> int:
    """Linear scan; independent reference for tests."""
    if t == 0:
        return 0
    return sum(1 for x in terms if x <= t)


def block_sequence(k_max: int = 8) -> CountingOracle:
    """Integers in the union of (4**k, 2 * 4**k], 0 <= k <= k_max."""
    return build_sequence(BlockIntegers.geometric(4, 2, k_max))


def scaled_sequence(oracle: CountingOracle, c: RationalLike) -> CountingOracle:
    """The sequence c * Lambda for rational c > 0."""
    c = to_fraction(c)
    if c <= 0:
        raise ValidationError("scale factor must be positive")
    if oracle.progression is not None:
        p = oracle.progression
        return build_sequence(ArithmeticProgression(p.step * c, p.offset * c))
    terms = [t * c for t in oracle.terms]
    horizon = None if oracle.horizon is None else oracle.horizon * c
    tail = None if oracle.tail_step is None else oracle.tail_step * c
    return build_sequence(ExplicitList(tuple(terms), horizon=horizon if tail is None else None, tail_step=tail))


__all__ = [
    "ArithmeticProgression",
    "PolynomialValues",
    "PrimesUpTo",
    "BlockIntegers",
    "ExplicitList",
    "FileBacked",
    "SequenceSpec",
    "CountingOracle",
    "build_sequence",
    "count_leq",
    "window_ratio",
    "naive_count",
    "block_sequence",
    "scaled_sequence",
    "primes_up_to",
    "parse_sequence_file",
]
