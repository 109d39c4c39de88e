"""The eta-covering of (xi*x, x] and its exact bounds.

With f(t) = ceil(eta*t) the covering is

    b_0 = ceil(x),  a_i = eta * b_i,  b_{i+1} = ceil(a_i),

stopped at the first d with a_d <= xi*x. Right endpoints are integers, which
is what lets a window ratio at real x be transferred to an integer n.

Nothing here evaluates log(xi)/log(eta) in floating point. Its floor and
ceiling come from exact comparisons of powers of eta with xi; where the real
value itself enters a threshold, a certified enclosure is used and the
threshold is reported as an interval.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache

from .enclosures import log_ratio_bounds
from .errors import ConsequenceViolation, NoStoppingIndex, ParamError, ThresholdUnmet, ValidationError
from .exact import RationalLike, ceil_q, root_bounds, to_fraction
from .intervals import HalfOpenInterval, covers, pigeonhole_select
from .seqcore import CountingOracle


@dataclass(frozen=True)
class CoveringParams:
    x: Fraction
    xi: Fraction
    eta: Fraction

    def __post_init__(self) -> None:
        x, xi, eta = to_fraction(self.x), to_fraction(self.xi), to_fraction(self.eta)
        if x <= 0:
            raise ParamError(f"x must be positive, got {x}")
        if not 0 < xi < eta < 1:
            raise ParamError(f"need 0 < xi < eta < 1, got xi={xi}, eta={eta}")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "xi", xi)
        object.__setattr__(self, "eta", eta)


@dataclass(frozen=True)
class LogRatio:
    """log(xi)/log(eta) described exactly: floor, ceiling, integrality, enclosure."""

    floor: int
    ceil: int
    integer: bool
    lo: Fraction
    hi: Fraction


@lru_cache(maxsize=4096)
def log_ratio(xi: Fraction, eta: Fraction) -> LogRatio:
    # xi < eta < 1, so the ratio exceeds 1; p = max{k : eta**k >= xi}
    p = 1
    power = eta
    while power * eta >= xi:
        power *= eta
        p += 1
    integer = power == xi
    q = p if integer else p + 1
    lo, hi = log_ratio_bounds(xi, eta)
    lo, hi = max(lo, Fraction(p)), min(hi, Fraction(q))
    return LogRatio(p, q, integer, lo, hi)


def f_iterate(t: Fraction, eta: Fraction, m: int) -> Fraction:
    """f^m(t) with f(t) = ceil(eta*t); f^0(t) = t."""
    value: Fraction = Fraction(t)
    for _ in range(m):
        value = Fraction(ceil_q(eta * value))
    return value


def ceil_eta_iterate(x: RationalLike, eta: RationalLike, m: int) -> int:
    """(f^m o ceil)(x)."""
    x, eta = to_fraction(x), to_fraction(eta)
    if x <= 0 or not 0 < eta < 1 or m < 0:
        raise ValidationError("need x > 0, 0 < eta < 1, m >= 0")
    value = ceil_q(x)
    for _ in range(m):
        value = ceil_q(eta * value)
    return value


def r_threshold(eta: RationalLike, t: int) -> Fraction:
    """(1 - eta**(t+1)) / (eta**(t-1) * (1 - eta)**2) at integer t >= 1."""
    eta = to_fraction(eta)
    if not 0 < eta < 1 or t < 1 or int(t) != t:
        raise ValidationError("r is exposed at integers t >= 1 with 0 < eta < 1")
    t = int(t)
    return (1 - eta ** (t + 1)) / (eta ** (t - 1) * (1 - eta) ** 2)


def lemma1_threshold(xi: RationalLike, eta: RationalLike) -> Fraction:
    """(1 - eta**2 * xi) / (xi * (1 - eta)**2); equals r(log xi/log eta + 1)."""
    xi, eta = to_fraction(xi), to_fraction(eta)
    return (1 - eta**2 * xi) / (xi * (1 - eta) ** 2)


@dataclass(frozen=True)
class Threshold:
    """A real threshold known to lie in [lower, upper]."""

    lower: Fraction
    upper: Fraction

    def met_by(self, x: Fraction) -> bool | None:
        """True/False when decidable from the enclosure, None otherwise."""
        if x >= self.upper:
            return True
        if x < self.lower:
            return False
        return None

    def __float__(self) -> float:
        return float((self.lower + self.upper) / 2)


def m_threshold(xi: RationalLike, eta: RationalLike) -> Threshold:
    """max of lemma1_threshold and (L + 2) / (eta**2 * xi * (1 - eta)), L = log xi/log eta."""
    xi, eta = to_fraction(xi), to_fraction(eta)
    _check_pair(xi, eta)
    lr = log_ratio(xi, eta)
    first = lemma1_threshold(xi, eta)
    denom = eta**2 * xi * (1 - eta)
    if lr.integer:
        second = (lr.floor + 2) / denom
        value = max(first, second)
        return Threshold(value, value)
    return Threshold(max(first, (lr.lo + 2) / denom), max(first, (lr.hi + 2) / denom))


@dataclass(frozen=True)
class PredictionThreshold:
    value: Fraction
    integer_case: bool  # log xi / log eta is an integer: the {q-1, q} branch applies
    p: int


def eq35_threshold(xi: RationalLike, eta: RationalLike) -> PredictionThreshold:
    """Lower bound on x above which the stopping index is pinned down.

    Non-integer ratio: max(lemma1_threshold, (p+2)/(xi - eta**(p+1)), 1/(eta**p - xi)).
    Integer ratio q: max(lemma1_threshold, (q+2)/(xi*(1-eta))), flagged ``integer_case``.
    """
    xi, eta = to_fraction(xi), to_fraction(eta)
    _check_pair(xi, eta)
    lr = log_ratio(xi, eta)
    first = lemma1_threshold(xi, eta)
    p = lr.floor
    if lr.integer:
        return PredictionThreshold(max(first, (p + 2) / (xi * (1 - eta))), True, p)
    value = max(first, (p + 2) / (xi - eta ** (p + 1)), 1 / (eta**p - xi))
    return PredictionThreshold(value, False, p)


def _check_pair(xi: Fraction, eta: Fraction) -> None:
    if not 0 < xi < eta < 1:
        raise ParamError(f"need 0 < xi < eta < 1, got xi={xi}, eta={eta}")


@dataclass(frozen=True)
class EtaCovering:
    params: CoveringParams
    b: tuple[int, ...]
    a: tuple[Fraction, ...]
    d: int
    thresholds_met: dict = field(compare=False)

    def intervals(self) -> list[HalfOpenInterval]:
        return [HalfOpenInterval(a, b) for a, b in zip(self.a, self.b)]

    @property
    def total_length(self) -> Fraction:
        return sum((Fraction(b) - a for a, b in zip(self.a, self.b)), Fraction(0))


def thresholds_for(params: CoveringParams) -> dict:
    xi, eta, x = params.xi, params.eta, params.x
    lr = log_ratio(xi, eta)
    return {
        "r_q": x >= r_threshold(eta, lr.ceil),
        "lemma1": x >= lemma1_threshold(xi, eta),
        "M": m_threshold(xi, eta).met_by(x),
        "prop17": x >= eq35_threshold(xi, eta).value,
    }


def build_eta_covering(params: CoveringParams) -> EtaCovering:
    """Run the ceiling recursion until a_d <= xi*x.

    Below the thresholds the construction still runs; ``thresholds_met``
    records which guarantees apply.
    """
    x, xi, eta = params.x, params.xi, params.eta
    cut = xi * x
    b = [ceil_q(x)]
    a = [eta * b[0]]
    while a[-1] > cut:
        nxt = ceil_q(a[-1])
        if nxt == b[-1]:
            raise NoStoppingIndex(f"recursion stalls at b = {nxt} with a = {a[-1]} > xi*x = {cut}")
        b.append(nxt)
        a.append(eta * nxt)
    return EtaCovering(params, tuple(b), tuple(a), len(a) - 1, thresholds_for(params))


# --------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class Check:
    name: str
    status: str  # "pass" | "fail" | "n/a"
    detail: str = ""


@dataclass(frozen=True)
class CoveringVerification:
    checks: tuple[Check, ...]

    @property
    def failures(self) -> list[Check]:
        return [c for c in self.checks if c.status == "fail"]

    @property
    def ok(self) -> bool:
        return not self.failures

    def status(self, name: str) -> str:
        for c in self.checks:
            if c.name == name:
                return c.status
        raise KeyError(name)


def _extended(cov: EtaCovering, upto: int) -> tuple[list[int], list[Fraction]]:
    b, a = list(cov.b), list(cov.a)
    eta = cov.params.eta
    while len(b) <= upto:
        b.append(ceil_q(a[-1]))
        a.append(eta * b[-1])
    return b, a


def _chain_check(cov: EtaCovering) -> Check:
    x, xi, eta = cov.params.x, cov.params.xi, cov.params.eta
    q = log_ratio(xi, eta).ceil
    if x < r_threshold(eta, q):
        return Check("lemma4_chain", "n/a", f"x below r({q})")
    last = min(cov.d + 1, q)
    b, a = _extended(cov, last)
    for i in range(1, last + 1):
        chain = (
            eta ** (i + 1) * x,
            a[i],
            eta**i * x,
            a[i - 1],
            Fraction(b[i]),
            eta ** (i - 1) * x,
            Fraction(b[i - 1]),
        )
        if any(lo > hi for lo, hi in zip(chain, chain[1:])):
            return Check("lemma4_chain", "fail", f"chain broken at i={i}")
    return Check("lemma4_chain", "pass", f"i=1..{last}")


def verify_covering(cov: EtaCovering) -> CoveringVerification:
    """Exact checks of every bound attached to the covering."""
    x, xi, eta = cov.params.x, cov.params.xi, cov.params.eta
    lr = log_ratio(xi, eta)
    cut = xi * x
    d = cov.d
    checks = []

    rec_ok = cov.b[0] == ceil_q(x) and all(cov.a[i] == eta * cov.b[i] for i in range(d + 1))
    rec_ok = rec_ok and all(cov.b[i + 1] == ceil_q(cov.a[i]) for i in range(d))
    checks.append(Check("recursion", "pass" if rec_ok else "fail"))

    minimal = cov.a[d] <= cut and (d == 0 or cov.a[d - 1] > cut)
    checks.append(Check("d_minimality", "pass" if minimal else "fail", f"d={d}"))

    checks.append(_chain_check(cov))

    if x >= r_threshold(eta, lr.ceil):
        checks.append(Check("lemma3_d_range", "pass" if 1 <= d <= lr.ceil else "fail", f"d={d}, q={lr.ceil}"))
    else:
        checks.append(Check("lemma3_d_range", "n/a", f"x below r({lr.ceil})"))

    if x >= lemma1_threshold(xi, eta):
        checks.append(Check("lemma1_d_le_ceil", "pass" if d <= lr.ceil else "fail", f"d={d}, ceil={lr.ceil}"))
        # d <= L + 1  <=>  eta**(d-1) >= xi
        weak = d == 0 or eta ** (d - 1) >= xi
        checks.append(Check("lemma1_d_le_ratio_plus_one", "pass" if weak else "fail"))
    else:
        checks.append(Check("lemma1_d_le_ceil", "n/a", "x below threshold"))
        checks.append(Check("lemma1_d_le_ratio_plus_one", "n/a", "x below threshold"))

    met = m_threshold(xi, eta).met_by(x)
    if met:
        bound = (1 - xi * eta**3) * x
        total = cov.total_length
        checks.append(Check("lemma5_length", "pass" if total <= bound else "fail", f"{total} <= {bound}"))
    else:
        checks.append(Check("lemma5_length", "n/a", "x below M" if met is False else "x inside M enclosure"))

    covered = covers(cov.intervals(), HalfOpenInterval(cut, x))
    checks.append(Check("coverage", "pass" if covered else "fail"))

    overlap_ok = all(0 <= cov.b[i] - cov.a[i - 1] <= 1 for i in range(1, d + 1))
    checks.append(Check("overlap", "pass" if overlap_ok else "fail"))

    thr = eq35_threshold(xi, eta)
    if x >= thr.value:
        pred = predicted_d(cov.params)
        checks.append(Check("prop17_containment", "pass" if d in pred else "fail", f"d={d}, predicted={sorted(pred)}"))
    else:
        checks.append(Check("prop17_containment", "n/a", "x below threshold"))
    return CoveringVerification(tuple(checks))


def predicted_d(params: CoveringParams) -> frozenset[int]:
    """Candidate stopping indices.

    Above the applicable threshold: {p} (non-integer ratio) or {q-1, q}
    (integer ratio q). Otherwise the weaker range {1, ..., ceil(ratio)}.
    """
    lr = log_ratio(params.xi, params.eta)
    thr = eq35_threshold(params.xi, params.eta)
    if params.x >= thr.value:
        if thr.integer_case:
            return frozenset({lr.floor - 1, lr.floor})
        return frozenset({lr.floor})
    return frozenset(range(1, lr.ceil + 1))


@dataclass(frozen=True)
class DegeneracyRecord:
    index: int
    eta_equals_b1_over_b0: bool
    x_equals_b0: bool
    a_closed_form: bool


def degenerate_check(cov: EtaCovering) -> DegeneracyRecord | None:
    """Detect eta**(i+1) * x == a_i for some 1 <= i <= d and verify its consequences.

    The equality at i forces it at every smaller index, so the largest such i
    is reported. At i = 0 alone (x an integer) the conclusions do not follow
    and no record is returned.
    """
    x, eta = cov.params.x, cov.params.eta
    hits = [i for i in range(1, cov.d + 1) if eta ** (i + 1) * x == cov.a[i]]
    if not hits:
        return None
    i = max(hits)
    b0, b1 = cov.b[0], cov.b[1]
    r1 = eta == Fraction(b1, b0)
    r2 = x == b0
    r3 = all(cov.a[j] == Fraction(b1 ** (j + 1), b0**j) for j in range(i + 1))
    if not (r1 and r2 and r3):
        raise ConsequenceViolation(f"degenerate at i={i} but consequences fail: {r1}, {r2}, {r3}")
    return DegeneracyRecord(i, r1, r2, r3)


@dataclass(frozen=True)
class Witness:
    n: int
    index: int
    ratio: Fraction  # (F(n) - F(eta n)) / ((1 - eta) n)
    bound: Fraction  # (F(x) - F(xi x)) / ((1 - xi eta**3) x)
    covering: EtaCovering


def witness_integer(oracle: CountingOracle, params: CoveringParams) -> Witness:
    """An integer n whose eta-window ratio dominates the xi-window ratio at x.

    Built from the covering by pigeonhole; the inequality is checked exactly.
    """
    x, xi, eta = params.x, params.xi, params.eta
    met = m_threshold(xi, eta).met_by(x)
    if not met:
        raise ThresholdUnmet(f"x = {x} is not certified >= M(xi, eta) ~ {float(m_threshold(xi, eta)):.6g}")
    cov = build_eta_covering(params)
    j = pigeonhole_select(oracle, cov.intervals(), HalfOpenInterval(xi * x, x))
    n = cov.b[j]
    ratio = Fraction(oracle.count_leq(n) - oracle.count_leq(eta * n)) / ((1 - eta) * n)
    bound = Fraction(oracle.count_leq(x) - oracle.count_leq(xi * x)) / ((1 - xi * eta**3) * x)
    if ratio < bound:
        raise ConsequenceViolation(f"witness n={n}: {ratio} < {bound}")
    return Witness(n, j, ratio, bound, cov)


DELTA_TOLERANCE = Fraction(1, 10**12)


def delta_for(xi: RationalLike, eps: RationalLike) -> Fraction:
    """Rational delta >= xi such that every eta in (delta, 1) has 1 - xi*eta**3 < (1 - xi)/(1 - eps).

    When eps < xi the exact threshold is the cube root of (xi - eps)/(xi (1 - eps));
    a rational upper bound within 1e-12 of it is returned.
    """
    xi, eps = to_fraction(xi), to_fraction(eps)
    if not (0 < xi < 1 and 0 < eps < 1):
        raise ValidationError("need xi and eps in (0, 1)")
    if eps >= xi:
        return xi
    target = (xi - eps) / (xi * (1 - eps))
    # bracket width 2**-48 is well inside the tolerance
    _, upper = root_bounds(target, 3, bits=48)
    if upper**3 < target:
        raise ConsequenceViolation("cube-root bound not certified")
    return max(xi, upper)
