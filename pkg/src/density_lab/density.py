"""Finite-horizon estimates of the upper Polya density and related checks.

The upper Polya density is the limit as xi -> 1- of

    limsup_{x -> inf} (F(x) - F(xi x)) / ((1 - xi) x),

and it also equals the supremum of those limsups over xi < 1. Here the limsup
becomes a maximum over sampled x in a tail window [T0, T], and the xi limit
becomes a maximum over a finite xi grid. Every ratio is evaluated exactly.
Floats are used only to shortlist argmax candidates, which are then compared
as fractions.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .enclosures import exp_neg_rational, one_minus_exp_neg_bounds
from .errors import EmptyGrid, InsufficientSamples, InvalidWindow, ParamError, TooFewWitnesses, ValidationError
from .exact import RationalLike, ceil_q, floor_q, to_fraction
from .intervals import (
    GREATER_THAN_ONE,
    Certificate,
    ConstantRatio,
    EllEstimate,
    HalfOpenInterval,
    IntervalFamily,
    bm_certificate,
    ell_estimate,
)
from .seqcore import ArithmeticProgression, CountingOracle

# --------------------------------------------------------------------------
# configuration


@dataclass(frozen=True)
class RealSampling:
    """Geometric grid x_j = T0 * gamma**j <= T, rounded down to multiples of 1/resolution.

    With ``merge_integers`` every integer in [T0, T] is added as well.
    """

    gamma: Fraction = Fraction(1001, 1000)
    resolution: int = 1024
    merge_integers: bool = True

    def __post_init__(self) -> None:
        gamma = to_fraction(self.gamma)
        if gamma <= 1:
            raise ParamError("gamma must exceed 1")
        if self.resolution < 1:
            raise ParamError("resolution must be a positive integer")
        object.__setattr__(self, "gamma", gamma)


@dataclass(frozen=True)
class IntegerSampling:
    """Every integer in [T0, T]."""


@dataclass(frozen=True)
class ExplicitSampling:
    """A user-supplied list of sample points."""

    points: tuple[Fraction, ...]

    def __post_init__(self) -> None:
        pts = tuple(sorted({to_fraction(p) for p in self.points}))
        if pts and pts[0] <= 0:
            raise ParamError("sample points must be positive")
        object.__setattr__(self, "points", pts)


Sampling = Union[RealSampling, IntegerSampling, ExplicitSampling]


@dataclass(frozen=True)
class EstimatorConfig:
    """Tail window, xi grid and sampling scheme.

    ``boundary_correction`` subtracts one from every window count before
    dividing (clipped at zero). This does not change any limsup, but it removes the
    +1/((1 - xi) x) overshoot that a single boundary point causes at
    moderate x. ``raw_estimate`` in the report keeps the uncorrected value.
    """

    xi_grid: tuple[Fraction, ...]
    t0: Fraction
    t: Fraction
    sampling: Sampling = field(default_factory=RealSampling)
    boundary_correction: bool = True
    tau: Fraction = Fraction(1, 100)
    witness_rule: str = "near-max"

    def __post_init__(self) -> None:
        grid = tuple(to_fraction(x) for x in self.xi_grid)
        if not grid:
            raise EmptyGrid("xi grid is empty")
        if any(not 0 < x < 1 for x in grid):
            raise ParamError("xi values must lie in (0, 1)")
        t0, t = to_fraction(self.t0), to_fraction(self.t)
        if t0 <= 0 or t0 >= t:
            raise InvalidWindow(f"need 0 < T0 < T, got T0={t0}, T={t}")
        tau = to_fraction(self.tau)
        if tau < 0:
            raise ParamError("tau must be nonnegative")
        if self.witness_rule not in ("near-max", "top-decile"):
            raise ParamError(f"unknown witness rule {self.witness_rule!r}")
        object.__setattr__(self, "xi_grid", tuple(sorted(set(grid))))
        object.__setattr__(self, "t0", t0)
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "tau", tau)


MAX_SAMPLES = 10**7


def _estimated_count(config: EstimatorConfig) -> float:
    t0, t, s = float(config.t0), float(config.t), config.sampling
    if isinstance(s, ExplicitSampling):
        return len(s.points)
    count = t - t0 + 1 if isinstance(s, IntegerSampling) or s.merge_integers else 0.0
    if isinstance(s, RealSampling):
        count += np.log(t / t0) / np.log(float(s.gamma)) + 1
    return count


def sample_points(config: EstimatorConfig) -> tuple[np.ndarray, int]:
    """Sampled x as (numerators, common denominator), sorted and distinct."""
    if _estimated_count(config) > MAX_SAMPLES:
        raise ParamError(f"more than {MAX_SAMPLES} sample points requested; narrow [T0, T] or coarsen the grid")
    t0, t, s = config.t0, config.t, config.sampling
    if isinstance(s, IntegerSampling):
        lo = -((-t0.numerator) // t0.denominator)
        nums = np.arange(lo, floor_q(t) + 1, dtype=np.int64)
        return nums, 1
    if isinstance(s, ExplicitSampling):
        pts = [p for p in s.points if t0 <= p <= t]
        den = 1
        for p in pts:
            den = den * p.denominator // np.gcd(den, p.denominator)
        nums = np.array([int(p * den) for p in pts], dtype=object if den > 1 << 20 else np.int64)
        return nums, int(den)
    den = s.resolution
    lo = -((-(t0.numerator * den)) // t0.denominator)
    hi = floor_q(t * den)
    geo = []
    k = lo
    while k <= hi:
        geo.append(k)
        nxt = floor_q(k * s.gamma)
        k = max(nxt, k + 1)
    nums = np.array(geo, dtype=np.int64)
    if s.merge_integers:
        first = -((-lo) // den)
        ints = np.arange(first, hi // den + 1, dtype=np.int64) * den
        nums = np.union1d(nums, ints)
    return nums, den


# --------------------------------------------------------------------------
# window-ratio sweep


@dataclass(frozen=True)
class _Sweep:
    nums: np.ndarray
    den: int
    diffs: np.ndarray  # F(x) - F(rho x)


def _sweep(oracle: CountingOracle, nums: np.ndarray, den: int, rho: Fraction) -> _Sweep:
    upper = oracle.count_leq_scaled(nums, den)
    lower = oracle.count_leq_scaled(nums * rho.numerator, den * rho.denominator)
    return _Sweep(nums, den, upper - lower)


def _best(sweep: _Sweep, rho: Fraction, shift: int, mask: np.ndarray | None = None) -> tuple[Fraction, Fraction] | None:
    """Exact max over sampled x of max(diff - shift, 0) / ((1 - rho) x), smallest argmax."""
    idx = np.arange(sweep.nums.size) if mask is None else np.flatnonzero(mask)
    if idx.size == 0:
        return None
    counts = np.maximum(sweep.diffs[idx].astype(np.float64) - shift, 0.0)
    xs = sweep.nums[idx].astype(np.float64) / sweep.den
    approx = counts / (float(1 - rho) * xs)
    top = float(np.max(approx))
    cand = idx[approx >= top * (1 - 1e-9) - 1e-300]
    best_val: Fraction | None = None
    best_x: Fraction | None = None
    for i in cand:
        x = Fraction(int(sweep.nums[i]), sweep.den)
        val = Fraction(max(int(sweep.diffs[i]) - shift, 0)) / ((1 - rho) * x)
        if best_val is None or val > best_val:
            best_val, best_x = val, x
    return best_val, best_x


def _approx_ratios(sweep: _Sweep, rho: Fraction, shift: int) -> np.ndarray:
    counts = np.maximum(sweep.diffs.astype(np.float64) - shift, 0.0)
    return counts / (float(1 - rho) * sweep.nums.astype(np.float64) / sweep.den)


# --------------------------------------------------------------------------
# Polya estimate


@dataclass(frozen=True)
class XiEstimate:
    xi: Fraction
    estimate: Fraction
    argmax: Fraction
    raw_estimate: Fraction
    raw_argmax: Fraction
    drift_estimate: Fraction | None  # same estimate restricted to [4 T0, T]


@dataclass(frozen=True)
class DensityReport:
    """Per-xi tail maxima and their maximum over the grid.

    ``estimate`` is a lower-bound-style estimate: for the true functions the
    limsup at any single xi already bounds the density from below.
    """

    config: EstimatorConfig
    per_xi: tuple[XiEstimate, ...]
    estimate: Fraction
    argmax_xi: Fraction
    argmax_x: Fraction
    n_points: int

    def for_xi(self, xi: RationalLike) -> XiEstimate:
        xi = to_fraction(xi)
        for row in self.per_xi:
            if row.xi == xi:
                return row
        raise KeyError(xi)


def _check_horizon(oracle: CountingOracle, t: Fraction) -> None:
    oracle.count_leq(t)  # raises HorizonExceeded


def polya_estimate(oracle: CountingOracle, config: EstimatorConfig) -> DensityReport:
    _check_horizon(oracle, config.t)
    nums, den = sample_points(config)
    if nums.size == 0:
        raise EmptyGrid("no sample points in [T0, T]")
    shift = 1 if config.boundary_correction else 0
    drift_mask = nums >= ceil_q(4 * config.t0 * den)
    rows = []
    for xi in config.xi_grid:
        sw = _sweep(oracle, nums, den, xi)
        est, arg = _best(sw, xi, shift)
        raw, raw_arg = _best(sw, xi, 0)
        drift = _best(sw, xi, shift, drift_mask)
        rows.append(XiEstimate(xi, est, arg, raw, raw_arg, None if drift is None else drift[0]))
    # first grid entry wins ties
    top = max(rows, key=lambda r: r.estimate)
    return DensityReport(config, tuple(rows), top.estimate, top.xi, top.argmax, int(nums.size))


# --------------------------------------------------------------------------
# g and the weighted Fekete inequality


@dataclass(frozen=True)
class GSample:
    s: Fraction
    value: Fraction
    rho: Fraction | None = None  # rational stand-in for exp(-s); None for analytic values
    argmax: Fraction | None = None


@lru_cache(maxsize=1024)
def rho(s: Fraction) -> Fraction:
    """Rational within 1e-12 of exp(-s)."""
    return exp_neg_rational(s)


def g_eval(oracle: CountingOracle, s: RationalLike, config: EstimatorConfig) -> GSample:
    """Tail maximum over sampled y of the window ratio on (rho(s) y, y]."""
    s = to_fraction(s)
    if s <= 0:
        raise ValidationError("s must be positive")
    _check_horizon(oracle, config.t)
    nums, den = sample_points(config)
    if nums.size == 0:
        raise EmptyGrid("no sample points in [T0, T]")
    r = rho(s)
    shift = 1 if config.boundary_correction else 0
    value, arg = _best(_sweep(oracle, nums, den, r), r, shift)
    return GSample(s, value, r, arg)


def g_analytic(oracle: CountingOracle, s: RationalLike) -> GSample:
    """Closed-form g for arithmetic progressions: every window ratio tends to 1/step."""
    s = to_fraction(s)
    if s <= 0:
        raise ValidationError("s must be positive")
    spec = oracle.spec
    if not isinstance(spec, ArithmeticProgression):
        raise ValidationError("no closed form for g: only arithmetic progressions are supported")
    return GSample(s, 1 / spec.step)


@dataclass(frozen=True)
class FeketeViolation:
    a: Fraction
    b: Fraction
    lhs: Fraction  # g(a + b)
    rhs: Fraction  # largest weighted average over the enclosure of w
    magnitude: Fraction


@dataclass(frozen=True)
class FeketeReport:
    pairs_available: int
    pairs_tested: int
    tau: Fraction
    violations: tuple[FeketeViolation, ...]


@lru_cache(maxsize=4096)
def _phi(s: Fraction) -> tuple[Fraction, Fraction]:
    return one_minus_exp_neg_bounds(s)


def fekete_check(
    samples: Sequence[GSample],
    pair_budget: int,
    tau: RationalLike = Fraction(1, 10**9),
    seed: int = 0,
) -> FeketeReport:
    """Test g(a+b) <= w g(a) + (1 - w) g(b), w = phi(a)/phi(a+b), phi(t) = 1 - exp(-t).

    Only ordered pairs with a, b and a + b all sampled are eligible; if there
    are more than ``pair_budget`` of them a seeded random subset is tested.
    w is known only through a certified enclosure, so a pair counts as a
    violation only when g(a+b) exceeds the weighted average at every w in
    the enclosure by more than ``tau``.
    """
    tau = to_fraction(tau)
    if pair_budget < 1:
        raise ValidationError("pair budget must be positive")
    table = {g.s: g.value for g in samples}
    keys = sorted(table)
    pairs = [(a, b) for a in keys for b in keys if a + b in table]
    if not pairs:
        raise InsufficientSamples("no pair (a, b) with a + b also sampled")
    if len(pairs) > pair_budget:
        rng = np.random.default_rng(seed)
        chosen = sorted(rng.choice(len(pairs), size=pair_budget, replace=False).tolist())
        tested = [pairs[i] for i in chosen]
    else:
        tested = pairs
    violations = []
    for a, b in tested:
        pa_lo, pa_hi = _phi(a)
        pab_lo, pab_hi = _phi(a + b)
        w_lo, w_hi = pa_lo / pab_hi, min(Fraction(1), pa_hi / pab_lo)
        ga, gb, gab = table[a], table[b], table[a + b]
        # linear in w: the maximum sits at an endpoint
        rhs = max(gb + w * (ga - gb) for w in (w_lo, w_hi))
        excess = gab - rhs
        if excess > tau:
            violations.append(FeketeViolation(a, b, gab, rhs, excess))
    return FeketeReport(len(pairs), len(tested), tau, tuple(violations))


# --------------------------------------------------------------------------
# substantial subfamily extraction


@dataclass(frozen=True, eq=False)
class ExtractedFamily:
    xi: Fraction
    points: tuple[Fraction, ...]  # y_k
    family: IntervalFamily
    ell: EllEstimate

    @property
    def n_intervals(self) -> int:
        return len(self.points)


def extract_polya_family(oracle: CountingOracle, xi: RationalLike, x_witnesses: Sequence[RationalLike]) -> ExtractedFamily:
    """Greedy subsequence y_1 = x_1, y_{k+1} = first witness >= y_k / xi.

    Returns the family {(xi y_k, y_k]}: constant ratio 1/xi, ordered because
    xi y_{k+1} >= y_k, hence substantial and in the class (1, +inf].
    """
    xi = to_fraction(xi)
    if not 0 < xi < 1:
        raise ParamError("xi must lie in (0, 1)")
    ws = [to_fraction(w) for w in x_witnesses]
    if any(w <= 0 for w in ws):
        raise ValidationError("witnesses must be positive")
    if any(u >= v for u, v in zip(ws, ws[1:])):
        raise ValidationError("witnesses must be strictly increasing")
    points: list[Fraction] = []
    for w in ws:
        if not points or w >= points[-1] / xi:
            points.append(w)
    if len(points) < 2:
        raise TooFewWitnesses(f"only {len(points)} witness(es) survive extraction")
    family = IntervalFamily(
        tuple(HalfOpenInterval(xi * y, y) for y in points),
        ConstantRatio(1 / xi, extendable=False),
    )
    return ExtractedFamily(xi, tuple(points), family, ell_estimate(oracle, family, len(points)))


# --------------------------------------------------------------------------
# Beurling-Malliavin vs Polya


@dataclass(frozen=True, eq=False)
class ConsistencyReport:
    density: DensityReport
    xi_star: Fraction
    rate: Fraction  # p_hat - tau
    witness_rule: str
    n_witnesses: int
    extraction: ExtractedFamily
    certificate: Certificate

    @property
    def ell(self) -> Fraction:
        return self.extraction.ell.value

    @property
    def gap(self) -> Fraction:
        return abs(self.density.estimate - self.ell)


def _witnesses(oracle: CountingOracle, config: EstimatorConfig, xi: Fraction, rate: Fraction) -> list[Fraction]:
    nums, den = sample_points(config)
    sw = _sweep(oracle, nums, den, xi)
    if config.witness_rule == "top-decile":
        approx = _approx_ratios(sw, xi, 0)
        cut = float(np.quantile(approx, 0.9))
        idx = np.flatnonzero(approx >= cut)
        return [Fraction(int(nums[i]), den) for i in idx]
    # near-max: exact test F(x) - F(xi x) >= rate (1 - xi) x
    # diff >= c * num / den with c = rate (1 - xi) = P/Q, i.e. diff * Q * den >= P * num
    c = rate * (1 - xi)
    approx = _approx_ratios(sw, xi, 0)
    out = []
    for i in np.flatnonzero(approx >= float(rate) * (1 - 1e-9)):
        num = int(nums[i])
        if int(sw.diffs[i]) * c.denominator * den >= c.numerator * num:
            out.append(Fraction(num, den))
    return out


def compare_bm_polya(oracle: CountingOracle, config: EstimatorConfig) -> ConsistencyReport:
    """Estimate p_hat, extract a family from near-argmax witnesses, certify it at p_hat - tau.

    The extraction uses xi* = the smallest grid value whose estimate is
    within tau of p_hat (longest windows, least boundary noise). With the
    default "near-max" rule the witnesses are all sampled x whose uncorrected
    xi*-window ratio is at least p_hat - tau; "top-decile" keeps the top
    tenth of sampled ratios instead.
    """
    report = polya_estimate(oracle, config)
    rate = max(Fraction(0), report.estimate - config.tau)
    xi_star = min(r.xi for r in report.per_xi if r.estimate >= rate)
    witnesses = _witnesses(oracle, config, xi_star, rate)
    extraction = extract_polya_family(oracle, xi_star, witnesses)
    cert = bm_certificate(oracle, extraction.family, extraction.n_intervals, rate, GREATER_THAN_ONE)
    return ConsistencyReport(report, xi_star, rate, config.witness_rule, len(witnesses), extraction, cert)
