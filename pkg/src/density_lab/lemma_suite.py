"""Randomized exact test suites for the covering and splitting lemmas.

Each suite draws seeded random rational parameters and checks one group of
statements with exact arithmetic. Failures are collected rather than raised
so a run reports everything that broke. Swapping a ceiling for a floor inside
the covering code, for example, makes several suites fail.
"""

from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

from .covering import (
    CoveringParams,
    build_eta_covering,
    ceil_eta_iterate,
    degenerate_check,
    delta_for,
    eq35_threshold,
    f_iterate,
    lemma1_threshold,
    log_ratio,
    m_threshold,
    r_threshold,
    verify_covering,
    witness_integer,
)
from .errors import DensityLabError, NoStoppingIndex
from .intervals import HalfOpenInterval, covers, pigeonhole_select, split_eta, split_geometric
from .seqcore import ArithmeticProgression, ExplicitList, block_sequence, build_sequence


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: list[str] = field(default_factory=list)


@dataclass
class SuiteSummary:
    seed: int
    trials: int
    results: list[SuiteResult]

    @property
    def total_cases(self) -> int:
        return sum(r.cases for r in self.results)

    @property
    def total_failures(self) -> int:
        return sum(len(r.failures) for r in self.results)


def naive_stopping_index(x: Fraction, xi: Fraction, eta: Fraction, limit: int = 10**5) -> int | None:
    """Stopping index of the eta-covering using bare integer arithmetic.

    Deliberately shares no code with :mod:`covering`: b is kept as an int,
    a = eta*b as a (numerator, denominator) pair, and a <= xi*x is decided
    by cross-multiplication. Returns None if no index below ``limit`` stops.
    """
    xn, xd = x.numerator, x.denominator
    en, ed = eta.numerator, eta.denominator
    sn, sd = xi.numerator * xn, xi.denominator * xd  # xi * x
    b = (xn + xd - 1) // xd
    for i in range(limit):
        an, ad = en * b, ed
        if an * sd <= sn * ad:
            return i
        b = (an + ad - 1) // ad
    return None


# --------------------------------------------------------------------------
# parameter generators


def random_rational(rng: random.Random, lo: Fraction, hi: Fraction, max_den: int = 1000) -> Fraction:
    """Random rational strictly inside (lo, hi)."""
    while True:
        den = rng.randint(2, max_den)
        value = lo + (hi - lo) * Fraction(rng.randint(1, den - 1), den)
        if lo < value < hi:
            return value


def random_pair(rng: random.Random) -> tuple[Fraction, Fraction]:
    """(xi, eta) with 0 < xi < eta < 1; about one draw in five has eta**q == xi."""
    if rng.random() < 0.2:
        eta = random_rational(rng, Fraction(1, 5), Fraction(19, 20), 40)
        q = rng.randint(2, 4)
        if eta**q >= Fraction(1, 50):
            return eta**q, eta
    while True:
        eta = random_rational(rng, Fraction(1, 5), Fraction(19, 20), 200)
        xi = random_rational(rng, Fraction(1, 20), eta, 200)
        if xi < eta:
            return xi, eta


def covering_threshold(xi: Fraction, eta: Fraction) -> Fraction:
    """Smallest x at which every guarantee of the covering applies."""
    q = log_ratio(xi, eta).ceil
    return max(
        r_threshold(eta, q),
        lemma1_threshold(xi, eta),
        m_threshold(xi, eta).upper,
        eq35_threshold(xi, eta).value,
    )


def random_covering_params(rng: random.Random, above: bool = True) -> CoveringParams:
    xi, eta = random_pair(rng)
    if above:
        base = covering_threshold(xi, eta)
        x = base * random_rational(rng, Fraction(1), Fraction(8), 1000) if rng.random() < 0.9 else base
    else:
        x = random_rational(rng, Fraction(1, 2), covering_threshold(xi, eta), 1000)
    return CoveringParams(x, xi, eta)


# --------------------------------------------------------------------------
# suites


def _suite_iterates(rng: random.Random, res: SuiteResult) -> None:
    eta = random_rational(rng, Fraction(0), Fraction(1), 500)
    x = random_rational(rng, Fraction(0), Fraction(10**6), 1000)
    m = rng.randint(0, 40)
    psi = eta**m * x
    f_m = f_iterate(x, eta, m)
    if psi > f_m:
        res.failures.append(f"psi^m > f^m at x={x}, eta={eta}, m={m}")
    gap = ceil_eta_iterate(x, eta, m) - eta**m * x
    partial = sum((eta**k for k in range(m + 1)), Fraction(0))
    if not 0 <= gap <= partial <= 1 / (1 - eta):
        res.failures.append(f"iterate gap {gap} outside [0, {partial}] at x={x}, eta={eta}, m={m}")


def _suite_covering(rng: random.Random, res: SuiteResult) -> None:
    params = random_covering_params(rng, above=True)
    cov = build_eta_covering(params)
    report = verify_covering(cov)
    for check in report.checks:
        if check.status == "fail":
            res.failures.append(f"{check.name} failed at {params}: {check.detail}")
        elif check.status == "n/a":
            res.failures.append(f"{check.name} not applicable above thresholds at {params}")
    naive = naive_stopping_index(params.x, params.xi, params.eta)
    if naive != cov.d:
        res.failures.append(f"d={cov.d} but naive recursion gives {naive} at {params}")
    degenerate_check(cov)


def _suite_covering_low(rng: random.Random, res: SuiteResult) -> None:
    params = random_covering_params(rng, above=False)
    try:
        cov = build_eta_covering(params)
    except NoStoppingIndex:
        # small x: b can reach a fixed point of ceil(eta * b) above xi * x
        if naive_stopping_index(params.x, params.xi, params.eta, limit=10**4) is None:
            return
        res.failures.append(f"stall reported but the naive recursion stops at {params}")
        return
    report = verify_covering(cov)
    for check in report.failures:
        res.failures.append(f"{check.name} failed below thresholds at {params}: {check.detail}")
    naive = naive_stopping_index(params.x, params.xi, params.eta)
    if naive != cov.d:
        res.failures.append(f"d={cov.d} but naive recursion gives {naive} at {params}")
    degenerate_check(cov)


_WITNESS_ORACLES = (
    build_sequence(ArithmeticProgression(1)),
    build_sequence(ArithmeticProgression(2)),
    block_sequence(),
)


def _suite_witness(rng: random.Random, res: SuiteResult) -> None:
    oracle = rng.choice(_WITNESS_ORACLES)
    cap = Fraction(10**5)
    while True:
        xi, eta = random_pair(rng)
        m = m_threshold(xi, eta).upper
        if m < cap:
            break
    x = random_rational(rng, m, cap, 1000)
    w = witness_integer(oracle, CoveringParams(x, xi, eta))
    if w.n != w.covering.b[w.index] or w.ratio < w.bound:
        res.failures.append(f"witness inequality failed at x={x}, xi={xi}, eta={eta}")


def _suite_delta(rng: random.Random, res: SuiteResult) -> None:
    xi = random_rational(rng, Fraction(0), Fraction(1), 1000)
    eps = random_rational(rng, Fraction(0), Fraction(1), 1000)
    delta = delta_for(xi, eps)
    for _ in range(5):
        eta = random_rational(rng, delta, Fraction(1), 10**6)
        if not 1 - xi * eta**3 < (1 - xi) / (1 - eps):
            res.failures.append(f"delta guarantee failed at xi={xi}, eps={eps}, eta={eta}")


def _suite_splitting(rng: random.Random, res: SuiteResult) -> None:
    a = random_rational(rng, Fraction(0), Fraction(100), 100)
    b = a * random_rational(rng, Fraction(1), Fraction(50), 100)
    k = random_rational(rng, Fraction(1), Fraction(5), 20)
    pieces = split_geometric(a, b, k)
    r = len(pieces)
    if pieces[0].c.as_fraction() != a or pieces[-1].d.as_fraction() != b:
        res.failures.append(f"geometric split endpoints wrong for ({a}, {b}], k={k}")
    if not k ** (r - 1) <= b / a < k**r:
        res.failures.append(f"geometric split count {r} wrong for ({a}, {b}], k={k}")
    for left, right in zip(pieces, pieces[1:]):
        if str(left.d) != str(right.c):
            res.failures.append(f"geometric pieces not contiguous for ({a}, {b}], k={k}")
            break
    step = random_rational(rng, Fraction(1), Fraction(4), 100)
    parts = split_eta(a, b, step)
    if not covers(parts, HalfOpenInterval(a, b)):
        res.failures.append(f"eta split does not cover ({a}, {b}], step={step}")
    if any(p.b > step * p.a for p in parts):
        res.failures.append(f"eta split piece with ratio above {step} for ({a}, {b}]")


def _suite_pigeonhole(rng: random.Random, res: SuiteResult) -> None:
    count = rng.randint(1, 30)
    terms = sorted({random_rational(rng, Fraction(0), Fraction(100), 50) for _ in range(count)})
    oracle = build_sequence(ExplicitList(tuple(terms), horizon=Fraction(200)))
    lo = random_rational(rng, Fraction(0), Fraction(50), 50)
    hi = random_rational(rng, lo, Fraction(150), 50)
    # random covering: walk right from below lo with random steps and overlaps
    pieces = []
    left = lo - random_rational(rng, Fraction(0), lo, 20) if lo > 0 else lo
    left = max(left, Fraction(1, 100))
    while True:
        right = left + random_rational(rng, Fraction(0), (hi - lo) / 2 + 1, 20)
        pieces.append(HalfOpenInterval(left, right))
        if right >= hi:
            break
        left = max(Fraction(1, 100), right - random_rational(rng, Fraction(0), (right - left) / 2, 20))
    if hi > 200 or not covers(pieces, HalfOpenInterval(lo, hi)):
        return
    j = pigeonhole_select(oracle, pieces, HalfOpenInterval(lo, hi))
    total = sum(p.length for p in pieces)
    chosen = oracle.window_ratio(pieces[j].a, pieces[j].b)
    if chosen * total < oracle.count_leq(hi) - oracle.count_leq(lo):
        res.failures.append(f"pigeonhole bound failed on ({lo}, {hi}]")


SUITES: dict[str, Callable[[random.Random, SuiteResult], None]] = {
    "iterates": _suite_iterates,
    "covering": _suite_covering,
    "covering_below_thresholds": _suite_covering_low,
    "witness": _suite_witness,
    "delta": _suite_delta,
    "splitting": _suite_splitting,
    "pigeonhole": _suite_pigeonhole,
}


def run_suites(trials: int, seed: int, names: list[str] | None = None) -> SuiteSummary:
    """Run each selected suite ``trials`` times with its own seeded generator."""
    if trials < 0:
        raise ValueError("trials must be nonnegative")
    names = list(SUITES) if names is None else names
    results = []
    for offset, name in enumerate(names):
        if name not in SUITES:
            raise ValueError(f"unknown suite {name!r}")
        rng = random.Random(seed * 1000 + offset)
        res = SuiteResult(name)
        for _ in range(trials):
            res.cases += 1
            try:
                SUITES[name](rng, res)
            except DensityLabError as exc:
                res.failures.append(f"{type(exc).__name__}: {exc}")
        results.append(res)
    return SuiteSummary(seed, trials, results)
