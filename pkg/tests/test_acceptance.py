"""Acceptance criteria 1-10, one test each; a PASS/FAIL line per criterion is printed after the run."""

from __future__ import annotations

import random
import time
from fractions import Fraction

import pytest

import conftest
from density_lab.covering import (
    CoveringParams,
    build_eta_covering,
    delta_for,
    m_threshold,
    predicted_d,
    verify_covering,
    witness_integer,
)
from density_lab.density import (
    EstimatorConfig,
    IntegerSampling,
    RealSampling,
    compare_bm_polya,
    fekete_check,
    g_analytic,
    g_eval,
    polya_estimate,
)
from density_lab.intervals import GREATER_THAN_ONE, bm_certificate
from density_lab.lemma_suite import naive_stopping_index, random_covering_params, random_pair, random_rational
from density_lab.seqcore import PrimesUpTo, build_sequence

F = Fraction
GRID = (F(1, 2), F(9, 10), F(99, 100))
SEED = 20240601


def record(n: int, ok: bool, detail: str) -> None:
    conftest.ACCEPTANCE_LINES[n] = f"criterion {n}: {'PASS' if ok else 'FAIL'}  {detail}"


def estimate(oracle, sampling, t0=1000, t=10**5):
    return polya_estimate(oracle, EstimatorConfig(GRID, t0, t, sampling))


@pytest.fixture(scope="module")
def covering_instances():
    rng = random.Random(SEED)
    return [random_covering_params(rng, above=True) for _ in range(1000)]


def test_criterion_01_uniform(uniform):
    start = time.perf_counter()
    reps = {name: estimate(uniform, s) for name, s in (("integer", IntegerSampling()), ("real", RealSampling()))}
    elapsed = time.perf_counter() - start
    vals = {k: v.estimate for k, v in reps.items()}
    ok = all(F(99, 100) <= v <= 1 for v in vals.values()) and elapsed < 5
    record(1, ok, f"p_hat integer={float(vals['integer']):.6f} real={float(vals['real']):.6f}, {elapsed:.2f}s")
    assert ok


def test_criterion_02_scaled(triples):
    vals = {name: estimate(triples, s).estimate for name, s in (("integer", IntegerSampling()), ("real", RealSampling()))}
    ok = all(F(323, 1000) <= v <= F(343, 1000) for v in vals.values())
    record(2, ok, f"p_hat integer={float(vals['integer']):.6f} real={float(vals['real']):.6f}")
    assert ok


def test_criterion_03_blocks(blocks):
    rep = estimate(blocks, RealSampling())
    p_half = rep.for_xi(F(1, 2)).estimate
    avg = F(blocks.count_leq(4**8), 4**8)
    ok = p_half >= F(98, 100) and F(28, 100) <= avg <= F(38, 100)
    record(3, ok, f"p_hat(1/2)={float(p_half):.6f}, F(4^8)/4^8={float(avg):.6f}")
    assert ok


def test_criterion_04_covering_suite(covering_instances):
    start = time.perf_counter()
    failures = []
    required = ("recursion", "d_minimality", "lemma4_chain", "lemma1_d_le_ceil", "lemma5_length", "prop17_containment")
    for params in covering_instances:
        cov = build_eta_covering(params)
        rep = verify_covering(cov)
        for name in required:
            if rep.status(name) != "pass":
                failures.append((params, name, rep.status(name)))
        if cov.d not in predicted_d(params):
            failures.append((params, "predicted_d", cov.d))
    elapsed = time.perf_counter() - start
    ok = not failures and elapsed < 10
    record(4, ok, f"{len(covering_instances)} instances, {len(failures)} failures, {elapsed:.2f}s")
    assert ok, failures[:5]


def test_criterion_05_naive_d(covering_instances):
    mismatches = [
        p for p in covering_instances if naive_stopping_index(p.x, p.xi, p.eta) != build_eta_covering(p).d
    ]
    ok = not mismatches
    record(5, ok, f"{len(covering_instances)} instances, {len(mismatches)} mismatches")
    assert ok, mismatches[:5]


def test_criterion_06_witness(uniform, evens, blocks):
    rng = random.Random(SEED + 6)
    oracles = (uniform, evens, blocks)
    cap = F(10**5)
    failures = 0
    for i in range(100):
        oracle = oracles[i % 3]
        while True:
            xi, eta = random_pair(rng)
            m = m_threshold(xi, eta)
            if m.upper < cap:
                break
        x = random_rational(rng, m.upper, cap, 1000)
        w = witness_integer(oracle, CoveringParams(x, xi, eta))
        # recompute both window ratios from the counting function alone
        n = F(w.n)
        lhs = F(oracle.count_leq(n) - oracle.count_leq(eta * n)) / ((1 - eta) * n)
        at_x = F(oracle.count_leq(x) - oracle.count_leq(xi * x)) / ((1 - xi) * x)
        if lhs < at_x * (1 - xi) / (1 - xi * eta**3):
            failures += 1
    ok = failures == 0
    record(6, ok, f"100 instances, {failures} failures")
    assert ok


def test_criterion_07_sampling_gap(uniform, evens, triples, blocks):
    oracles = {
        "n": uniform,
        "2n": evens,
        "3n": triples,
        "blocks": blocks,
        "primes": build_sequence(PrimesUpTo(10**5)),
    }
    gaps = {}
    for name, oracle in oracles.items():
        ints = estimate(oracle, IntegerSampling()).estimate
        real = estimate(oracle, RealSampling(merge_integers=True)).estimate
        gaps[name] = abs(ints - real)
    worst = max(gaps, key=gaps.get)
    ok = all(g <= F(2, 100) for g in gaps.values())
    record(7, ok, f"max |integer - real| = {float(gaps[worst]):.6f} ({worst})")
    assert ok


def test_criterion_08_fekete(uniform, blocks):
    s_grid = [F(i, 20) for i in range(1, 47)]
    exact = fekete_check([g_analytic(uniform, s) for s in s_grid], 1000, tau=F(1, 10**9), seed=SEED)
    config = EstimatorConfig(GRID, 1000, 2 * 4**8, IntegerSampling())
    finite = fekete_check([g_eval(blocks, s, config) for s in s_grid], 1000, tau=F(5, 100), seed=SEED)
    ok = exact.pairs_tested == 1000 and not exact.violations and not finite.violations
    # not gating: the finite-horizon g for n carries ~1e-9 boundary noise
    noisy = fekete_check([g_eval(uniform, s, config) for s in s_grid], 1000, tau=F(1, 10**9), seed=SEED)
    worst = max((float(v.magnitude) for v in noisy.violations), default=0.0)
    record(
        8,
        ok,
        f"n (closed-form g): {exact.pairs_tested} pairs, {len(exact.violations)} violations; "
        f"blocks: {finite.pairs_tested} pairs, {len(finite.violations)} violations; "
        f"[info] finite-horizon g for n: {len(noisy.violations)} above 1e-9, max {worst:.1e}",
    )
    assert ok


def test_criterion_09_consistency(uniform, triples, blocks):
    config = EstimatorConfig(GRID, 1, 10**5, IntegerSampling())
    details, ok = [], True
    rep = compare_bm_polya(uniform, config)
    expected = tuple(F(2) ** (k - 1) for k in range(1, rep.extraction.n_intervals + 1))
    at_99 = bm_certificate(uniform, rep.extraction.family, rep.extraction.n_intervals, F(99, 100), GREATER_THAN_ONE)
    ok &= rep.ell == 1 and rep.extraction.points == expected and at_99.accepted and rep.gap <= F(5, 100)
    details.append(f"n: ell={rep.ell}, cert(0.99)={at_99.accepted}, gap={float(rep.gap):.4f}")
    for name, oracle in (("3n", triples), ("blocks", blocks)):
        rep = compare_bm_polya(oracle, config)
        ok &= rep.gap <= F(5, 100) and rep.certificate.accepted
        details.append(f"{name}: ell={float(rep.ell):.4f}, gap={float(rep.gap):.4f}")
    record(9, ok, "; ".join(details))
    assert ok


def test_criterion_10_delta():
    rng = random.Random(SEED + 10)
    failures = checked = 0
    for _ in range(100):
        xi = random_rational(rng, F(0), F(1), 1000)
        eps = random_rational(rng, F(0), F(1), 1000)
        delta = delta_for(xi, eps)
        for _ in range(10):
            eta = random_rational(rng, delta, F(1), 10**6)
            checked += 1
            if not 1 - xi * eta**3 < (1 - xi) / (1 - eps):
                failures += 1
    ok = failures == 0
    record(10, ok, f"100 (xi, eps) pairs, {checked} eta samples, {failures} failures")
    assert ok
