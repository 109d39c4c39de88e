from __future__ import annotations

import random
from fractions import Fraction

import pytest

from density_lab import covering
from density_lab.exact import floor_q
from density_lab.lemma_suite import SUITES, naive_stopping_index, random_covering_params, run_suites

F = Fraction


class TestNaiveOracle:
    def test_examples(self):
        assert naive_stopping_index(F(100), F(3, 10), F(1, 2)) == 1
        assert naive_stopping_index(F(1000), F(3, 10), F(9, 10)) == 11

    def test_stall_is_none(self):
        assert naive_stopping_index(F(1, 2), F(1, 4), F(1, 2)) is None


class TestGenerators:
    def test_above_thresholds(self):
        rng = random.Random(7)
        for _ in range(200):
            p = random_covering_params(rng, above=True)
            assert all(covering.build_eta_covering(p).thresholds_met.values())


class TestRun:
    def test_clean_run(self):
        summary = run_suites(100, 42)
        assert summary.total_cases == 100 * len(SUITES)
        assert summary.total_failures == 0, [r.failures[:3] for r in summary.results]

    def test_deterministic(self):
        a, b = run_suites(30, 5), run_suites(30, 5)
        assert [(r.name, r.cases, r.failures) for r in a.results] == [(r.name, r.cases, r.failures) for r in b.results]

    def test_empty_and_invalid(self):
        assert run_suites(0, 1).total_cases == 0
        with pytest.raises(ValueError):
            run_suites(-1, 1)
        with pytest.raises(ValueError):
            run_suites(1, 1, ["nope"])

    def test_detects_broken_ceiling(self, monkeypatch):
        monkeypatch.setattr(covering, "ceil_q", floor_q)
        summary = run_suites(100, 42)
        failing = {r.name for r in summary.results if r.failures}
        assert {"iterates", "covering"} <= failing
