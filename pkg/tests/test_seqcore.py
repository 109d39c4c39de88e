from __future__ import annotations

from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from density_lab.errors import HorizonExceeded, InvalidWindow, ValidationError
from density_lab.seqcore import (
    ArithmeticProgression,
    BlockIntegers,
    ExplicitList,
    FileBacked,
    PolynomialValues,
    PrimesUpTo,
    build_sequence,
    count_leq,
    naive_count,
    primes_up_to,
    scaled_sequence,
    window_ratio,
)

nonneg = st.fractions(min_value=0, max_value=10**4, max_denominator=97)


def progression_terms(step: Fraction, offset: Fraction, upto: Fraction) -> list[Fraction]:
    out, n = [], 1
    while offset + n * step <= upto:
        out.append(offset + n * step)
        n += 1
    return out


class TestBuild:
    def test_uniform_is_floor(self, uniform):
        for t in [Fraction(0), Fraction(1, 2), Fraction(1), Fraction(11, 2), Fraction(10**9 + 1, 3)]:
            assert uniform.count_leq(t) == t.numerator // t.denominator

    def test_repetition_rejected(self):
        with pytest.raises(ValidationError):
            build_sequence(ExplicitList((3, 3, 5)))

    def test_negative_first_term_rejected(self):
        with pytest.raises(ValidationError):
            build_sequence(ExplicitList((-1, 2)))

    def test_primes(self, primes100):
        assert primes100.count_leq(10) == 4
        assert primes100.count_leq(100) == 25

    def test_primes_sieve_against_trial_division(self):
        naive = [n for n in range(2, 2000) if all(n % d for d in range(2, int(n**0.5) + 1))]
        assert primes_up_to(1999).tolist() == naive

    def test_polynomial_squares(self):
        oracle = build_sequence(PolynomialValues((0, 0, 1), horizon=10**4))
        assert oracle.count_leq(100) == 10
        assert oracle.count_leq(99) == 9

    def test_block_horizon(self, blocks):
        assert blocks.horizon == 2 * 4**8
        with pytest.raises(HorizonExceeded):
            blocks.count_leq(2 * 4**8 + 1)

    def test_zero_term_counted_only_after_zero(self):
        oracle = build_sequence(ExplicitList((0, 1), horizon=5))
        assert oracle.count_leq(0) == 0
        assert oracle.count_leq(Fraction(1, 10**9)) == 1


class TestCountLeq:
    def test_examples(self, uniform, evens):
        assert count_leq(uniform, Fraction(11, 2)) == 5
        assert count_leq(evens, 7) == 3
        assert count_leq(uniform, 0) == 0

    def test_negative_argument(self, uniform):
        with pytest.raises(InvalidWindow):
            uniform.count_leq(-1)

    @given(
        st.fractions(min_value=Fraction(1, 7), max_value=5, max_denominator=7),
        st.fractions(min_value=0, max_value=3, max_denominator=5),
        nonneg,
    )
    def test_progression_matches_enumeration(self, step, offset, t):
        oracle = build_sequence(ArithmeticProgression(step, offset))
        assert oracle.count_leq(t) == naive_count(progression_terms(step, offset, t), t)

    @given(st.lists(st.fractions(min_value=0, max_value=1000, max_denominator=50), min_size=1, max_size=40, unique=True), nonneg)
    def test_explicit_matches_enumeration(self, terms, t):
        terms = sorted(terms)
        oracle = build_sequence(ExplicitList(tuple(terms), horizon=Fraction(10**4)))
        assert oracle.count_leq(t) == naive_count(terms, t)

    @given(nonneg, nonneg)
    def test_monotone(self, s, t):
        oracle = build_sequence(PrimesUpTo(10**4))
        s, t = min(s, t), max(s, t)
        assert oracle.count_leq(s) <= oracle.count_leq(t)

    def test_vectorized_agrees_with_scalar(self, uniform, blocks, primes100):
        rng = np.random.default_rng(0)
        tail = build_sequence(ExplicitList((1, Fraction(5, 2), 4), tail_step=Fraction(3, 2)))
        for oracle, top in [(uniform, 10**6), (blocks, 2 * 4**8), (primes100, 100), (tail, 500)]:
            den = 7
            nums = rng.integers(0, top * den, size=300)
            vec = oracle.count_leq_scaled(nums, den)
            assert vec.tolist() == [oracle.count_leq(Fraction(int(n), den)) for n in nums]

    def test_vectorized_object_fallback(self):
        oracle = build_sequence(ArithmeticProgression(Fraction(1, 3)))
        nums = np.array([10**18, 3 * 10**18], dtype=np.int64)
        assert oracle.count_leq_scaled(nums, 1).tolist() == [3 * 10**18, 9 * 10**18]


class TestWindowRatio:
    def test_examples(self, uniform, evens, primes100):
        assert window_ratio(uniform, 2, 4) == 1
        assert window_ratio(evens, 0, 10) == Fraction(1, 2)
        assert window_ratio(primes100, 10, 30) == Fraction(3, 10)

    @pytest.mark.parametrize("a, b", [(5, 5), (6, 5), (-1, 2)])
    def test_invalid(self, uniform, a, b):
        with pytest.raises(InvalidWindow):
            uniform.window_ratio(a, b)

    @given(nonneg, nonneg, nonneg)
    def test_additivity(self, a, b, c):
        oracle = build_sequence(PrimesUpTo(10**4))
        a, b, c = sorted((a, b, c))
        F = oracle.count_leq
        assert F(c) - F(a) == (F(c) - F(b)) + (F(b) - F(a))


class TestFiles:
    def test_parse_with_comments(self, tmp_path):
        path = tmp_path / "seq.txt"
        path.write_text("# header\n1\n\n5/2\n3.5\n", encoding="utf-8")
        oracle = build_sequence(FileBacked(path))
        assert oracle.horizon == Fraction(7, 2)
        assert oracle.count_leq(3) == 2

    def test_bad_line_reports_location(self, tmp_path):
        path = tmp_path / "seq.txt"
        path.write_text("1\nabc\n", encoding="utf-8")
        with pytest.raises(ValidationError, match=":2:"):
            build_sequence(FileBacked(path))

    def test_horizon_guard(self, tmp_path):
        path = tmp_path / "seq.txt"
        path.write_text("\n".join(str(n) for n in range(1, 101)), encoding="utf-8")
        oracle = build_sequence(FileBacked(path))
        with pytest.raises(HorizonExceeded):
            oracle.count_leq(10**9)


class TestScaling:
    @given(st.fractions(min_value=Fraction(1, 10), max_value=10, max_denominator=10), nonneg)
    def test_scaled_counts(self, c, t):
        base = build_sequence(BlockIntegers.geometric(4, 2, 4))
        scaled = scaled_sequence(base, c)
        if t > base.horizon:
            return
        assert scaled.count_leq(c * t) == base.count_leq(t)

    def test_scaled_progression_stays_closed_form(self, uniform):
        tripled = scaled_sequence(uniform, 3)
        assert tripled.progression is not None
        assert tripled.count_leq(10) == 3
