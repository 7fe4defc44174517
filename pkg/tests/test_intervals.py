"""Tests de aritmética racional exacta y cotas de 2^{-ℓ/T}."""
import math
from fractions import Fraction

import pytest
from hypothesis import assume, given, settings, strategies as st

from models.intervals import RationalInterval, Tristate, format_rational, to_rational
from services.interval_service import (
    ceil_log2,
    interval_add,
    interval_leq,
    interval_scale,
    interval_sum,
    pow2_neg,
    render_interval,
    truncate_decimal,
)

temperatures = st.builds(Fraction, st.integers(1, 12), st.integers(1, 12))


class TestPow2Neg:
    def test_integral_exponent_is_exact(self):
        assert pow2_neg(4, Fraction(2), 10) == RationalInterval.point(Fraction(1, 4))
        assert pow2_neg(3, Fraction(1, 2), 10) == RationalInterval.point(Fraction(1, 64))
        assert pow2_neg(0, Fraction(5, 3), 10).is_point
        assert pow2_neg(6, Fraction(3), 10).contains(Fraction(1, 4))
        assert not pow2_neg(6, Fraction(3), 10).contains("1/3")

    def test_square_root_of_half(self):
        interval = pow2_neg(1, Fraction(2), 20)
        assert interval.lo ** 2 <= Fraction(1, 2) <= interval.hi ** 2
        assert interval.width <= Fraction(1, 1 << 20)

    @pytest.mark.parametrize("length, T, k", [(-1, Fraction(1), 4), (1, Fraction(0), 4), (1, Fraction(1), 0)])
    def test_preconditions(self, length, T, k):
        with pytest.raises(ValueError):
            pow2_neg(length, T, k)

    @settings(max_examples=500)
    @given(st.integers(0, 64), temperatures, st.integers(1, 64))
    def test_precision_contract(self, length, T, k):
        interval = pow2_neg(length, T, k)
        assert interval.width <= Fraction(1, 1 << k)
        # lo^num ≤ 2^{-length·den} ≤ hi^num, en enteros
        scale = 2 ** (length * T.denominator)
        assert interval.lo ** T.numerator * scale <= 1 <= interval.hi ** T.numerator * scale

    @given(st.integers(1, 30), temperatures, temperatures)
    def test_monotone_in_temperature(self, length, T1, T2):
        assume(T1 != T2)
        if T1 > T2:
            T1, T2 = T2, T1
        # 1/T1 - 1/T2 ≥ 1/132 con numeradores y denominadores ≤ 12, así que
        # 2^{-length/T2} - 2^{-length/T1} ≥ 2^{-length/T1 - 8}
        k = math.ceil(length / T1) + 10
        verdict = interval_leq(pow2_neg(length, T1, k), pow2_neg(length, T2, k))
        assert verdict is Tristate.YES

    @given(st.integers(1, 30), temperatures)
    def test_same_temperature_is_never_no(self, length, T):
        assert interval_leq(pow2_neg(length, T, 30), pow2_neg(length, T, 30)) is not Tristate.NO


class TestIntervals:
    def test_empty_interval_rejected(self):
        with pytest.raises(ValueError):
            RationalInterval(Fraction(1), Fraction(0))

    def test_floats_rejected(self):
        with pytest.raises(TypeError):
            to_rational(0.5)

    def test_add_and_scale(self):
        a = RationalInterval(Fraction(1, 4), Fraction(1, 2))
        assert interval_add(a, a) == RationalInterval(Fraction(1, 2), Fraction(1))
        assert interval_scale(a, 3) == RationalInterval(Fraction(3, 4), Fraction(3, 2))
        assert interval_sum([a, a, a]) == interval_scale(a, 3)
        with pytest.raises(ValueError):
            interval_scale(a, -1)

    def test_leq_tristate(self):
        low = RationalInterval(Fraction(0), Fraction(1, 4))
        high = RationalInterval(Fraction(1, 2), Fraction(1))
        overlap = RationalInterval(Fraction(1, 8), Fraction(3, 4))
        assert interval_leq(low, high) is Tristate.YES
        assert interval_leq(high, low) is Tristate.NO
        assert interval_leq(low, overlap) is Tristate.UNKNOWN

    def test_rendering(self):
        assert format_rational(Fraction(3)) == "3/1"
        assert str(RationalInterval(Fraction(1, 3), Fraction(1, 2))) == "[1/3, 1/2]"
        assert render_interval(RationalInterval(Fraction(1, 3), Fraction(1, 2)), 3) == "[0.333 (truncated), 0.500]"


@pytest.mark.parametrize("value, places, expected", [
    (Fraction(1, 3), 4, "0.3333 (truncated)"),
    (Fraction(3, 4), 2, "0.75"),
    (Fraction(3, 4), 1, "0.7 (truncated)"),
    (Fraction(-5, 2), 0, "-2 (truncated)"),
    (Fraction(7), 2, "7.00"),
])
def test_truncate_decimal(value, places, expected):
    assert truncate_decimal(value, places) == expected


def test_ceil_log2():
    assert [ceil_log2(n) for n in (1, 2, 3, 4, 5, 8, 9)] == [0, 1, 2, 2, 3, 3, 4]
