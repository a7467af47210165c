"""Arbitrary-precision scaffolding: BigReal, ExactT, and residue evaluation."""

import math
import random
from fractions import Fraction

import mpmath
import pytest

from confluence.errors import DomainError, PrecisionError
from confluence.precision import (
    MIN_DIGITS,
    RESIDUE_ABS_TOL,
    BigReal,
    ComplexValue,
    ExactT,
    _residue_at,
    k_unit,
    log_prime,
    pi_value,
    residue,
    to_real,
    working_digits,
    wrap_residue,
)


def _big(x, digits=40):
    with mpmath.mp.workdps(digits + 10):
        return BigReal(mpmath.mpf(x), digits)


class TestBigReal:
    def test_precision_floor_enforced(self):
        with pytest.raises(PrecisionError):
            _big(1.0, digits=MIN_DIGITS - 1)

    def test_arithmetic_tracks_weaker_precision(self):
        a = _big(2, digits=60)
        b = _big(3, digits=40)
        assert (a + b).precision_digits == 40
        assert (a * b).precision_digits == 40
        assert float(a - b) == -1.0
        assert float(a / b) == pytest.approx(2 / 3)

    def test_exact_operands_keep_precision(self):
        a = _big(2, digits=60)
        assert (a + 1).precision_digits == 60
        assert (3 * a).precision_digits == 60
        assert float(a + Fraction(1, 2)) == 2.5
        assert float(1 - a) == -1.0
        assert float(6 / a) == 3.0

    def test_comparisons_and_abs(self):
        a = _big(-1.5)
        assert a < 0 < abs(a)
        assert a <= _big(-1.5) <= a
        assert _big(2) > 1.9
        assert a == -1.5
        assert float(-a) == 1.5

    def test_digits_str_significant_digits(self):
        x = _big(mpmath.mpf(1) / 3, digits=50)
        text = x.digits_str(12)
        assert text.startswith("0.333333333333")

    def test_float_conversion(self):
        assert float(_big(0.25)) == 0.25


class TestComplexValue:
    def test_negative_error_bound_rejected(self):
        with pytest.raises(DomainError):
            ComplexValue(re=_big(0), im=_big(0), err_bound=-1.0)

    def test_from_mpc_and_complex(self):
        value = ComplexValue.from_mpc(mpmath.mpc(1.5, -2.5), 1e-12, 40, "unit")
        assert complex(value) == complex(1.5, -2.5)
        assert value.method == "unit"
        assert value.err_bound == 1e-12

    def test_str_formats_sign(self):
        value = ComplexValue.from_mpc(mpmath.mpc(1, -2), 0.0, 30)
        assert str(value) == "1 - 2i"


class TestExactT:
    def test_defaults(self):
        t = ExactT(q=432)
        assert t.base_pair == (2, 3)
        assert t.offset == 0
        assert t.q_digits == 3

    def test_rejects_bad_q(self):
        with pytest.raises(DomainError):
            ExactT(q=-2)
        with pytest.raises(DomainError):
            ExactT(q=2.0)
        with pytest.raises(DomainError):
            ExactT(q=True)

    def test_rejects_bad_base_pair(self):
        with pytest.raises(DomainError):
            ExactT(q=2, base_pair=(4, 9))
        with pytest.raises(DomainError):
            ExactT(q=2, base_pair=(3, 2))

    def test_offset_bounds(self):
        assert ExactT(q=2, offset=Fraction(-2, 5)).offset == Fraction(-2, 5)
        with pytest.raises(DomainError):
            ExactT(q=2, offset=Fraction(3, 2))
        with pytest.raises(DomainError):
            ExactT(q=0, offset=Fraction(-1, 2))

    def test_advance_is_exact_integer_translation(self):
        t = ExactT(q=10**28)
        assert t.advance(62).q == 10**28 + 62
        with pytest.raises(DomainError):
            t.advance(1.5)

    def test_with_offset_preserves_q(self):
        t = ExactT(q=4378640).with_offset(Fraction(-2, 5))
        assert (t.q, t.offset) == (4378640, Fraction(-2, 5))

    def test_str_roundtrips_information(self):
        assert str(ExactT(q=8274)) == "8274k(2, 3)"
        assert "2/5" in str(ExactT(q=4, offset=Fraction(-2, 5)))


class TestConstants:
    def test_pi_value_matches_mpmath(self):
        with mpmath.mp.workdps(60):
            assert abs(pi_value(50) - mpmath.pi) < mpmath.mpf(10) ** -48

    def test_log_prime(self):
        assert float(log_prime(2, 40)) == pytest.approx(math.log(2), abs=1e-15)
        assert float(log_prime(5, 40)) == pytest.approx(math.log(5), abs=1e-15)

    def test_k_unit_value(self):
        # k = pi / (log 3 - log 2) for the canonical pair.
        assert float(k_unit((2, 3))) == pytest.approx(
            math.pi / (math.log(3) - math.log(2)), abs=1e-12
        )
        assert float(k_unit((3, 5))) == pytest.approx(
            math.pi / (math.log(5) - math.log(3)), abs=1e-12
        )


class TestWrapResidue:
    def test_range_is_quarter_shifted(self):
        lo, hi = -math.pi / 2, 3 * math.pi / 2
        for x in [-10.0, -1.6, 0.0, 1.5, 4.7, 6.3, 1000.0]:
            w = float(wrap_residue(x))
            assert lo <= w < hi
            # Wrapping only ever shifts by whole turns.
            assert abs((w - x) % (2 * math.pi)) < 1e-9 or abs(
                ((w - x) % (2 * math.pi)) - 2 * math.pi
            ) < 1e-9

    def test_identity_inside_range(self):
        assert float(wrap_residue(0.5)) == pytest.approx(0.5, abs=1e-15)
        assert float(wrap_residue(-1.0)) == pytest.approx(-1.0, abs=1e-15)


class TestToReal:
    def test_requires_enough_digits(self):
        t = ExactT(q=10**40)
        with pytest.raises(PrecisionError):
            to_real(t, t.q_digits + 19)

    def test_value_matches_direct_formula(self):
        t = ExactT(q=432)
        k = math.pi / (math.log(3) - math.log(2))
        assert float(to_real(t, 30)) == pytest.approx(432 * k, rel=1e-12)

    def test_offset_included(self):
        base = float(to_real(ExactT(q=432), 30))
        shifted = float(to_real(ExactT(q=432, offset=Fraction(1, 2)), 30))
        assert shifted - base == pytest.approx(0.5, abs=1e-9)

    def test_huge_q_exact_head(self):
        t = ExactT(q=10**28)
        value = to_real(t, t.q_digits + 25)
        k = math.pi / (math.log(3) - math.log(2))
        assert float(value) == pytest.approx(10**28 * k, rel=1e-14)


class TestResidue:
    def test_result_in_range(self):
        for q in (432, 8274, 171406):
            r = float(residue(ExactT(q=q), 5))
            assert -math.pi / 2 <= r < 3 * math.pi / 2

    def test_base_primes_agree_on_even_lattice(self):
        rng = random.Random(12345)
        for _ in range(50):
            q = 2 * rng.randrange(1, 10**12)
            t = ExactT(q=q)
            d = float(abs(residue(t, 2) - residue(t, 3)))
            assert d < RESIDUE_ABS_TOL

    def test_known_small_base_point(self):
        # q = 432 starts the delta = 0.1 base family: residue just above 0.
        r2 = float(residue(ExactT(q=432), 2))
        assert 0 <= r2 < 0.1

    def test_escalation_stability(self):
        # Recomputing at substantially higher precision moves the result by
        # far less than the advertised tolerance.
        rng = random.Random(99)
        for _ in range(10):
            q = 2 * rng.randrange(10**18, 10**20)
            t = ExactT(q=q)
            for p in (2, 5, 7):
                base = residue(t, p)
                dps = working_digits(t) + 40
                refined = wrap_residue(_residue_at(t, p, dps))
                delta = abs(float(base) - float(refined))
                delta = min(delta, abs(delta - 2 * math.pi))
                assert delta < 1e-13

    def test_offset_shifts_by_offset_times_log_p(self):
        t = ExactT(q=1000)
        for p in (2, 5):
            plain = float(residue(t, p))
            shifted = float(residue(t.with_offset(Fraction(1, 10)), p))
            expected = plain + math.log(p) / 10
            delta = abs(shifted - expected)
            delta = min(delta, abs(delta - 2 * math.pi))
            assert delta < 1e-9


class TestWorkingDigits:
    def test_scales_with_q_size(self):
        small = working_digits(ExactT(q=432))
        large = working_digits(ExactT(q=10**30))
        assert small >= MIN_DIGITS
        assert large > small
