"""Window scanning around confluence points and the structure-free baseline."""

import math
from fractions import Fraction

import mpmath
import pytest

from confluence.errors import DomainError
from confluence.modspace import ConfluencePoint
from confluence.precision import ComplexValue, ExactT, residue
from confluence.scanner import (
    NegativeRegionHit,
    WindowScan,
    _offsets,
    brute_scan,
    scan_tables,
    scan_window,
)


def _point(q=432, order=2):
    t = ExactT(q=q)
    primes = (2, 3, 5, 7)[:order]
    return ConfluencePoint(order, t, 0.1, tuple(residue(t, p) for p in primes))


def _value(re, im=0.0, err=1e-12):
    with mpmath.mp.workdps(40):
        return ComplexValue.from_mpc(mpmath.mpc(re, im), err, 30)


class TestOffsets:
    def test_symmetric_with_endpoints(self):
        offs = _offsets(21)
        assert len(offs) == 21
        assert offs[0] == -1 and offs[-1] == 1
        assert offs[10] == 0
        assert offs == sorted(offs)
        assert all(-o in offs for o in offs)
        assert all((o * 10).denominator == 1 for o in offs)  # multiples of 1/10

    def test_two_samples(self):
        assert _offsets(2) == [Fraction(-1), Fraction(1)]

    def test_minimum_enforced(self):
        with pytest.raises(DomainError):
            _offsets(1)


class TestHitAndScanInvariants:
    def test_hit_requires_negative_re(self):
        with pytest.raises(DomainError):
            NegativeRegionHit(None, ExactT(q=2), _value(0.5), 0.5)

    def test_hit_accepts_negative(self):
        hit = NegativeRegionHit(None, ExactT(q=2), _value(-0.1), -0.1)
        assert float(hit.zeta_value.re) == pytest.approx(-0.1)

    def test_window_scan_status_guard(self):
        with pytest.raises(DomainError):
            WindowScan(_point(), "pending", (), None)


class TestScanWindow:
    def test_all_positive_window(self):
        # q=432 is a base point but zeta stays positive in its window.
        scan = scan_window(_point(432), samples=5)
        assert scan.status == "scanned"
        assert scan.hit is None
        assert len(scan.samples) == 5
        offsets = [o for o, _ in scan.samples]
        assert offsets == _offsets(5)
        assert all(float(v.re) > 0 for _, v in scan.samples)

    def test_samples_match_direct_evaluation(self):
        scan = scan_window(_point(432), samples=3, digits=10)
        k = math.pi / (math.log(3) - math.log(2))
        with mpmath.mp.workdps(30):
            for offset, value in scan.samples:
                expected = mpmath.zeta(mpmath.mpc(1, 432 * mpmath.pi / (
                    mpmath.ln(3) - mpmath.ln(2)) + float(offset)))
                assert abs(complex(value) - complex(expected)) < 1e-8

    def test_unverifiable_above_ceiling(self):
        scan = scan_window(_point(432), samples=3, ceiling=100.0)
        assert scan.status == "unverifiable"
        assert scan.samples == ()
        assert scan.hit is None


class TestScanTables:
    def test_missing_order_rejected(self, small_run):
        with pytest.raises(DomainError):
            scan_tables(small_run, max_order=4)

    def test_no_hits_on_low_points(self, small_run):
        # Restrict to the first few order-3 points: all scan clean (the
        # earliest negative region is far above these heights).
        from confluence.confsearch import OrderResult, RunResult

        subset = RunResult()
        for order in (2, 3):
            src = small_run.per_order[order]
            subset.per_order[order] = OrderResult(
                order, src.points[:2], src.delta_used, src.member_windows
            )
        hits = scan_tables(subset, max_order=3, samples=3)
        assert hits == []


class TestBruteScan:
    def test_validation(self):
        with pytest.raises(DomainError):
            brute_scan(10.0, 5.0)
        with pytest.raises(DomainError):
            brute_scan(0.0, 10.0, step=0.0)
        with pytest.raises(DomainError):
            brute_scan(0.0, 10.0, chunk=0)

    def test_positive_range_returns_none(self):
        assert brute_scan(0.0, 500.0, step=0.5) is None

    def test_pole_guard_skips_origin(self):
        # Samples below t=1e-3 are excluded rather than evaluated.
        assert brute_scan(0.0, 1.0, step=0.25) is None

    def test_progress_callback_covers_range(self):
        seen = []
        brute_scan(1.0, 50.0, step=1.0, chunk=16, progress=seen.append)
        assert seen, "expected progress reports"
        assert seen == sorted(seen)
        assert seen[-1] == pytest.approx(50.0)

    def test_finds_known_negative_region(self):
        # The first negative region on sigma = 1 sits near t = 682112.9;
        # a narrow bracketing scan must find a certified sample inside it.
        t = brute_scan(682100.0, 682120.0, step=0.1)
        assert t is not None
        assert t == pytest.approx(682112.9, abs=0.05)
        from confluence.zetaeval import EvalRequest, zeta

        value = zeta(EvalRequest(1.0, t, 10))
        assert float(value.re) + value.err_bound < 0
