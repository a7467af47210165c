"""Disk bounds for log zeta on vertical lines and the negativity threshold."""

import math

import mpmath
import pytest

from confluence.errors import DomainError
from confluence.titchmarsh import (
    DiskBound,
    can_be_negative,
    disk_bound,
    negativity_threshold,
)


def _oracle(sigma):
    """Independent center/halfwidth/radius from mpmath's zeta directly."""
    with mpmath.mp.workdps(40):
        log_zs = mpmath.log(mpmath.zeta(sigma))
        log_z2s = mpmath.log(mpmath.zeta(2 * sigma))
        center = log_z2s / 2
        return float(center), float(log_zs - center), float(log_zs)


class TestDiskBound:
    def test_rejects_sigma_at_or_below_one(self):
        for sigma in (1.0, 0.5, -3.0):
            with pytest.raises(DomainError):
                disk_bound(sigma)

    @pytest.mark.parametrize("sigma", [1.05, 1.2, 1.5, 2.0, 3.0])
    def test_matches_direct_formula(self, sigma):
        bound = disk_bound(sigma)
        center, halfwidth, radius = _oracle(sigma)
        assert float(bound.center) == pytest.approx(center, rel=1e-12)
        assert float(bound.halfwidth) == pytest.approx(halfwidth, rel=1e-12)
        assert float(bound.radius) == pytest.approx(radius, rel=1e-12)
        assert bound.sigma == sigma

    def test_radius_is_center_plus_halfwidth(self):
        bound = disk_bound(1.3)
        assert float(bound.center + bound.halfwidth) == pytest.approx(
            float(bound.radius), rel=1e-12
        )

    def test_halfwidth_strictly_decreasing(self):
        sigmas = [1.05, 1.1, 1.2, 1.4, 1.8, 2.5]
        widths = [float(disk_bound(s).halfwidth) for s in sigmas]
        assert all(a > b for a, b in zip(widths, widths[1:]))

    def test_dataclass_guards(self):
        good = disk_bound(2.0)
        with pytest.raises(DomainError):
            DiskBound(0.9, good.center, good.halfwidth, good.radius)
        with pytest.raises(DomainError):
            DiskBound(2.0, good.center, -good.halfwidth, good.radius)


class TestNegativityThreshold:
    def test_value(self):
        assert float(negativity_threshold()) == pytest.approx(1.19717, abs=1e-3)

    def test_halfwidth_at_threshold_is_quarter_turn(self):
        sigma = float(negativity_threshold())
        assert float(disk_bound(sigma).halfwidth) == pytest.approx(
            math.pi / 2, abs=1e-4
        )

    def test_higher_digits_refine_consistently(self):
        coarse = float(negativity_threshold(6))
        fine = float(negativity_threshold(12))
        assert coarse == pytest.approx(fine, abs=10 ** (-6 / 2))


class TestCanBeNegative:
    def test_below_threshold_true(self):
        assert can_be_negative(1.05)
        assert can_be_negative(1.19)

    def test_above_threshold_false(self):
        assert not can_be_negative(1.21)
        assert not can_be_negative(2.0)
        assert not can_be_negative(10.0)

    def test_rejects_sigma_at_or_below_one(self):
        with pytest.raises(DomainError):
            can_be_negative(1.0)
        with pytest.raises(DomainError):
            can_be_negative(0.99)
