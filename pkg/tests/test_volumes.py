import math

import numpy as np
import pytest

from boxcup.trilinear import (
    Bounds3,
    canonical_labeling,
    double_mccormick_system,
    hull_formulation,
    membership,
)
from boxcup.volumes import (
    McEstimate,
    _hull_hits,
    idealized_radial_distance,
    idealized_radius,
    mc_volume_estimate,
    unit_ball_volume,
    vol_double_mccormick,
    vol_excess,
    vol_hull,
)

from test_trilinear import random_bounds

UNIT = Bounds3((0, 0, 0), (1, 1, 1))
SHIFTED = Bounds3((1, 1, 1), (4, 3, 2))


class TestClosedForms:
    def test_unit_box_hull(self):
        assert vol_hull(UNIT) == pytest.approx(5 / 24, rel=1e-14)

    def test_unit_box_excess_vanishes(self):
        for ungrouped in (1, 2, 3):
            assert vol_excess(UNIT, ungrouped) == 0.0
            assert vol_double_mccormick(UNIT, ungrouped) == pytest.approx(5 / 24)

    def test_shifted_box_values(self):
        assert vol_hull(SHIFTED) == pytest.approx(17.5, rel=1e-14)
        assert vol_double_mccormick(SHIFTED, 1) == pytest.approx(22.4, rel=1e-14)
        assert vol_double_mccormick(SHIFTED, 2) == pytest.approx(17.5 + 31 / 7, rel=1e-14)
        assert vol_double_mccormick(SHIFTED, 3) == pytest.approx(17.5 + 79 / 22, rel=1e-14)

    def test_tied_sums_box(self):
        assert vol_hull(Bounds3((1, 2, 3), (2, 4, 5))) == pytest.approx(34 / 3, rel=1e-14)

    def test_rejects_unlabeled_bounds(self):
        unlabeled = Bounds3((1, 1, 1), (2, 3, 4))
        with pytest.raises(ValueError):
            vol_hull(unlabeled)
        with pytest.raises(ValueError):
            vol_double_mccormick(unlabeled, 1)

    def test_unit_pair_family(self):
        # a1=a2=0, b1=b2=1: grouping the unit pair gives the hull exactly,
        # and the two other groupings share the excess a3*(b3-a3)^2/(8*b3)
        for a3, b3 in [(1, 3), (2, 9), (10, 30), (37, 150)]:
            labeled = Bounds3((0, 0, a3), (1, 1, b3))
            assert vol_excess(labeled, 3) == 0.0
            assert vol_double_mccormick(labeled, 3) == vol_hull(labeled)
            expected = a3 * (b3 - a3) ** 2 / (8 * b3)
            assert vol_excess(labeled, 1) == pytest.approx(expected, rel=1e-12)
            assert vol_excess(labeled, 2) == pytest.approx(expected, rel=1e-12)

    def test_volume_ordering_random(self):
        rng = np.random.default_rng(29)
        for _ in range(1000):
            labeled = canonical_labeling(random_bounds(rng)).labeled
            vh = vol_hull(labeled)
            v3 = vol_double_mccormick(labeled, 3)
            v2 = vol_double_mccormick(labeled, 2)
            v1 = vol_double_mccormick(labeled, 1)
            slack = 1e-12 * max(1.0, v1)
            assert vh <= v3 + slack
            assert v3 <= v2 + slack
            assert v2 <= v1 + slack

    def test_scaling_is_quartic(self):
        rng = np.random.default_rng(31)
        for _ in range(20):
            labeled = canonical_labeling(random_bounds(rng)).labeled
            for t in (2.0, 10.0):
                scaled = labeled.scaled(t)
                assert vol_hull(scaled) == pytest.approx(t**4 * vol_hull(labeled), rel=1e-12)
                for u in (1, 2, 3):
                    assert vol_double_mccormick(scaled, u) == pytest.approx(
                        t**4 * vol_double_mccormick(labeled, u), rel=1e-12
                    )

    def test_excess_peak_at_third_of_upper(self):
        # integer sweep of the unit-pair excess peaks at a3 = b3/3
        for b3 in (9, 30, 60):
            excesses = [
                vol_excess(Bounds3((0, 0, a3), (1, 1, b3)), 2) for a3 in range(1, b3)
            ]
            assert int(np.argmax(excesses)) + 1 == b3 // 3


class TestIdealizedRadius:
    def test_unit_ball(self):
        assert unit_ball_volume(4) == pytest.approx(math.pi**2 / 2, rel=1e-15)
        assert idealized_radius(math.pi**2 / 2, 4) == pytest.approx(1.0, rel=1e-14)

    def test_zero_volume(self):
        assert idealized_radius(0.0, 4) == 0.0

    def test_shifted_hull_radius(self):
        assert idealized_radius(17.5, 4) == pytest.approx(1.3724, abs=1e-4)

    def test_radial_distance(self):
        assert idealized_radial_distance(22.4, 17.5, 4) == pytest.approx(0.0873, abs=1e-4)
        assert idealized_radial_distance(17.5, 17.5, 4) == 0.0

    def test_rejects_negative_volume(self):
        with pytest.raises(ValueError):
            idealized_radius(-1.0, 4)


class TestMonteCarloOracle:
    def test_deterministic_given_seed(self):
        system = double_mccormick_system(SHIFTED, 1)
        first = mc_volume_estimate(SHIFTED, system, 50_000, seed=9)
        second = mc_volume_estimate(SHIFTED, system, 50_000, seed=9)
        assert first == second

    def test_std_error_formula(self):
        system = double_mccormick_system(SHIFTED, 2)
        est = mc_volume_estimate(SHIFTED, system, 40_000, seed=4)
        box_volume = 3 * 2 * 1 * (24 - 1)
        p = est.hits / est.samples
        assert est.estimate == pytest.approx(p * box_volume, rel=1e-14)
        assert est.std_error == pytest.approx(
            math.sqrt(p * (1 - p) / est.samples) * box_volume, rel=1e-14
        )

    def test_agrees_with_closed_forms(self):
        rng = np.random.default_rng(12)
        for draw in range(3):
            labeled = canonical_labeling(random_bounds(rng, integer=True)).labeled
            targets = [("h", vol_hull(labeled))] + [
                (u, vol_double_mccormick(labeled, u)) for u in (1, 2, 3)
            ]
            for which, expected in targets:
                system = (
                    hull_formulation(labeled)
                    if which == "h"
                    else double_mccormick_system(labeled, which)
                )
                est = mc_volume_estimate(labeled, system, 150_000, seed=100 + draw)
                assert abs(est.estimate - expected) <= 3 * est.std_error

    def test_chunking_does_not_change_result(self):
        system = hull_formulation(SHIFTED)
        a = mc_volume_estimate(SHIFTED, system, 30_000, seed=2, chunk=1 << 17)
        b = mc_volume_estimate(SHIFTED, system, 30_000, seed=2, chunk=999)
        assert a == b

    def test_rejects_bilinear_kind(self):
        from boxcup.trilinear import mccormick_bilinear

        with pytest.raises(ValueError):
            mc_volume_estimate(SHIFTED, mccormick_bilinear(0, 1, 0, 1), 10, seed=0)

    def test_rejects_zero_samples(self):
        with pytest.raises(ValueError):
            mc_volume_estimate(SHIFTED, hull_formulation(SHIFTED), 0, seed=0)


class TestHullBatchMembership:
    def test_matches_feasibility_solve(self):
        # the simplex-enumeration batch test and the multiplier LP must
        # agree away from the boundary
        rng = np.random.default_rng(21)
        for _ in range(4):
            labeled = canonical_labeling(random_bounds(rng)).labeled
            system = hull_formulation(labeled)
            lo = np.array([labeled.a[0] * labeled.a[1] * labeled.a[2], *labeled.a])
            hi = np.array([labeled.b[0] * labeled.b[1] * labeled.b[2], *labeled.b])
            pts = rng.uniform(lo, hi, size=(60, 4))
            batch = _hull_hits(labeled, pts, tol=1e-9)
            for point, inside in zip(pts, batch):
                assert membership(point, system, tol=1e-7) == bool(inside)
