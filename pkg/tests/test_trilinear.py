import itertools

import numpy as np
import pytest

from boxcup.trilinear import (
    BILINEAR,
    DOUBLE_MCCORMICK,
    HULL_EXTENDED,
    Bounds3,
    LinearInequality,
    box_corners,
    canonical_labeling,
    corner_products,
    double_mccormick_system,
    grouped_pair,
    hull_formulation,
    is_canonically_labeled,
    mccormick_bilinear,
    membership,
    mixed_corner_sums,
)


def random_bounds(rng, integer=False):
    if integer:
        a = rng.integers(0, 10, size=3)
        b = a + rng.integers(1, 10 - a + 1)
        return Bounds3(tuple(float(v) for v in a), tuple(float(v) for v in b))
    a = rng.uniform(0.0, 6.0, size=3)
    b = a + rng.uniform(0.2, 6.0, size=3)
    return Bounds3(tuple(a), tuple(b))


class TestBounds3:
    def test_rejects_degenerate_interval(self):
        with pytest.raises(ValueError):
            Bounds3((0, 1, 1), (1, 1, 2))

    def test_rejects_negative_lower(self):
        with pytest.raises(ValueError):
            Bounds3((-0.5, 0, 0), (1, 1, 1))

    def test_rejects_inverted_interval(self):
        with pytest.raises(ValueError):
            Bounds3((2, 0, 0), (1, 1, 1))


class TestCanonicalLabeling:
    def test_already_sorted_box(self):
        lab = canonical_labeling(Bounds3((0, 0, 2), (1, 1, 6)))
        assert lab.perm == (0, 1, 2)
        assert mixed_corner_sums(lab.labeled) == (0.0, 0.0, 2.0)

    def test_reversing_box(self):
        lab = canonical_labeling(Bounds3((1, 1, 1), (2, 3, 4)))
        assert lab.perm == (2, 1, 0)
        assert lab.labeled == Bounds3((1, 1, 1), (4, 3, 2))
        assert mixed_corner_sums(lab.labeled) == (10.0, 11.0, 14.0)

    def test_tied_sums_take_identity(self):
        lab = canonical_labeling(Bounds3((1, 2, 3), (2, 4, 5)))
        assert lab.perm == (0, 1, 2)
        assert mixed_corner_sums(lab.labeled) == (32.0, 32.0, 34.0)

    def test_matches_full_enumeration(self):
        # oracle: the first permutation in lexicographic order whose
        # relabeled sums are nondecreasing
        rng = np.random.default_rng(101)
        for _ in range(200):
            bounds = random_bounds(rng)
            expected = next(
                perm
                for perm in itertools.permutations((0, 1, 2))
                if is_canonically_labeled(bounds.permuted(perm))
            )
            lab = canonical_labeling(bounds)
            assert lab.perm == expected
            assert lab.labeled == bounds.permuted(lab.perm)
            assert is_canonically_labeled(lab.labeled)

    def test_idempotent_on_labeled_bounds(self):
        rng = np.random.default_rng(7)
        for _ in range(200):
            labeled = canonical_labeling(random_bounds(rng)).labeled
            assert canonical_labeling(labeled).perm == (0, 1, 2)


class TestMcCormickBilinear:
    def test_unit_square(self):
        system = mccormick_bilinear(0, 1, 0, 1)
        assert system.kind == BILINEAR
        assert [(ineq.coefficients, ineq.rhs) for ineq in system.inequalities] == [
            ({"w": 1.0, "xi": 0.0, "xj": 0.0}, 0.0),
            ({"w": -1.0, "xi": 1.0, "xj": 0.0}, 0.0),
            ({"w": -1.0, "xi": 0.0, "xj": 1.0}, 0.0),
            ({"w": 1.0, "xi": -1.0, "xj": -1.0}, -1.0),
        ]

    def test_shifted_box_first_row(self):
        system = mccormick_bilinear(1, 2, 3, 4)
        first = system.inequalities[0]
        assert first.coefficients == {"w": 1.0, "xi": -3.0, "xj": -1.0}
        assert first.rhs == -3.0

    def test_graph_corner_is_feasible(self):
        rng = np.random.default_rng(5)
        for _ in range(50):
            ai, aj = rng.uniform(0, 5, size=2)
            bi, bj = ai + rng.uniform(0.1, 5), aj + rng.uniform(0.1, 5)
            system = mccormick_bilinear(ai, bi, aj, bj)
            values = {"xi": ai, "xj": aj, "w": ai * aj}
            assert all(r >= -1e-12 for r in system.residuals(values))

    def test_rejects_degenerate_interval(self):
        with pytest.raises(ValueError):
            mccormick_bilinear(1, 1, 0, 1)


class TestDoubleMcCormick:
    def test_has_fourteen_rows(self):
        system = double_mccormick_system(Bounds3((0, 0, 0), (1, 1, 1)), 1)
        assert system.kind == DOUBLE_MCCORMICK
        assert len(system.inequalities) == 14

    def test_rejects_unlabeled_bounds(self):
        with pytest.raises(ValueError):
            double_mccormick_system(Bounds3((1, 1, 1), (2, 3, 4)), 1)

    def test_grouping_indices(self):
        assert grouped_pair(1) == (2, 3)
        assert grouped_pair(2) == (1, 3)
        assert grouped_pair(3) == (1, 2)
        with pytest.raises(ValueError):
            grouped_pair(4)

    def test_known_underestimator_row(self):
        # grouping (x1, x2) on a=(1,1,1), b=(4,3,2): the first f row reads
        # f - x1 - x2 - x3 + 2 >= 0
        system = double_mccormick_system(Bounds3((1, 1, 1), (4, 3, 2)), 3)
        row = system.inequalities[2]
        assert row.coefficients == {"f": 1.0, "x1": -1.0, "x2": -1.0, "x3": -1.0}
        assert row.rhs == -2.0

    def test_unit_box_corners_feasible_all_groupings(self):
        labeled = Bounds3((0, 0, 0), (1, 1, 1))
        for ungrouped in (1, 2, 3):
            system = double_mccormick_system(labeled, ungrouped)
            for corner in box_corners(labeled):
                values = dict(zip(("x1", "x2", "x3"), corner))
                values["f"] = corner[0] * corner[1] * corner[2]
                assert all(r >= -1e-12 for r in system.residuals(values))

    def test_graph_grid_feasible(self):
        # every graph point on a 5x5x5 grid satisfies all three systems
        rng = np.random.default_rng(11)
        for _ in range(20):
            labeled = canonical_labeling(random_bounds(rng)).labeled
            grids = [np.linspace(lo, hi, 5) for lo, hi in zip(labeled.a, labeled.b)]
            for ungrouped in (1, 2, 3):
                system = double_mccormick_system(labeled, ungrouped)
                for x1, x2, x3 in itertools.product(*grids):
                    values = {"f": x1 * x2 * x3, "x1": x1, "x2": x2, "x3": x3}
                    assert all(r >= -1e-9 for r in system.residuals(values))

    def test_projected_rows_are_nonnegative_combinations(self):
        # the two rows dropped from the projection are exact nonnegative
        # combinations of retained rows:
        #   f - ai*aj*xk >= 0   from rows 1, 2 and 3
        #  -f + bi*bj*xk >= 0   from rows 6, 5 and 12
        rng = np.random.default_rng(23)
        for _ in range(50):
            labeled = canonical_labeling(random_bounds(rng)).labeled
            for ungrouped in (1, 2, 3):
                g1, g2 = grouped_pair(ungrouped)
                ai, bi = labeled.a[g1 - 1], labeled.b[g1 - 1]
                aj, bj = labeled.a[g2 - 1], labeled.b[g2 - 1]
                ak, bk = labeled.a[ungrouped - 1], labeled.b[ungrouped - 1]
                rows = double_mccormick_system(labeled, ungrouped).inequalities
                xk = f"x{ungrouped}"

                def combine(terms):
                    coeffs: dict[str, float] = {}
                    rhs = 0.0
                    for weight, row in terms:
                        for v, c in row.coefficients.items():
                            coeffs[v] = coeffs.get(v, 0.0) + weight * c
                        rhs += weight * row.rhs
                    return coeffs, rhs

                coeffs, rhs = combine([(aj * ak, rows[0]), (ai * ak, rows[1]), (1.0, rows[2])])
                expected = {"f": 1.0, xk: -ai * aj}
                for v in ("x1", "x2", "x3"):
                    assert abs(coeffs.get(v, 0.0) - expected.get(v, 0.0)) < 1e-9
                assert abs(coeffs["f"] - 1.0) < 1e-12
                assert abs(rhs) < 1e-9

                coeffs, rhs = combine([(bj * ak, rows[5]), (ai * ak, rows[4]), (1.0, rows[11])])
                expected = {"f": -1.0, xk: bi * bj}
                for v in ("x1", "x2", "x3"):
                    assert abs(coeffs.get(v, 0.0) - expected.get(v, 0.0)) < 1e-9
                assert abs(coeffs["f"] + 1.0) < 1e-12
                assert abs(rhs) < 1e-9


class TestHullFormulation:
    def test_unit_box_corner_values(self):
        assert sorted(corner_products(Bounds3((0, 0, 0), (1, 1, 1)))) == [0] * 7 + [1]

    def test_shifted_box_corner_values(self):
        products = corner_products(Bounds3((1, 1, 1), (4, 3, 2)))
        assert sorted(products) == [1, 2, 3, 4, 6, 8, 12, 24]

    def test_row_structure(self):
        system = hull_formulation(Bounds3((1, 1, 1), (4, 3, 2)))
        assert system.kind == HULL_EXTENDED
        assert len(system.inequalities) == 18
        assert system.multipliers == tuple(f"lam{c}" for c in range(8))
        for c in range(8):  # multiplier nonnegativity rows come first
            row = system.inequalities[c]
            assert row.coefficients == {f"lam{c}": 1.0} and row.rhs == 0.0
        for pair_start in range(8, 18, 2):  # then five equation pairs
            plus, minus = system.inequalities[pair_start : pair_start + 2]
            assert minus == plus.negated()

    def test_projected_f_range(self):
        bounds = Bounds3((1, 1, 1), (4, 3, 2))
        system = hull_formulation(bounds)
        assert membership((1.0, 1, 1, 1), system)
        assert membership((24.0, 4, 3, 2), system)
        assert not membership((25.0, 4, 3, 2), system)
        assert not membership((0.9, 1, 1, 1), system)


class TestMembership:
    def test_graph_corner_in_every_kind(self):
        bounds = Bounds3((1, 2, 3), (2, 4, 5))
        labeled = canonical_labeling(bounds).labeled
        a = labeled.a
        point = (a[0] * a[1] * a[2], *a)
        for ungrouped in (1, 2, 3):
            assert membership(point, double_mccormick_system(labeled, ungrouped))
        assert membership(point, hull_formulation(labeled))
        assert membership(
            (a[0], a[1], a[0] * a[1]), mccormick_bilinear(a[0], labeled.b[0], a[1], labeled.b[1])
        )

    def test_box_midpoint_graph_point(self):
        rng = np.random.default_rng(3)
        for _ in range(10):
            labeled = canonical_labeling(random_bounds(rng)).labeled
            mid = [(lo + hi) / 2 for lo, hi in zip(labeled.a, labeled.b)]
            point = (mid[0] * mid[1] * mid[2], *mid)
            for ungrouped in (1, 2, 3):
                assert membership(point, double_mccormick_system(labeled, ungrouped))
            assert membership(point, hull_formulation(labeled))

    def test_dimension_mismatch(self):
        system = hull_formulation(Bounds3((0, 0, 0), (1, 1, 1)))
        with pytest.raises(ValueError):
            membership((0.5, 0.5, 0.5), system)

    def test_hull_acceptance_implies_double_mccormick(self):
        # random convex combinations of the lifted corners are hull points
        # and must satisfy all three projected systems; the multiplier
        # feasibility solve is cross-checked on a subsample
        rng = np.random.default_rng(17)
        for _ in range(5):
            labeled = canonical_labeling(random_bounds(rng)).labeled
            corners = np.array(box_corners(labeled))
            products = np.array(corner_products(labeled))
            hull = hull_formulation(labeled)
            systems = [double_mccormick_system(labeled, u) for u in (1, 2, 3)]
            weights = rng.dirichlet(np.ones(8), size=1000)
            points = np.column_stack([weights @ products, weights @ corners])
            for point in points:
                for system in systems:
                    assert membership(point, system, tol=1e-7)
            for point in points[:25]:
                assert membership(point, hull, tol=1e-7)


def test_linear_inequality_requires_nonzero_coefficient():
    with pytest.raises(ValueError):
        LinearInequality({"x": 0.0}, 1.0)
