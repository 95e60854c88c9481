"""Polyhedral systems for a single trilinear monomial f = x1*x2*x3 on a box.

Four outer approximations of the graph are built here:

* the four-inequality McCormick system for one bilinear product,
* the three projected double-McCormick systems (convexify one pair of
  variables first, then the product of the result with the remaining
  variable, and project out the intermediate product variable),
* the convex hull of the graph, written as an extended formulation with
  one convex multiplier per box corner (the hull's vertices are exactly
  the graph points over the corners).

All systems are lists of ``>=`` inequalities over named variables.  The
double-McCormick systems are only valid for canonically labeled bounds:
the three mixed corner sums

    s_i = a_i*b_j*b_k + b_i*a_j*a_k          ({j,k} the other two indices)

must be nondecreasing, s_1 <= s_2 <= s_3.  ``canonical_labeling`` finds a
variable permutation achieving that.  With this labeling, "system ell"
(ell = 1, 2, 3) is the double-McCormick system that groups the pair of
variables complementary to ell, and system 3 is the strongest of the
three.

Values are immutable after construction and safe to share across threads;
every function here is pure.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

__all__ = [
    "Bounds3",
    "Labeling",
    "LinearInequality",
    "InequalitySystem",
    "BILINEAR",
    "DOUBLE_MCCORMICK",
    "HULL_EXTENDED",
    "mixed_corner_sums",
    "is_canonically_labeled",
    "canonical_labeling",
    "grouped_pair",
    "mccormick_bilinear",
    "double_mccormick_system",
    "hull_formulation",
    "box_corners",
    "corner_products",
    "membership",
]

BILINEAR = "bilinear-mccormick"
DOUBLE_MCCORMICK = "double-mccormick"
HULL_EXTENDED = "hull-extended"


@dataclass(frozen=True)
class Bounds3:
    """Box bounds 0 <= a_i < b_i for the three variables of one trinomial."""

    a: tuple[float, float, float]
    b: tuple[float, float, float]

    def __post_init__(self) -> None:
        a = tuple(float(v) for v in self.a)
        b = tuple(float(v) for v in self.b)
        if len(a) != 3 or len(b) != 3:
            raise ValueError("Bounds3 needs exactly three intervals")
        for lo, hi in zip(a, b):
            if not (0.0 <= lo < hi):
                raise ValueError(f"invalid interval [{lo}, {hi}]: need 0 <= a < b")
        object.__setattr__(self, "a", a)
        object.__setattr__(self, "b", b)

    def permuted(self, perm: Sequence[int]) -> "Bounds3":
        """Bounds relabeled so that slot p holds original variable perm[p] (0-based)."""
        if sorted(perm) != [0, 1, 2]:
            raise ValueError(f"not a permutation of (0, 1, 2): {perm}")
        return Bounds3(
            tuple(self.a[p] for p in perm),
            tuple(self.b[p] for p in perm),
        )

    def scaled(self, t: float) -> "Bounds3":
        return Bounds3(tuple(t * v for v in self.a), tuple(t * v for v in self.b))


@dataclass(frozen=True)
class Labeling:
    """A canonical relabeling: ``labeled`` equals the input permuted by ``perm``.

    ``perm`` is 0-based: labeled slot p holds original variable perm[p].
    """

    perm: tuple[int, int, int]
    labeled: Bounds3


def mixed_corner_sums(bounds: Bounds3) -> tuple[float, float, float]:
    """The sum a_i*b_j*b_k + b_i*a_j*a_k for each singled-out index i."""
    a, b = bounds.a, bounds.b
    return (
        a[0] * b[1] * b[2] + b[0] * a[1] * a[2],
        b[0] * a[1] * b[2] + a[0] * b[1] * a[2],
        b[0] * b[1] * a[2] + a[0] * a[1] * b[2],
    )


def is_canonically_labeled(bounds: Bounds3) -> bool:
    s1, s2, s3 = mixed_corner_sums(bounds)
    return s1 <= s2 <= s3


def canonical_labeling(bounds: Bounds3) -> Labeling:
    """Relabel the variables so the mixed corner sums are nondecreasing.

    A valid relabeling always exists (the sums are the three pairings, so
    sorting them works).  Ties are broken by returning the
    lexicographically smallest permutation, which makes the labeling
    deterministic; in particular, already-labeled bounds get the identity.
    """
    for perm in itertools.permutations((0, 1, 2)):
        labeled = bounds.permuted(perm)
        if is_canonically_labeled(labeled):
            return Labeling(perm, labeled)
    raise AssertionError("unreachable: some permutation always sorts the sums")


def grouped_pair(ungrouped: int) -> tuple[int, int]:
    """The 1-based labeled indices convexified first by system ``ungrouped``."""
    if ungrouped not in (1, 2, 3):
        raise ValueError(f"system index must be 1, 2 or 3, got {ungrouped}")
    g1, g2 = sorted({1, 2, 3} - {ungrouped})
    return g1, g2


@dataclass(frozen=True)
class LinearInequality:
    """``sum(coefficients[v] * v) >= rhs``.  Treated as immutable."""

    coefficients: dict[str, float]
    rhs: float

    def __post_init__(self) -> None:
        if not any(c != 0.0 for c in self.coefficients.values()):
            raise ValueError("inequality has no nonzero coefficient")

    def residual(self, values: Mapping[str, float]) -> float:
        """lhs minus rhs at the given point; nonnegative iff satisfied."""
        return sum(c * values[v] for v, c in self.coefficients.items()) - self.rhs

    def negated(self) -> "LinearInequality":
        return LinearInequality({v: -c for v, c in self.coefficients.items()}, -self.rhs)


_KIND_ROWS = {BILINEAR: 4, DOUBLE_MCCORMICK: 14, HULL_EXTENDED: 18}


@dataclass(frozen=True)
class InequalitySystem:
    """An ordered list of >= inequalities over named variables.

    For the hull-extended kind the trailing 8 variables are the convex
    multipliers; equations (multiplier normalization and the linking rows
    tying f and the x's to the multipliers) are stored as +/- inequality
    pairs, giving 8 + 2 + 8 = 18 rows.
    """

    variables: tuple[str, ...]
    inequalities: tuple[LinearInequality, ...]
    kind: str

    def __post_init__(self) -> None:
        if self.kind not in _KIND_ROWS:
            raise ValueError(f"unknown system kind: {self.kind!r}")
        expected = _KIND_ROWS[self.kind]
        if len(self.inequalities) != expected:
            raise ValueError(
                f"{self.kind} system must have {expected} rows, got {len(self.inequalities)}"
            )
        declared = set(self.variables)
        for ineq in self.inequalities:
            undeclared = set(ineq.coefficients) - declared
            if undeclared:
                raise ValueError(f"inequality references undeclared variables {undeclared}")

    @property
    def projected_variables(self) -> tuple[str, ...]:
        """The variables the system describes once multipliers are projected out."""
        if self.kind == HULL_EXTENDED:
            return self.variables[:4]
        return self.variables

    @property
    def multipliers(self) -> tuple[str, ...]:
        return self.variables[4:] if self.kind == HULL_EXTENDED else ()

    def residuals(self, values: Mapping[str, float]) -> list[float]:
        return [ineq.residual(values) for ineq in self.inequalities]


def mccormick_bilinear(
    a_i: float,
    b_i: float,
    a_j: float,
    b_j: float,
    *,
    names: tuple[str, str, str] = ("xi", "xj", "w"),
) -> InequalitySystem:
    """The four McCormick inequalities for w = xi*xj on [a_i,b_i] x [a_j,b_j]."""
    if not a_i < b_i or not a_j < b_j:
        raise ValueError("degenerate interval: need a < b on both factors")
    xi, xj, w = names
    rows = (
        LinearInequality({w: 1.0, xi: -a_j, xj: -a_i}, -a_i * a_j),
        LinearInequality({w: -1.0, xi: b_j, xj: a_i}, a_i * b_j),
        LinearInequality({w: -1.0, xi: a_j, xj: b_i}, b_i * a_j),
        LinearInequality({w: 1.0, xi: -b_j, xj: -b_i}, -b_i * b_j),
    )
    return InequalitySystem(names, rows, BILINEAR)


def double_mccormick_system(
    labeled: Bounds3,
    ungrouped: int,
    *,
    names: tuple[str, str, str, str] = ("f", "x1", "x2", "x3"),
) -> InequalitySystem:
    """The 14-row projected double-McCormick system for one grouping choice.

    System ``ungrouped`` convexifies the product of the two other labeled
    variables first; the intermediate product variable is then eliminated
    by projection.  The two rows made redundant by that projection (f
    bounded by the grouped-product box alone) are never emitted.  Within
    the grouped pair, the smaller labeled index plays the first role in
    the row template, which fixes a byte-stable output.
    """
    if not is_canonically_labeled(labeled):
        raise ValueError("bounds are not canonically labeled; relabel first")
    g1, g2 = grouped_pair(ungrouped)
    k = ungrouped
    fn = names[0]
    xi, xj, xk = names[g1], names[g2], names[k]
    ai, bi = labeled.a[g1 - 1], labeled.b[g1 - 1]
    aj, bj = labeled.a[g2 - 1], labeled.b[g2 - 1]
    ak, bk = labeled.a[k - 1], labeled.b[k - 1]

    rows = (
        # box rows for the grouped pair
        LinearInequality({xi: 1.0}, ai),
        LinearInequality({xj: 1.0}, aj),
        # underestimators of f
        LinearInequality(
            {fn: 1.0, xi: -aj * ak, xj: -ai * ak, xk: -ai * aj}, -2.0 * ai * aj * ak
        ),
        LinearInequality(
            {fn: 1.0, xi: -aj * bk, xj: -ai * bk, xk: -bi * bj},
            -(ai * aj * bk + bi * bj * bk),
        ),
        LinearInequality({xj: -1.0}, -bj),
        LinearInequality({xi: -1.0}, -bi),
        LinearInequality(
            {fn: 1.0, xi: -bj * ak, xj: -bi * ak, xk: -ai * aj},
            -(ai * aj * ak + bi * bj * ak),
        ),
        LinearInequality(
            {fn: 1.0, xi: -bj * bk, xj: -bi * bk, xk: -bi * bj}, -2.0 * bi * bj * bk
        ),
        # overestimators of f
        LinearInequality(
            {fn: -1.0, xi: bj * bk, xj: ai * bk, xk: ai * aj},
            ai * aj * bk + ai * bj * bk,
        ),
        LinearInequality(
            {fn: -1.0, xi: aj * bk, xj: bi * bk, xk: ai * aj},
            ai * aj * bk + bi * aj * bk,
        ),
        LinearInequality({xk: -1.0}, -bk),
        LinearInequality(
            {fn: -1.0, xi: bj * ak, xj: ai * ak, xk: bi * bj},
            ai * bj * ak + bi * bj * ak,
        ),
        LinearInequality(
            {fn: -1.0, xi: aj * ak, xj: bi * ak, xk: bi * bj},
            bi * aj * ak + bi * bj * ak,
        ),
        LinearInequality({xk: 1.0}, ak),
    )
    return InequalitySystem(names, rows, DOUBLE_MCCORMICK)


def box_corners(bounds: Bounds3) -> list[tuple[float, float, float]]:
    """The 8 box corners, in product order (last coordinate fastest)."""
    return list(itertools.product(*zip(bounds.a, bounds.b)))


def corner_products(bounds: Bounds3) -> list[float]:
    return [c[0] * c[1] * c[2] for c in box_corners(bounds)]


def hull_formulation(
    bounds: Bounds3,
    *,
    names: tuple[str, str, str, str] = ("f", "x1", "x2", "x3"),
    multiplier_prefix: str = "lam",
) -> InequalitySystem:
    """Extended formulation of the hull of the graph over the box.

    One convex multiplier per box corner; the multipliers are constrained
    to the simplex, and f and the x's are tied to the convex combination
    of the corners and of the corner products.  Its projection onto
    (f, x1, x2, x3) is exactly the convex hull of the graph.
    """
    corners = box_corners(bounds)
    products = corner_products(bounds)
    lam = tuple(f"{multiplier_prefix}{c}" for c in range(8))
    rows: list[LinearInequality] = [LinearInequality({m: 1.0}, 0.0) for m in lam]

    def equation(coeffs: dict[str, float], rhs: float) -> None:
        eq = LinearInequality(coeffs, rhs)
        rows.append(eq)
        rows.append(eq.negated())

    equation({m: 1.0 for m in lam}, 1.0)
    for d in range(3):
        coeffs = {names[1 + d]: 1.0}
        coeffs.update({lam[c]: -corners[c][d] for c in range(8)})
        equation(coeffs, 0.0)
    coeffs = {names[0]: 1.0}
    coeffs.update({lam[c]: -products[c] for c in range(8)})
    equation(coeffs, 0.0)

    return InequalitySystem(names + lam, tuple(rows), HULL_EXTENDED)


def _point_values(
    point: Mapping[str, float] | Sequence[float], system: InequalitySystem
) -> dict[str, float]:
    projected = system.projected_variables
    if isinstance(point, Mapping):
        missing = set(projected) - set(point)
        if missing:
            raise ValueError(f"point is missing values for {sorted(missing)}")
        return {v: float(point[v]) for v in projected}
    values = list(point)
    if len(values) != len(projected):
        raise ValueError(
            f"point has dimension {len(values)}, system projects onto {len(projected)}"
        )
    return dict(zip(projected, map(float, values)))


def membership(
    point: Mapping[str, float] | Sequence[float],
    system: InequalitySystem,
    tol: float = 1e-9,
) -> bool:
    """Whether the point lies in the projection of the system's feasible set.

    Plain inequality systems are checked row by row.  For the
    hull-extended kind the multipliers are projected out by solving a
    small feasibility program: minimize a single slack added to every
    row; the point is a member iff the optimal slack is at most ``tol``.
    """
    values = _point_values(point, system)
    if system.kind != HULL_EXTENDED:
        return all(r >= -tol for r in system.residuals(values))

    from . import lp  # deferred: lp builds on the types defined here

    slack = "_slack"
    rows = []
    for ineq in system.inequalities:
        coeffs = {v: c for v, c in ineq.coefficients.items() if v in system.multipliers}
        known = sum(
            c * values[v] for v, c in ineq.coefficients.items() if v not in system.multipliers
        )
        coeffs[slack] = 1.0
        rows.append(LinearInequality(coeffs, ineq.rhs - known))
    program = lp.LinearProgram(
        variables=system.multipliers + (slack,),
        bounds=tuple([(None, None)] * len(system.multipliers) + [(0.0, None)]),
        constraints=tuple(rows),
        objective={slack: 1.0},
    )
    solution = lp.solve(program, "min")
    if solution.status != "optimal":
        raise RuntimeError(f"hull membership feasibility solve failed: {solution.status}")
    return solution.value <= tol
