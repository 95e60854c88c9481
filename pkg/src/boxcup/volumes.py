"""Closed-form volumes of the four relaxations, and a Monte-Carlo oracle.

For canonically labeled bounds the 4-dimensional volume of the hull of
the graph of f = x1*x2*x3, and of each double-McCormick relaxation, has
an exact rational expression in the six bound constants.  Each
double-McCormick volume is the hull volume plus a nonnegative excess
term, and the excesses order the three systems: grouping the first two
labeled variables (system 3) is never worse.

``mc_volume_estimate`` is an independent check on those expressions: it
rejection-samples the tight bounding 4-box and counts membership hits.
It shares no code with the closed forms.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .trilinear import (
    DOUBLE_MCCORMICK,
    HULL_EXTENDED,
    Bounds3,
    InequalitySystem,
    box_corners,
    corner_products,
    grouped_pair,
    is_canonically_labeled,
)

__all__ = [
    "McEstimate",
    "vol_hull",
    "vol_excess",
    "vol_double_mccormick",
    "unit_ball_volume",
    "idealized_radius",
    "idealized_radial_distance",
    "mc_volume_estimate",
]


def _require_labeled(labeled: Bounds3) -> None:
    if not is_canonically_labeled(labeled):
        raise ValueError("bounds are not canonically labeled; relabel first")


def vol_hull(labeled: Bounds3) -> float:
    """Exact volume of the convex hull of the graph over the box."""
    _require_labeled(labeled)
    a1, a2, a3 = labeled.a
    b1, b2, b3 = labeled.b
    return (
        (b1 - a1)
        * (b2 - a2)
        * (b3 - a3)
        * (
            b1 * (5 * b2 * b3 - a2 * b3 - b2 * a3 - 3 * a2 * a3)
            + a1 * (5 * a2 * a3 - b2 * a3 - a2 * b3 - 3 * b2 * b3)
        )
        / 24.0
    )


def vol_excess(labeled: Bounds3, ungrouped: int) -> float:
    """Volume of system ``ungrouped`` minus the hull volume (nonnegative)."""
    _require_labeled(labeled)
    grouped_pair(ungrouped)
    a1, a2, a3 = labeled.a
    b1, b2, b3 = labeled.b
    common = (b1 - a1) * (b2 - a2) ** 2 * (b3 - a3) ** 2
    if ungrouped == 1:
        num = 3 * (b1 * b2 * a3 - a1 * b2 * a3 + b1 * a2 * b3 - a1 * a2 * b3) + 2 * (
            a1 * b2 * b3 - b1 * a2 * a3
        )
        den = 24.0 * (b2 * b3 - a2 * a3)
    elif ungrouped == 2:
        num = 5 * (a1 * b1 * b3 - a1 * b1 * a3) + 3 * (b1**2 * a3 - a1**2 * b3)
        den = 24.0 * (b1 * b3 - a1 * a3)
    else:
        num = 5 * (a1 * b1 * b2 - a1 * b1 * a2) + 3 * (b1**2 * a2 - a1**2 * b2)
        den = 24.0 * (b1 * b2 - a1 * a2)
    return common * num / den


def vol_double_mccormick(labeled: Bounds3, ungrouped: int) -> float:
    """Exact volume of the double-McCormick relaxation for one grouping."""
    return vol_hull(labeled) + vol_excess(labeled, ungrouped)


def unit_ball_volume(d: int) -> float:
    """Lebesgue measure of the Euclidean unit ball in dimension d."""
    if d < 1:
        raise ValueError("dimension must be positive")
    if d == 4:
        return math.pi**2 / 2.0
    return math.pi ** (d / 2.0) / math.gamma(d / 2.0 + 1.0)


def idealized_radius(volume: float, d: int = 4) -> float:
    """Radius of the ball in dimension d with the given volume."""
    if volume < 0:
        raise ValueError("volume must be nonnegative")
    return (volume / unit_ball_volume(d)) ** (1.0 / d)


def idealized_radial_distance(v1: float, v2: float, d: int = 4) -> float:
    """Radial height between the equal-volume balls of two bodies."""
    return abs(idealized_radius(v1, d) - idealized_radius(v2, d))


@dataclass(frozen=True)
class McEstimate:
    """Rejection-sampling volume estimate over the tight bounding 4-box."""

    estimate: float
    std_error: float
    samples: int
    seed: int
    hits: int


def _system_matrix(system: InequalitySystem) -> tuple[np.ndarray, np.ndarray]:
    """Coefficient matrix and rhs of a plain system over (f, x1, x2, x3)."""
    order = {v: i for i, v in enumerate(system.projected_variables)}
    C = np.zeros((len(system.inequalities), len(order)))
    r = np.zeros(len(system.inequalities))
    for row, ineq in enumerate(system.inequalities):
        for v, c in ineq.coefficients.items():
            C[row, order[v]] = c
        r[row] = ineq.rhs
    return C, r


def _hull_simplex_inverses(bounds: Bounds3) -> list[np.ndarray]:
    """Inverse barycentric systems for all nondegenerate corner 5-subsets.

    A point of the hull in R^4 is a convex combination of at most five
    affinely independent lifted corners, and any such subset extends to a
    nondegenerate 5-subset, so checking every nondegenerate 5-subset is a
    complete membership test.
    """
    corners = box_corners(bounds)
    products = corner_products(bounds)
    lifted = np.array(
        [[1.0, products[c], *corners[c]] for c in range(8)]
    )  # rows: (1, f, x1, x2, x3)
    scale = float(np.max(np.abs(lifted)))
    inverses = []
    for subset in combinations(range(8), 5):
        M = lifted[list(subset)].T  # columns are the lifted corners
        if abs(np.linalg.det(M)) <= 1e-9 * scale**4:
            continue
        inverses.append(np.linalg.inv(M))
    return inverses


def _hull_hits(bounds: Bounds3, points: np.ndarray, tol: float) -> np.ndarray:
    """Boolean hull membership for an (n, 4) batch of (f, x1, x2, x3) points."""
    lifted = np.hstack([np.ones((len(points), 1)), points])
    inside = np.zeros(len(points), dtype=bool)
    for inv in _hull_simplex_inverses(bounds):
        lam = inv @ lifted.T
        inside |= lam.min(axis=0) >= -tol
    return inside


def _plain_hits(
    system: InequalitySystem, points: np.ndarray, tol: float
) -> np.ndarray:
    C, r = _system_matrix(system)
    return (points @ C.T - r >= -tol).all(axis=1)


def mc_volume_estimate(
    bounds: Bounds3,
    system: InequalitySystem,
    samples: int,
    seed: int,
    membership_tol: float = 1e-9,
    chunk: int = 1 << 17,
) -> McEstimate:
    """Monte-Carlo volume of a relaxation, independent of the closed forms.

    Samples uniformly from the 4-box [a1,b1] x [a2,b2] x [a3,b3] x
    [a1*a2*a3, b1*b2*b3] (the exact f-range of all four relaxations) and
    counts membership.  The standard error is the binomial one scaled by
    the box volume.  Deterministic given the seed; hits are accumulated
    by integer addition so chunking cannot change the result.
    """
    if samples < 1:
        raise ValueError("need at least one sample")
    if system.kind not in (DOUBLE_MCCORMICK, HULL_EXTENDED):
        raise ValueError(f"cannot sample a {system.kind} system in the 4-box")
    lo = np.array([bounds.a[0] * bounds.a[1] * bounds.a[2], *bounds.a])
    hi = np.array([bounds.b[0] * bounds.b[1] * bounds.b[2], *bounds.b])
    box_volume = float(np.prod(hi - lo))
    if box_volume <= 0.0:
        raise ValueError("sampling box has zero volume")

    rng = np.random.default_rng(seed)
    hits = 0
    remaining = samples
    while remaining > 0:
        n = min(chunk, remaining)
        pts = rng.uniform(lo, hi, size=(n, 4))
        if system.kind == HULL_EXTENDED:
            inside = _hull_hits(bounds, pts, membership_tol)
        else:
            inside = _plain_hits(system, pts, membership_tol)
        hits += int(inside.sum())
        remaining -= n

    p = hits / samples
    estimate = p * box_volume
    std_error = math.sqrt(p * (1.0 - p) / samples) * box_volume
    return McEstimate(estimate, std_error, samples, seed, hits)
