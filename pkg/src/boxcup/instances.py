"""Box-cubic test instances: hypergraphs, random bounds, directions, assembly.

A box-cubic problem optimizes a linear combination of trinomials
x_i*x_j*x_k over box-bounded variables; which trinomials appear is
encoded by a 3-uniform hypergraph.  Three stock scenarios are provided,
all with 20 hyperedges:

* ``dense``: the complete 3-uniform hypergraph on 6 vertices,
* ``sparse``: 20 vertices, the 20 cyclic consecutive triples,
* ``very-sparse``: 30 vertices, every vertex in exactly 2 edges.

``assemble_relaxation`` builds the linear feasible region obtained by
replacing every trinomial with one of the four single-trinomial
relaxations, each edge canonically relabeled from its own bounds.
Assembly is pure and byte-stable: the same inputs produce an identical
program, row for row.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Sequence

import numpy as np

from .lp import LinearProgram
from .trilinear import (
    Bounds3,
    LinearInequality,
    canonical_labeling,
    double_mccormick_system,
    hull_formulation,
)

__all__ = [
    "SCENARIOS",
    "RELAXATIONS",
    "Hypergraph",
    "BoundsSet",
    "AssembledRegion",
    "make_hypergraph",
    "gen_bounds",
    "gen_directions",
    "assemble_relaxation",
    "x_name",
    "f_name",
]

SCENARIOS = ("dense", "sparse", "very-sparse")
RELAXATIONS = ("h", "1", "2", "3")

# every 0 <= a < b <= 10 integer pair, in lexicographic order
_BOUND_PAIRS = tuple((a, b) for a in range(11) for b in range(a + 1, 11))


@dataclass(frozen=True)
class Hypergraph:
    """A 3-uniform hypergraph on vertices 1..n; edges stored sorted."""

    n: int
    edges: tuple[tuple[int, int, int], ...]

    def __post_init__(self) -> None:
        seen = set()
        for edge in self.edges:
            if len(set(edge)) != 3 or tuple(sorted(edge)) != edge:
                raise ValueError(f"edge {edge} must be 3 distinct sorted vertices")
            if not all(1 <= v <= self.n for v in edge):
                raise ValueError(f"edge {edge} has vertices outside 1..{self.n}")
            if edge in seen:
                raise ValueError(f"duplicate edge {edge}")
            seen.add(edge)

    def degrees(self) -> list[int]:
        deg = [0] * self.n
        for edge in self.edges:
            for v in edge:
                deg[v - 1] += 1
        return deg

    def to_json_dict(self) -> dict:
        return {"n": self.n, "edges": [list(e) for e in self.edges]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "Hypergraph":
        return cls(int(data["n"]), tuple(tuple(int(v) for v in e) for e in data["edges"]))


@dataclass(frozen=True)
class BoundsSet:
    """Per-vertex integer intervals [a_i, b_i] with 0 <= a_i < b_i.

    The stock generator only emits pairs with b <= 10; the type itself
    allows larger uppers (the worst-case sweep stretches one interval).
    """

    intervals: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        for lo, hi in self.intervals:
            if not (isinstance(lo, int) and isinstance(hi, int)):
                raise ValueError(f"interval [{lo}, {hi}] must be integer")
            if not (0 <= lo < hi):
                raise ValueError(f"invalid interval [{lo}, {hi}]: need 0 <= a < b")

    @property
    def n(self) -> int:
        return len(self.intervals)

    def edge_bounds(self, edge: tuple[int, int, int]) -> Bounds3:
        iv = [self.intervals[v - 1] for v in edge]
        return Bounds3(tuple(float(lo) for lo, _ in iv), tuple(float(hi) for _, hi in iv))

    def to_json_dict(self) -> dict:
        return {"n": self.n, "bounds": [list(iv) for iv in self.intervals]}

    @classmethod
    def from_json_dict(cls, data: dict) -> "BoundsSet":
        return cls(tuple((int(a), int(b)) for a, b in data["bounds"]))


def _wrap20(v: int) -> int:
    return (v - 1) % 20 + 1


def make_hypergraph(scenario: str) -> Hypergraph:
    """One of the three stock 20-edge scenarios."""
    if scenario == "dense":
        return Hypergraph(6, tuple(combinations(range(1, 7), 3)))
    if scenario == "sparse":
        edges = tuple(
            tuple(sorted((i, _wrap20(i + 1), _wrap20(i + 2)))) for i in range(1, 21)
        )
        return Hypergraph(20, edges)
    if scenario == "very-sparse":
        # Edges form a cycle through link vertices 1..20 (edge i shares a
        # link with edge i+1); edges i and i+10 additionally share one of
        # the vertices 21..30.  Every vertex ends up in exactly 2 edges.
        edges = []
        for i in range(1, 21):
            link_prev = _wrap20(i - 1)
            link_here = i
            shared = 21 + (i - 1) % 10
            edges.append(tuple(sorted((link_prev, link_here, shared))))
        return Hypergraph(30, tuple(edges))
    raise ValueError(f"unknown scenario {scenario!r}; expected one of {SCENARIOS}")


def gen_bounds(n: int, seed: int) -> BoundsSet:
    """n intervals drawn uniformly from the 55 integer pairs 0 <= a < b <= 10."""
    rng = np.random.default_rng(seed)
    picks = rng.integers(0, len(_BOUND_PAIRS), size=n)
    return BoundsSet(tuple(_BOUND_PAIRS[i] for i in picks))


def gen_directions(m: int, count: int, seed: int) -> np.ndarray:
    """``count`` unit vectors in dimension m, uniform on the sphere."""
    if m < 1:
        raise ValueError("dimension must be positive")
    rng = np.random.default_rng(seed)
    raw = rng.standard_normal((count, m))
    return raw / np.linalg.norm(raw, axis=1, keepdims=True)


def x_name(vertex: int) -> str:
    return f"x{vertex}"


def f_name(edge: tuple[int, int, int]) -> str:
    return "f_" + "_".join(str(v) for v in edge)


@dataclass(frozen=True)
class AssembledRegion:
    """The feasible region of one aggregate relaxation, plus name maps."""

    program: LinearProgram
    relaxation: str  # "h", "1", "2" or "3"
    x_names: tuple[str, ...]
    f_names: tuple[str, ...]


def assemble_relaxation(
    h: Hypergraph, bounds: BoundsSet, relaxation: int | str
) -> AssembledRegion:
    """Apply one single-trinomial relaxation to every hyperedge.

    Each edge is canonically relabeled from its own three intervals
    before its system is instantiated; the x variables are shared across
    edges, and every f variable carries the implied product bounds so the
    region is bounded in all directions.
    """
    label = str(relaxation)
    if label not in RELAXATIONS:
        raise ValueError(f"relaxation must be one of {RELAXATIONS}, got {relaxation!r}")
    if bounds.n < h.n:
        raise ValueError(f"bounds cover {bounds.n} vertices, hypergraph has {h.n}")

    x_names = tuple(x_name(v) for v in range(1, h.n + 1))
    f_names = tuple(f_name(e) for e in h.edges)
    variables = list(x_names)
    var_bounds: list[tuple[float | None, float | None]] = [
        (float(lo), float(hi)) for lo, hi in bounds.intervals[: h.n]
    ]
    for edge in h.edges:
        iv = [bounds.intervals[v - 1] for v in edge]
        variables.append(f_name(edge))
        var_bounds.append(
            (float(iv[0][0] * iv[1][0] * iv[2][0]), float(iv[0][1] * iv[1][1] * iv[2][1]))
        )

    constraints: list[LinearInequality] = []
    lam_names: list[str] = []
    for e_idx, edge in enumerate(h.edges):
        labeling = canonical_labeling(bounds.edge_bounds(edge))
        names = (
            f_name(edge),
            x_name(edge[labeling.perm[0]]),
            x_name(edge[labeling.perm[1]]),
            x_name(edge[labeling.perm[2]]),
        )
        if label == "h":
            system = hull_formulation(
                labeling.labeled, names=names, multiplier_prefix=f"lam_{e_idx}_"
            )
            lam_names.extend(system.multipliers)
        else:
            system = double_mccormick_system(labeling.labeled, int(label), names=names)
        constraints.extend(system.inequalities)

    variables.extend(lam_names)
    var_bounds.extend([(0.0, None)] * len(lam_names))

    program = LinearProgram(
        variables=tuple(variables),
        bounds=tuple(var_bounds),
        constraints=tuple(constraints),
    )
    return AssembledRegion(program, label, x_names, f_names)
