"""Width experiments over assembled relaxations.

The central quantity is the quasi mean width of a region: the average,
over sampled unit objective directions on the f variables, of max minus
min of the direction over the region.  From per-bound-set widths the
module derives the difference tables, performance profiles, and the
regressions of width against aggregated fourth-root volumes, plus the
fixed worst-case sweep where one variable's interval is stretched.

Directions are processed in fixed-size index chunks; workers fill a
preallocated table that is reduced in index order, so results are
bit-identical at any worker count.
"""

from __future__ import annotations

import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds as _Bounds
from scipy.optimize import LinearConstraint, milp

from .instances import AssembledRegion, BoundsSet, Hypergraph, assemble_relaxation
from .lp import CompiledRegion, LpError
from .seeding import substream_seed
from .volumes import vol_double_mccormick, vol_hull
from . import instances
from .trilinear import canonical_labeling

__all__ = [
    "WidthRecord",
    "DifferenceRow",
    "ProfileCurve",
    "RegressionResult",
    "WorstCaseRow",
    "direction_widths",
    "omega_table",
    "quasi_mean_width",
    "std_error_of_mean",
    "make_width_records",
    "width_difference_report",
    "default_tau_grid",
    "performance_profile",
    "per_edge_volume",
    "aggregated_idealized_radius",
    "per_edge_volume_table",
    "linear_fit",
    "radii_from_volume_table",
    "regressions_from_radii",
    "radius_width_regressions",
    "worst_case_hypergraph",
    "worst_case_sweep",
]

_CHUNK = 256  # directions per task; fixed so chunking never depends on thread count
_BATCH = 16  # directions stacked per solver call; fixed for reproducibility


@dataclass(frozen=True)
class WidthRecord:
    bound_set_id: int
    relaxation: str
    omega: float
    std_error: float
    widths: np.ndarray | None = None


@dataclass(frozen=True)
class DifferenceRow:
    bound_set_id: int
    d_h3: float  # omega(h) - omega(3), nonpositive up to solver noise
    d_23: float  # omega(2) - omega(3)
    d_13: float  # omega(1) - omega(3)
    sort_key: float  # omega(1) - omega(h)


@dataclass(frozen=True)
class ProfileCurve:
    tau: np.ndarray
    fractions: dict[str, np.ndarray]  # keys "1", "2", "3"


@dataclass(frozen=True)
class RegressionResult:
    slope: float
    intercept: float
    r_squared: float | None  # None when y is constant (undefined rather than 0 or 1)


@dataclass(frozen=True)
class WorstCaseRow:
    b3: int
    a3: int
    omega_1: float
    omega_2: float
    omega_3: float
    d_23: float  # omega(2) - omega(3)
    d_21: float  # omega(2) - omega(1)


class _ReducedWidthSolver:
    """Width solves for a double-McCormick region with f eliminated.

    Each f variable appears only in the 8 system rows of its own edge
    (4 bounding it below, 4 above) and in its own box bounds, and every
    x-slice of the region is a nonempty f-interval (the graph point is
    always feasible).  Maximizing sum(q_e * f_e) therefore equals an
    epigraph program over x and one t variable per edge, with t_e capped
    by q_e times the active side's affine bounds: 5 rows per edge instead
    of 14.  Produces the same optima as solving the assembled program.
    """

    def __init__(self, region: AssembledRegion):
        program = region.program
        index = {v: i for i, v in enumerate(program.variables)}
        self.n_x = len(region.x_names)
        self.n_e = len(region.f_names)
        if program.variables[: self.n_x] != region.x_names:
            raise ValueError("x variables must come first in the assembled program")
        f_index = {name: e for e, name in enumerate(region.f_names)}

        upper: list[list[tuple[np.ndarray, float]]] = [[] for _ in range(self.n_e)]
        lower: list[list[tuple[np.ndarray, float]]] = [[] for _ in range(self.n_e)]
        xcols: list[set[int]] = [set() for _ in range(self.n_e)]
        for con in program.constraints:
            touched = [v for v in con.coefficients if v in f_index]
            if not touched:
                continue  # pure box row, implied by the variable bounds
            if len(touched) != 1:
                raise ValueError("row couples several f variables; cannot reduce")
            e = f_index[touched[0]]
            f_coef = con.coefficients[touched[0]]
            if f_coef not in (1.0, -1.0):
                raise ValueError("f coefficient must be +/-1 for the reduction")
            xcols[e].update(index[v] for v in con.coefficients if v not in f_index)
            (lower if f_coef == 1.0 else upper)[e].append((con, f_coef))

        self.x_lower = np.array([program.bounds[i][0] for i in range(self.n_x)])
        self.x_upper = np.array([program.bounds[i][1] for i in range(self.n_x)])
        self.edges = []
        for e in range(self.n_e):
            cols = np.array(sorted(xcols[e]), dtype=int)
            col_pos = {c: k for k, c in enumerate(cols)}
            f_lo, f_hi = program.bounds[self.n_x + e]

            def affine(rows, sign):
                # sign +1: row is  f + c.x >= rhs  ->  f >= rhs - c.x
                # sign -1: row is -f + c.x >= rhs  ->  f <= c.x - rhs
                out = np.zeros((len(rows) + 1, len(cols) + 1))
                for r, (con, _) in enumerate(rows):
                    for v, c in con.coefficients.items():
                        if v in f_index:
                            continue
                        out[r, col_pos[index[v]]] = -c if sign > 0 else c
                    out[r, -1] = con.rhs if sign > 0 else -con.rhs
                out[-1, -1] = f_lo if sign > 0 else f_hi  # the f box bound itself
                return out

            if len(lower[e]) != 4 or len(upper[e]) != 4:
                raise ValueError("expected 4 lower and 4 upper rows per f variable")
            self.edges.append((cols, affine(upper[e], -1), affine(lower[e], +1)))

    def _max_block(self, q: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray, np.ndarray]:
        """Rows, rhs and variable bounds of the epigraph program for one sign."""
        n_vars = self.n_x + self.n_e
        A = np.zeros((5 * self.n_e, n_vars))
        b = np.empty(5 * self.n_e)
        lb = np.concatenate([self.x_lower, np.full(self.n_e, -np.inf)])
        ub = np.concatenate([self.x_upper, np.full(self.n_e, np.inf)])
        r = 0
        for e in range(self.n_e):
            if q[e] == 0.0:
                lb[self.n_x + e] = ub[self.n_x + e] = 0.0  # t_e contributes nothing
                continue
            cols, up, low = self.edges[e]
            blk = up if q[e] > 0 else low
            A[r : r + 5, cols] = -q[e] * blk[:, :-1]
            A[r : r + 5, self.n_x + e] = 1.0
            b[r : r + 5] = q[e] * blk[:, -1]
            r += 5
        return A[:r], b[:r], lb, ub

    def widths(self, directions: np.ndarray) -> np.ndarray:
        """Widths for a batch of directions.

        The max and min programs of several directions are independent, so
        they are stacked block-diagonally into one solver call (amortizing
        the per-call overhead); block separability makes the joint optimum
        the sum of the per-block optima, and each block's value is read
        back off the solution point.
        """
        n_vars = self.n_x + self.n_e
        out = np.empty(len(directions))
        for start in range(0, len(directions), _BATCH):
            batch = directions[start : start + _BATCH]
            blocks, rhs, lbs, ubs = [], [], [], []
            for q in batch:
                for signed in (q, -q):
                    A, b, lb, ub = self._max_block(signed)
                    blocks.append(sp.csc_matrix(A))
                    rhs.append(b)
                    lbs.append(lb)
                    ubs.append(ub)
            c = np.tile(
                np.concatenate([np.zeros(self.n_x), -np.ones(self.n_e)]), len(blocks)
            )
            res = milp(
                c,
                constraints=LinearConstraint(
                    sp.block_diag(blocks, format="csc"), -np.inf, np.concatenate(rhs)
                ),
                bounds=_Bounds(np.concatenate(lbs), np.concatenate(ubs)),
            )
            if res.status != 0:
                raise LpError(f"reduced width solve failed with status {res.status}")
            x = res.x
            for i in range(len(batch)):
                t_max = x[(2 * i) * n_vars + self.n_x : (2 * i + 1) * n_vars]
                t_min = x[(2 * i + 1) * n_vars + self.n_x : (2 * i + 2) * n_vars]
                span = float(t_max.sum() + t_min.sum())
                out[start + i] = span if span > 0.0 else 0.0
        return out

    def width(self, q: np.ndarray) -> float:
        return float(self.widths(np.asarray(q, dtype=float)[None, :])[0])


class _HullWidthSolver:
    def __init__(self, region: AssembledRegion):
        self.compiled = CompiledRegion(region.program)
        index = {v: i for i, v in enumerate(region.program.variables)}
        self.f_cols = np.array([index[name] for name in region.f_names])
        self.n_vars = len(region.program.variables)

    def width(self, q: np.ndarray) -> float:
        c = np.zeros(self.n_vars)
        c[self.f_cols] = q
        return self.compiled.width(c)

    def widths(self, directions: np.ndarray) -> np.ndarray:
        return np.array([self.width(q) for q in directions])


def _make_width_solver(region: AssembledRegion):
    if region.relaxation == "h":
        return _HullWidthSolver(region)
    return _ReducedWidthSolver(region)


def _widths_chunk(region: AssembledRegion, chunk: np.ndarray) -> np.ndarray:
    return _make_width_solver(region).widths(chunk)


def direction_widths(
    region: AssembledRegion, directions: np.ndarray, threads: int = 1
) -> np.ndarray:
    """Per-direction widths (max minus min over the region), in direction order."""
    directions = np.asarray(directions, dtype=float)
    if directions.ndim != 2 or directions.shape[0] == 0:
        raise ValueError("need a nonempty (count, m) array of directions")
    if directions.shape[1] != len(region.f_names):
        raise ValueError(
            f"directions have {directions.shape[1]} entries, region has "
            f"{len(region.f_names)} f variables"
        )
    starts = list(range(0, len(directions), _CHUNK))
    if threads <= 1 or len(starts) == 1:
        parts = [_widths_chunk(region, directions[s : s + _CHUNK]) for s in starts]
        return np.concatenate(parts)
    out = np.empty(len(directions))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        futures = {
            pool.submit(_widths_chunk, region, directions[s : s + _CHUNK]): s
            for s in starts
        }
        for future, s in futures.items():
            part = future.result()
            out[s : s + len(part)] = part
    return out


def quasi_mean_width(
    region: AssembledRegion, directions: np.ndarray, threads: int = 1
) -> float:
    """Mean width over the sampled directions, reduced in index order."""
    return float(np.mean(direction_widths(region, directions, threads)))


def std_error_of_mean(widths: np.ndarray) -> float:
    if len(widths) < 2:
        return 0.0
    return float(np.std(widths, ddof=1) / math.sqrt(len(widths)))


def make_width_records(
    h: Hypergraph,
    bound_sets: Sequence[BoundsSet],
    directions: np.ndarray,
    threads: int = 1,
    retain_widths: bool = False,
) -> list[WidthRecord]:
    """Quasi mean widths of all four relaxations for every bound set."""
    records = []
    for set_id, bounds in enumerate(bound_sets):
        for relaxation in instances.RELAXATIONS:
            region = assemble_relaxation(h, bounds, relaxation)
            widths = direction_widths(region, directions, threads)
            records.append(
                WidthRecord(
                    bound_set_id=set_id,
                    relaxation=relaxation,
                    omega=float(np.mean(widths)),
                    std_error=std_error_of_mean(widths),
                    widths=widths if retain_widths else None,
                )
            )
    return records


def omega_table(records: Iterable[WidthRecord]) -> dict[int, dict[str, float]]:
    table: dict[int, dict[str, float]] = {}
    for rec in records:
        table.setdefault(rec.bound_set_id, {})[rec.relaxation] = rec.omega
    for set_id, per in sorted(table.items()):
        missing = set(instances.RELAXATIONS) - set(per)
        if missing:
            raise ValueError(f"bound set {set_id} is missing relaxations {sorted(missing)}")
    return table


def width_difference_report(records: Iterable[WidthRecord]) -> list[DifferenceRow]:
    """Per-bound-set width differences, sorted ascending by omega(1) - omega(h)."""
    table = omega_table(records)
    rows = [
        DifferenceRow(
            bound_set_id=set_id,
            d_h3=per["h"] - per["3"],
            d_23=per["2"] - per["3"],
            d_13=per["1"] - per["3"],
            sort_key=per["1"] - per["h"],
        )
        for set_id, per in sorted(table.items())
    ]
    return sorted(rows, key=lambda row: row.sort_key)  # stable: ties stay in id order


def default_tau_grid(points: int = 200) -> np.ndarray:
    return np.linspace(0.0, math.log(2.0), points)


def performance_profile(
    records: Iterable[WidthRecord], tau_grid: np.ndarray | None = None
) -> ProfileCurve:
    """Fraction of bound sets with log(omega_l / omega_h) at most tau."""
    table = omega_table(records)
    tau = default_tau_grid() if tau_grid is None else np.asarray(tau_grid, dtype=float)
    fractions = {}
    for relaxation in ("1", "2", "3"):
        ratios = []
        for set_id, per in sorted(table.items()):
            if per["h"] <= 0.0:
                raise ValueError(f"bound set {set_id} has nonpositive hull width")
            ratios.append(math.log(per[relaxation] / per["h"]))
        ratios_arr = np.array(ratios)
        fractions[relaxation] = np.array([(ratios_arr <= t).mean() for t in tau])
    return ProfileCurve(tau, fractions)


def per_edge_volume(bounds: BoundsSet, edge: tuple[int, int, int], relaxation: str) -> float:
    """Closed-form volume of one edge's relaxation, canonically relabeled."""
    labeled = canonical_labeling(bounds.edge_bounds(edge)).labeled
    if relaxation == "h":
        return vol_hull(labeled)
    return vol_double_mccormick(labeled, int(relaxation))


def aggregated_idealized_radius(
    h: Hypergraph, bounds: BoundsSet, relaxation: int | str
) -> float:
    """Sum over edges of the fourth root of the per-edge relaxation volume.

    Plain fourth roots, no ball constant: the aggregate is used only as a
    linear predictor, where a constant factor is absorbed by the slope.
    """
    label = str(relaxation)
    return sum(per_edge_volume(bounds, edge, label) ** 0.25 for edge in h.edges)


def per_edge_volume_table(
    h: Hypergraph, bound_sets: Sequence[BoundsSet]
) -> list[tuple[int, int, float, float, float, float]]:
    """Rows (bound_set_id, edge_id, vol_h, vol_1, vol_2, vol_3)."""
    rows = []
    for set_id, bounds in enumerate(bound_sets):
        for edge_id, edge in enumerate(h.edges):
            rows.append(
                (
                    set_id,
                    edge_id,
                    per_edge_volume(bounds, edge, "h"),
                    per_edge_volume(bounds, edge, "1"),
                    per_edge_volume(bounds, edge, "2"),
                    per_edge_volume(bounds, edge, "3"),
                )
            )
    return rows


def linear_fit(x: Sequence[float], y: Sequence[float]) -> RegressionResult:
    """Ordinary least squares line with R^2 = 1 - SSres/SStot.

    Constant y makes R^2 meaningless (SStot = 0); it is reported as None
    rather than silently coerced to 0 or 1.
    """
    xs = np.asarray(x, dtype=float)
    ys = np.asarray(y, dtype=float)
    if xs.shape != ys.shape or xs.ndim != 1 or len(xs) < 2:
        raise ValueError("need two equally long 1-d samples with at least 2 points")
    sxx = float(np.sum((xs - xs.mean()) ** 2))
    if sxx == 0.0:
        raise ValueError("x values are all equal; no line is determined")
    slope = float(np.sum((xs - xs.mean()) * (ys - ys.mean())) / sxx)
    intercept = float(ys.mean() - slope * xs.mean())
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    if ss_tot == 0.0:
        return RegressionResult(slope, intercept, None)
    ss_res = float(np.sum((ys - (slope * xs + intercept)) ** 2))
    r2 = 1.0 - ss_res / ss_tot
    return RegressionResult(slope, intercept, min(1.0, max(0.0, r2)))


def radii_from_volume_table(
    rows: Iterable[tuple[int, int, float, float, float, float]],
) -> dict[str, np.ndarray]:
    """Aggregated idealized radii per bound set from a per-edge volume table.

    The aggregate is the sum over edges of the fourth root of the
    per-edge volume; rows are (bound_set_id, edge_id, vol_h..vol_3).
    """
    sums: dict[int, dict[str, float]] = {}
    for set_id, _, vol_h, vol_1, vol_2, vol_3 in rows:
        per = sums.setdefault(set_id, {rel: 0.0 for rel in instances.RELAXATIONS})
        for rel, vol in zip(instances.RELAXATIONS, (vol_h, vol_1, vol_2, vol_3)):
            per[rel] += vol**0.25
    set_ids = sorted(sums)
    return {
        rel: np.array([sums[i][rel] for i in set_ids]) for rel in instances.RELAXATIONS
    }


def regressions_from_radii(
    radii: dict[str, np.ndarray], omegas: dict[str, np.ndarray]
) -> list[tuple[str, RegressionResult]]:
    """The seven width-vs-volume fits, one point per bound set.

    ``radius_<l>``: quasi mean width of relaxation l against its
    aggregated idealized radius.  ``pair_<l>h``: width difference of the
    pair (l, hull) against the aggregated radial distance of the pair;
    the mean width difference over directions equals the difference of
    the mean widths, so no per-direction data is needed.
    """
    out: list[tuple[str, RegressionResult]] = []
    for rel in instances.RELAXATIONS:
        out.append((f"radius_{rel}", linear_fit(radii[rel], omegas[rel])))
    for rel in ("3", "2", "1"):
        out.append(
            (
                f"pair_{rel}h",
                linear_fit(radii[rel] - radii["h"], omegas[rel] - omegas["h"]),
            )
        )
    return out


def radius_width_regressions(
    h: Hypergraph,
    bound_sets: Sequence[BoundsSet],
    records: Iterable[WidthRecord],
) -> list[tuple[str, RegressionResult]]:
    """The seven fits computed straight from bounds (volumes re-evaluated)."""
    table = omega_table(records)
    set_ids = sorted(table)
    radii = {
        rel: np.array([aggregated_idealized_radius(h, bound_sets[i], rel) for i in set_ids])
        for rel in instances.RELAXATIONS
    }
    omegas = {rel: np.array([table[i][rel] for i in set_ids]) for rel in instances.RELAXATIONS}
    return regressions_from_radii(radii, omegas)


def worst_case_hypergraph() -> Hypergraph:
    """6 vertices; the 10 edges pairing vertex 6 with each pair of 1..5."""
    edges = tuple((j, k, 6) for j in range(1, 6) for k in range(j + 1, 6))
    return Hypergraph(6, edges)


def worst_case_sweep(
    b3: int, directions_count: int, seed: int, threads: int = 1
) -> list[WorstCaseRow]:
    """Stretch vertex 6 over [a3, b3] for a3 = 1..b3-1 and compare widths.

    Vertices 1..5 are fixed to [0, 1]; with those bounds the grouping that
    convexifies a unit pair first coincides with the hull on every edge,
    so only the three double-McCormick relaxations are swept.  One
    direction sample is drawn per b3 and shared across the whole sweep.
    """
    if b3 < 2:
        raise ValueError("b3 must be at least 2")
    h = worst_case_hypergraph()
    directions = instances.gen_directions(
        len(h.edges),
        directions_count,
        substream_seed(seed, f"worst-case/{b3}/directions"),
    )
    rows = []
    for a3 in range(1, b3):
        bounds = BoundsSet(((0, 1),) * 5 + ((a3, b3),))
        omega = {}
        for relaxation in ("1", "2", "3"):
            region = assemble_relaxation(h, bounds, relaxation)
            omega[relaxation] = quasi_mean_width(region, directions, threads)
        rows.append(
            WorstCaseRow(
                b3=b3,
                a3=a3,
                omega_1=omega["1"],
                omega_2=omega["2"],
                omega_3=omega["3"],
                d_23=omega["2"] - omega["3"],
                d_21=omega["2"] - omega["1"],
            )
        )
    return rows
