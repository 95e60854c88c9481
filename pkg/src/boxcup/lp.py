"""Linear programming for the small dense problems of this package.

Programs are expressed as ``>=`` inequalities over named variables, with
equations written as adjacent +/- inequality pairs (the single constraint
form used everywhere in this package).  Internally the pairs are merged
back into two-sided rows and handed to HiGHS through scipy, which returns
basic optimal solutions deterministically: identical inputs produce
identical solutions, at any level of outer parallelism.

``solve`` is the general entry point and returns a full ``Solution``
(status, value, point).  ``CompiledRegion`` converts a feasible region to
solver arrays once and answers many objective-only queries cheaply; the
width experiments lean on it.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

import numpy as np
import scipy.sparse as sp
from scipy.optimize import Bounds as _Bounds
from scipy.optimize import LinearConstraint, linprog, milp

from .trilinear import LinearInequality

__all__ = [
    "LinearProgram",
    "Solution",
    "LpError",
    "CompiledRegion",
    "solve",
    "directional_width",
    "FEASIBILITY_TOL",
]

FEASIBILITY_TOL = 1e-7

_STATUS = {0: "optimal", 1: "solver-failure", 2: "infeasible", 3: "unbounded", 4: "solver-failure"}


class LpError(RuntimeError):
    """A solve did not end with the status the caller requires."""


@dataclass(frozen=True)
class LinearProgram:
    """Named variables with bounds, >= constraints, and an optional objective.

    ``bounds`` entries are (lower, upper); ``None`` means unbounded on
    that side.  A missing objective makes the program a plain region.
    """

    variables: tuple[str, ...]
    bounds: tuple[tuple[float | None, float | None], ...]
    constraints: tuple[LinearInequality, ...]
    objective: Mapping[str, float] | None = None

    def __post_init__(self) -> None:
        if len(self.bounds) != len(self.variables):
            raise ValueError("one (lower, upper) bound pair per variable required")
        declared = set(self.variables)
        for con in self.constraints:
            undeclared = set(con.coefficients) - declared
            if undeclared:
                raise ValueError(f"constraint references undeclared variables {undeclared}")
        if self.objective is not None:
            undeclared = set(self.objective) - declared
            if undeclared:
                raise ValueError(f"objective references undeclared variables {undeclared}")


@dataclass(frozen=True)
class Solution:
    status: str  # optimal | infeasible | unbounded | solver-failure
    value: float | None = None
    point: dict[str, float] | None = None


def _is_negated_pair(first: LinearInequality, second: LinearInequality) -> bool:
    if second.rhs != -first.rhs or set(first.coefficients) != set(second.coefficients):
        return False
    return all(second.coefficients[v] == -c for v, c in first.coefficients.items())


class CompiledRegion:
    """A feasible region converted to solver arrays once.

    Adjacent negated inequality pairs are merged into equality rows.  The
    instance is immutable after construction; ``optimum`` may be called
    repeatedly with different objectives.
    """

    def __init__(self, program: LinearProgram):
        self.variables = program.variables
        self._index = {v: i for i, v in enumerate(program.variables)}
        n = len(program.variables)

        rows: list[LinearInequality] = []
        row_lo: list[float] = []
        row_hi: list[float] = []
        cons = program.constraints
        i = 0
        while i < len(cons):
            if i + 1 < len(cons) and _is_negated_pair(cons[i], cons[i + 1]):
                rows.append(cons[i])
                row_lo.append(cons[i].rhs)
                row_hi.append(cons[i].rhs)
                i += 2
            else:
                rows.append(cons[i])
                row_lo.append(cons[i].rhs)
                row_hi.append(np.inf)
                i += 1

        data, ridx, cidx = [], [], []
        for r, con in enumerate(rows):
            for v, c in con.coefficients.items():
                data.append(c)
                ridx.append(r)
                cidx.append(self._index[v])
        self.matrix = sp.csc_matrix(
            (data, (ridx, cidx)), shape=(len(rows), n), dtype=float
        )
        self.row_lower = np.array(row_lo)
        self.row_upper = np.array(row_hi)
        self.var_lower = np.array(
            [-np.inf if lo is None else float(lo) for lo, _ in program.bounds]
        )
        self.var_upper = np.array(
            [np.inf if hi is None else float(hi) for _, hi in program.bounds]
        )
        self._constraint = LinearConstraint(self.matrix, self.row_lower, self.row_upper)
        self._var_bounds = _Bounds(self.var_lower, self.var_upper)

    def objective_vector(self, objective: Mapping[str, float]) -> np.ndarray:
        c = np.zeros(len(self.variables))
        for v, coef in objective.items():
            c[self._index[v]] = coef
        return c

    def optimum(self, objective: Mapping[str, float] | np.ndarray, sense: str) -> float:
        """Optimal objective value; raises LpError on any other outcome."""
        if sense not in ("min", "max"):
            raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
        c = (
            objective
            if isinstance(objective, np.ndarray)
            else self.objective_vector(objective)
        )
        sign = -1.0 if sense == "max" else 1.0
        res = milp(sign * c, constraints=self._constraint, bounds=self._var_bounds)
        status = _STATUS.get(res.status, "solver-failure")
        if status != "optimal":
            raise LpError(f"{sense} solve ended with status {status}")
        return sign * res.fun

    def width(self, direction: Mapping[str, float] | np.ndarray) -> float:
        """max minus min of the direction over the region (nonnegative)."""
        c = (
            direction
            if isinstance(direction, np.ndarray)
            else self.objective_vector(direction)
        )
        span = self.optimum(c, "max") - self.optimum(c, "min")
        return span if span > 0.0 else 0.0


def solve(program: LinearProgram, sense: str = "min") -> Solution:
    """Optimize the program's objective; returns status, value and point.

    Optimal points are basic feasible solutions (dual simplex).  A result
    that HiGHS labels optimal but that violates a constraint by more than
    ``FEASIBILITY_TOL`` is reported as solver-failure rather than trusted.
    """
    if sense not in ("min", "max"):
        raise ValueError(f"sense must be 'min' or 'max', got {sense!r}")
    if program.objective is None:
        raise ValueError("program has no objective; use CompiledRegion for region queries")
    region = CompiledRegion(program)
    c = region.objective_vector(program.objective)
    sign = -1.0 if sense == "max" else 1.0

    eq = np.isfinite(region.row_upper)
    A = region.matrix.toarray()
    A_ub, b_ub = -A[~eq], -region.row_lower[~eq]
    A_eq, b_eq = (A[eq], region.row_lower[eq]) if eq.any() else (None, None)
    res = linprog(
        sign * c,
        A_ub=A_ub if A_ub.size else None,
        b_ub=b_ub if b_ub.size else None,
        A_eq=A_eq,
        b_eq=b_eq,
        bounds=list(zip(region.var_lower, region.var_upper)),
        method="highs-ds",
        options={
            "primal_feasibility_tolerance": 1e-9,
            "dual_feasibility_tolerance": 1e-9,
        },
    )
    status = _STATUS.get(res.status, "solver-failure")
    if status != "optimal":
        return Solution(status)

    x = np.asarray(res.x)
    worst = 0.0
    if len(region.row_lower):
        activities = region.matrix @ x
        worst = max(worst, float(np.max(region.row_lower - activities, initial=0.0)))
        finite_hi = np.isfinite(region.row_upper)
        if finite_hi.any():
            worst = max(
                worst,
                float(np.max((activities - region.row_upper)[finite_hi], initial=0.0)),
            )
    worst = max(worst, float(np.max(region.var_lower - x, initial=0.0)))
    worst = max(worst, float(np.max(x - region.var_upper, initial=0.0)))
    if worst > FEASIBILITY_TOL:
        return Solution("solver-failure")

    point = {v: float(x[i]) for i, v in enumerate(program.variables)}
    return Solution("optimal", sign * float(res.fun), point)


def directional_width(
    region: LinearProgram, direction: Mapping[str, float]
) -> float:
    """max minus min of a direction over a region given as a LinearProgram.

    Raises LpError if the region is empty or unbounded in the direction.
    """
    return CompiledRegion(region).width(direction)
