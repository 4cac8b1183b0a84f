"""Exact rational phase-1 simplex for LP feasibility.

Revised simplex over Fractions with an explicit basis inverse, Bland's rule
(ascending variable order) for anti-cycling, and an optional crash sequence of
columns to pivot in first. Equality constraints Ax = b with x >= 0 only; that
is all the fractional-matching models need.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

ZERO = Fraction(0)
ONE = Fraction(1)


@dataclass
class FeasibilityResult:
    feasible: bool
    solution: dict = field(default_factory=dict)   # column index -> value
    certificate: list = None                       # Farkas row multipliers when infeasible
    pivots: int = 0


def solve_equality_feasibility(columns, b, crash_order=None) -> FeasibilityResult:
    """Find x >= 0 with Ax = b, columns given sparsely as [(row, coef), ...].

    Runs phase-1 with one artificial per row. The crash order is a hint only:
    those columns are offered to the ratio test first, which makes models with
    an obvious combinatorial solution (an integer matching) resolve in one
    cheap pass; correctness never depends on it.
    """
    m = len(b)
    ncols = len(columns)
    sign = [ONE] * m
    rhs = []
    for i, bi in enumerate(b):
        bi = Fraction(bi)
        if bi < 0:
            sign[i] = -ONE
            bi = -bi
        rhs.append(bi)
    cols = []
    for col in columns:
        cols.append(tuple((i, Fraction(a) * sign[i]) for i, a in col if a != 0))

    # basis[i] is the variable basic in row i; artificials are ncols..ncols+m-1
    basis = [ncols + i for i in range(m)]
    binv = [[ONE if t == i else ZERO for t in range(m)] for i in range(m)]
    xb = list(rhs)
    artificial = [True] * m  # whether basis[i] is artificial
    pivots = 0

    def col_of(var):
        if var >= ncols:
            return ((var - ncols, ONE),)
        return cols[var]

    def pivot(enter_var, enter_col):
        nonlocal pivots
        # d = B^-1 A_enter
        d = [ZERO] * m
        for i, a in enter_col:
            if a == 0:
                continue
            for t in range(m):
                if binv[t][i] != 0:
                    d[t] += binv[t][i] * a
        leave = None
        best = None
        for t in range(m):
            if d[t] > 0:
                ratio = xb[t] / d[t]
                if best is None or ratio < best or (ratio == best and basis[t] < basis[leave]):
                    best = ratio
                    leave = t
        if leave is None:
            return False
        piv = d[leave]
        binv[leave] = [a / piv for a in binv[leave]]
        xb[leave] /= piv
        for t in range(m):
            if t != leave and d[t] != 0:
                f = d[t]
                binv[t] = [a - f * p for a, p in zip(binv[t], binv[leave])]
                xb[t] -= f * xb[leave]
        basis[leave] = enter_var
        artificial[leave] = enter_var >= ncols
        pivots += 1
        return True

    def multipliers():
        # y = c_B B^-1 with phase-1 costs (1 on artificial basics)
        y = [ZERO] * m
        for t in range(m):
            if artificial[t]:
                row = binv[t]
                for i in range(m):
                    if row[i] != 0:
                        y[i] += row[i]
        return y

    if crash_order:
        for j in crash_order:
            if any(artificial[t] and xb[t] > 0 for t in range(m)):
                y = multipliers()
                red = -sum(y[i] * a for i, a in cols[j])
                if red < 0:
                    pivot(j, cols[j])
            else:
                break

    while True:
        if all((not artificial[t]) or xb[t] == 0 for t in range(m)):
            break  # objective already zero
        y = multipliers()
        enter = None
        for j in range(ncols):
            red = -sum(y[i] * a for i, a in cols[j])
            if red < 0:
                enter = j
                break
        if enter is None:
            # no improving real column; artificial columns cannot improve
            # (their reduced cost is 1 - y_i >= 0 at phase-1 optimum over them)
            improving_artificial = None
            for i in range(m):
                if ONE - y[i] < 0:
                    improving_artificial = i
                    break
            if improving_artificial is None:
                obj = sum(xb[t] for t in range(m) if artificial[t])
                return FeasibilityResult(
                    feasible=False, certificate=y, pivots=pivots
                ) if obj > 0 else _extract(basis, xb, ncols, pivots)
            enter = ncols + improving_artificial
        if not pivot(enter, col_of(enter)):
            # entering column nonpositive in all rows: phase-1 unbounded below
            # is impossible; treat as numerical-logic error
            raise ArithmeticError("phase-1 ratio test failed on an improving column")

    return _extract(basis, xb, ncols, pivots)


def _extract(basis, xb, ncols, pivots) -> FeasibilityResult:
    sol = {}
    for var, val in zip(basis, xb):
        if var < ncols and val != 0:
            sol[var] = val
    return FeasibilityResult(feasible=True, solution=sol, pivots=pivots)
