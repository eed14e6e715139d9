"""Two-phase primal simplex in exact rational arithmetic.

Small and dense on purpose: the configuration programs solved here have at
most a few dozen rows, and the oracles need exact rationals (values like 9/17
must be recognized exactly). Pricing is Dantzig's rule with a switch to
Bland's rule after a fixed number of pivots, which guarantees termination.
Callers that know an identity sub-basis (the singleton configurations of a
packing program) can pass it to skip phase 1.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

ZERO = Fraction(0)
ONE = Fraction(1)


class Infeasible(Exception):
    pass


class Unbounded(Exception):
    pass


@dataclass
class LpResult:
    x: list[Fraction]
    objective: Fraction
    basis: list[int]

    @property
    def support(self) -> int:
        return sum(1 for v in self.x if v != 0)


def _pivot(tableau: list[list[Fraction]], basis: list[int], row: int, col: int) -> None:
    piv = tableau[row][col]
    inv = ONE / piv
    tableau[row] = [v * inv for v in tableau[row]]
    prow = tableau[row]
    for r, trow in enumerate(tableau):
        if r == row:
            continue
        f = trow[col]
        if f != 0:
            tableau[r] = [a - f * b for a, b in zip(trow, prow)]
    basis[row] = col


def _simplex_min(
    tableau: list[list[Fraction]],
    basis: list[int],
    cost: list[Fraction],
    allowed: int,
) -> Fraction:
    """Minimize cost over the current tableau; returns the objective value."""
    m = len(tableau)
    z = list(cost)  # reduced costs: cost - cost_B * tableau
    for r in range(m):
        cb = cost[basis[r]]
        if cb != 0:
            row = tableau[r]
            for j in range(len(z)):
                z[j] -= cb * row[j]
    bland_after = 200 + 20 * m
    pivots = 0
    while True:
        col = -1
        if pivots < bland_after:
            best_z = ZERO
            for j in range(allowed):
                if z[j] < best_z:
                    best_z = z[j]
                    col = j
        else:  # Bland: lowest index, guarantees no cycling
            for j in range(allowed):
                if z[j] < 0:
                    col = j
                    break
        if col < 0:
            return sum(cost[basis[r]] * tableau[r][-1] for r in range(m))
        row = -1
        best: Fraction | None = None
        for r in range(m):
            a = tableau[r][col]
            if a > 0:
                ratio = tableau[r][-1] / a
                if best is None or ratio < best or (ratio == best and basis[r] < basis[row]):
                    best = ratio
                    row = r
        if row < 0:
            raise Unbounded()
        _pivot(tableau, basis, row, col)
        pivots += 1
        f = z[col]
        if f != 0:
            prow = tableau[row]
            for j in range(len(z)):
                z[j] -= f * prow[j]


def solve_lp(
    a_rows: Sequence[Sequence[Fraction | int]],
    b: Sequence[Fraction | int],
    c: Sequence[Fraction | int],
    upper: dict[int, Fraction] | None = None,
    lower: dict[int, Fraction] | None = None,
    basis_hint: Sequence[int] | None = None,
) -> LpResult:
    """Solve min c.x  s.t.  A x = b,  x >= 0 (plus optional per-variable bounds).

    Lower bounds are shifted into the right-hand side; finite upper bounds add
    a slack row each. ``basis_hint`` names one column per row that together
    form an identity submatrix with a non-negative right-hand side; it is
    ignored whenever bounds are present or the hint does not apply.
    Raises Infeasible / Unbounded.
    """
    m = len(a_rows)
    n = len(c)
    lower = lower or {}
    upper = upper or {}
    lo = [Fraction(lower.get(j, 0)) for j in range(n)]
    rows = [[Fraction(v) for v in row] for row in a_rows]
    rhs = [Fraction(v) for v in b]
    for i in range(m):
        shift = sum(rows[i][j] * lo[j] for j in range(n) if lo[j] != 0)
        rhs[i] -= shift
    n_slack = len(upper)
    for idx, (j, u) in enumerate(sorted(upper.items())):
        span = Fraction(u) - lo[j]
        if span < 0:
            raise Infeasible()
        row = [ZERO] * (n + n_slack)
        row[j] = ONE
        row[n + idx] = ONE
        rows.append(row)
        rhs.append(span)
    total_rows = len(rows)
    width = n + n_slack

    tableau: list[list[Fraction]] | None = None
    basis: list[int] | None = None
    if basis_hint is not None and not lower and not upper and len(basis_hint) == total_rows:
        ok = all(v >= 0 for v in rhs)
        if ok:
            for r, j in enumerate(basis_hint):
                col = [rows[i][j] for i in range(total_rows)]
                if col[r] != 1 or any(col[i] != 0 for i in range(total_rows) if i != r):
                    ok = False
                    break
        if ok:
            tableau = [
                list(rows[i]) + [ZERO] * (width - len(rows[i])) + [rhs[i]]
                for i in range(total_rows)
            ]
            basis = list(basis_hint)

    if tableau is None:
        # phase 1 with artificial variables
        art0 = width
        tableau = []
        basis = []
        for i in range(total_rows):
            row = list(rows[i]) + [ZERO] * (width - len(rows[i]))
            r = rhs[i]
            if r < 0:
                row = [-v for v in row]
                r = -r
            row += [ONE if t == i else ZERO for t in range(total_rows)]
            row.append(r)
            tableau.append(row)
            basis.append(art0 + i)
        phase1_cost = [ZERO] * width + [ONE] * total_rows + [ZERO]
        if _simplex_min(tableau, basis, phase1_cost, width + total_rows) != 0:
            raise Infeasible()
        # drive artificials out of the basis; drop redundant rows
        keep: list[int] = []
        for r in range(total_rows):
            if basis[r] >= art0:
                col = next((j for j in range(width) if tableau[r][j] != 0), -1)
                if col < 0:
                    continue  # redundant row
                _pivot(tableau, basis, r, col)
            keep.append(r)
        tableau = [tableau[r][:width] + [tableau[r][-1]] for r in keep]
        basis = [basis[r] for r in keep]

    phase2_cost = [Fraction(v) for v in c] + [ZERO] * n_slack + [ZERO]
    obj = _simplex_min(tableau, basis, phase2_cost, width)

    x = [ZERO] * width
    for r, var in enumerate(basis):
        x[var] = tableau[r][-1]
    sol = [x[j] + lo[j] for j in range(n)]
    const = sum(Fraction(c[j]) * lo[j] for j in range(n) if lo[j] != 0)
    return LpResult(sol, obj + const, basis[:])
