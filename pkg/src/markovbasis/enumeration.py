"""Exact enumeration of fibers ``{v >= 0 : A v = A u}`` by backtracking."""

from __future__ import annotations

from typing import Sequence

from .errors import DimensionError, ModelInvalidError, EnumerationCapError
from .intlin import as_int_matrix, in_row_span, matvec


def _cell_bounds(A: list[list[int]], b: list[int]) -> list[int]:
    """Static upper bound for every cell of a fiber with statistics ``b``."""
    r = len(A[0])
    bounds: list[int | None] = [None] * r
    for row, t in zip(A, b):
        if all(a >= 0 for a in row):
            for c, a in enumerate(row):
                if a > 0:
                    ub = t // a
                    bounds[c] = ub if bounds[c] is None else min(bounds[c], ub)
    if any(x is None for x in bounds):
        # all-ones in the row span fixes the table total; the total bounds every cell
        if not in_row_span(A, [1] * r):
            raise ModelInvalidError("fiber is not provably finite: cannot bound every cell")
        total = _table_total(A, b)
        bounds = [total if x is None else x for x in bounds]
    return [max(x, -1) for x in bounds]


def _table_total(A, b) -> int:
    from fractions import Fraction

    # solve y A = 1 over the rationals; then total = y . b
    m, r = len(A), len(A[0])
    M = [[Fraction(A[i][c]) for i in range(m)] + [Fraction(1)] for c in range(r)]
    piv_cols, row = [], 0
    for col in range(m):
        sel = next((k for k in range(row, r) if M[k][col] != 0), None)
        if sel is None:
            continue
        M[row], M[sel] = M[sel], M[row]
        pv = M[row][col]
        M[row] = [x / pv for x in M[row]]
        for k in range(r):
            if k != row and M[k][col] != 0:
                f = M[k][col]
                M[k] = [x - f * y for x, y in zip(M[k], M[row])]
        piv_cols.append(col)
        row += 1
    y = [Fraction(0)] * m
    for k, col in enumerate(piv_cols):
        y[col] = M[k][m]
    total = sum(yi * bi for yi, bi in zip(y, b))
    if total.denominator != 1:
        raise DimensionError("statistics are inconsistent with an integer table total")
    return int(total)


def enumerate_fiber_cells(A, u: Sequence[int], cap: int = 100_000) -> list[tuple[int, ...]]:
    """All nonnegative integer ``v`` with ``A v = A u``, sorted lexicographically.

    Cells are assigned in index order. At every depth the value range of the
    current cell is narrowed by interval propagation: for each row touching
    the cell, what remains of the row's target must be attainable by the
    still-unassigned cells within their bounds. A row's last cell is forced.
    """
    if cap < 1:
        raise DimensionError("cap must be at least 1")
    A = as_int_matrix(A)
    m, r = len(A), len(A[0])
    if len(u) != r:
        raise DimensionError(f"table of length {len(u)} against {r} design columns")
    b = matvec(A, u)
    ub = _cell_bounds(A, b)
    if any(x < 0 for x in ub):
        return []

    # suffix interval of attainable row sums from cells k..r-1
    lo = [[0] * m for _ in range(r + 1)]
    hi = [[0] * m for _ in range(r + 1)]
    for k in range(r - 1, -1, -1):
        for i in range(m):
            contrib = A[i][k] * ub[k]
            lo[k][i] = lo[k + 1][i] + min(0, contrib)
            hi[k][i] = hi[k + 1][i] + max(0, contrib)
    touching = [[(i, A[i][k]) for i in range(m) if A[i][k]] for k in range(r)]

    out: list[tuple[int, ...]] = []
    v = [0] * r
    resid = list(b)

    def rec(k: int) -> None:
        if k == r:
            if not any(resid):
                if len(out) >= cap:
                    raise EnumerationCapError(f"fiber has more than {cap} points", cap=cap)
                out.append(tuple(v))
            return
        xmin, xmax = 0, ub[k]
        lo_rest, hi_rest = lo[k + 1], hi[k + 1]
        for i, a in touching[k]:
            # need lo_rest[i] <= resid[i] - a*x <= hi_rest[i]
            top, bot = resid[i] - lo_rest[i], resid[i] - hi_rest[i]
            if a > 0:
                xmax = min(xmax, top // a)
                xmin = max(xmin, -((-bot) // a))
            else:
                xmax = min(xmax, bot // a)
                xmin = max(xmin, -((-top) // a))
            if xmin > xmax:
                return
        col = touching[k]
        for x in range(xmin, xmax + 1):
            v[k] = x
            for i, a in col:
                resid[i] -= a * x
            rec(k + 1)
            for i, a in col:
                resid[i] += a * x
        v[k] = 0

    if all(lo[0][i] <= b[i] <= hi[0][i] for i in range(m)):
        rec(0)
    return out
