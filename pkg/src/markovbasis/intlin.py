"""Exact integer linear algebra.

Matrices are lists of rows of Python ints, so elimination never overflows.
Inputs may be any nested sequence of integers (numpy integer arrays included);
outputs are fresh lists that callers are free to mutate.
"""

from __future__ import annotations

from typing import Sequence

from .errors import DimensionError

IntMatrix = list[list[int]]
IntVector = list[int]


def as_int_matrix(A) -> IntMatrix:
    """Copy ``A`` into a rectangular list-of-lists of Python ints."""
    rows = [[_as_int(x) for x in row] for row in A]
    if not rows or not rows[0]:
        raise DimensionError("matrix must have at least one row and one column")
    width = len(rows[0])
    for i, row in enumerate(rows):
        if len(row) != width:
            raise DimensionError(f"row {i} has {len(row)} entries, expected {width}")
    return rows


def _as_int(x) -> int:
    y = int(x)
    if y != x:
        raise DimensionError(f"non-integer entry {x!r}")
    return y


def identity(n: int) -> IntMatrix:
    return [[int(i == j) for j in range(n)] for i in range(n)]


def transpose(A: Sequence[Sequence[int]]) -> IntMatrix:
    return [list(col) for col in zip(*A)]


def matmul(A: Sequence[Sequence[int]], B: Sequence[Sequence[int]]) -> IntMatrix:
    Bt = transpose(B)
    return [[sum(a * b for a, b in zip(row, col)) for col in Bt] for row in A]


def matvec(A: Sequence[Sequence[int]], v: Sequence[int]) -> IntVector:
    return [sum(a * x for a, x in zip(row, v)) for row in A]


def _xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with x*a + y*b = g = gcd(a, b) >= 0."""
    x0, y0, x1, y1 = 1, 0, 0, 1
    while b:
        q, r = divmod(a, b)
        a, b = b, r
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        return -a, -x0, -y0
    return a, x0, y0


def _combine(M: IntMatrix, p: int, i: int, x: int, y: int, s: int, t: int) -> None:
    # (row_p, row_i) <- (x*row_p + y*row_i, s*row_p + t*row_i)
    rp, ri = M[p], M[i]
    M[p] = [x * a + y * b for a, b in zip(rp, ri)]
    M[i] = [s * a + t * b for a, b in zip(rp, ri)]


def hermite_normal_form(A) -> tuple[IntMatrix, IntMatrix]:
    """Row-style Hermite normal form.

    Returns ``(H, U)`` with ``U`` unimodular and ``H = U @ A``. Pivots of
    ``H`` are positive, entries above each pivot lie in ``[0, pivot)`` and
    zero rows sit at the bottom.
    """
    H = as_int_matrix(A)
    m, n = len(H), len(H[0])
    U = identity(m)
    p = 0
    for col in range(n):
        if p == m:
            break
        for i in range(p + 1, m):
            b = H[i][col]
            if b == 0:
                continue
            a = H[p][col]
            g, x, y = _xgcd(a, b)
            # 2x2 block [[x, y], [-b/g, a/g]] has determinant 1
            _combine(H, p, i, x, y, -b // g, a // g)
            _combine(U, p, i, x, y, -b // g, a // g)
        piv = H[p][col]
        if piv == 0:
            continue
        if piv < 0:
            H[p] = [-v for v in H[p]]
            U[p] = [-v for v in U[p]]
            piv = -piv
        for i in range(p):
            q = H[i][col] // piv
            if q:
                H[i] = [a - q * b for a, b in zip(H[i], H[p])]
                U[i] = [a - q * b for a, b in zip(U[i], U[p])]
        p += 1
    return H, U


def rank(A) -> int:
    """Rank over the rationals, read off the Hermite normal form."""
    H, _ = hermite_normal_form(A)
    return sum(1 for row in H if any(row))


def determinant(A) -> int:
    """Exact determinant by fraction-free Bareiss elimination."""
    M = as_int_matrix(A)
    n = len(M)
    if any(len(row) != n for row in M):
        raise DimensionError("determinant needs a square matrix")
    sign, prev = 1, 1
    for k in range(n - 1):
        if M[k][k] == 0:
            for i in range(k + 1, n):
                if M[i][k]:
                    M[k], M[i] = M[i], M[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                M[i][j] = (M[i][j] * M[k][k] - M[i][k] * M[k][j]) // prev
        prev = M[k][k]
    return sign * M[n - 1][n - 1]


def normalize_sign(v: Sequence[int]) -> tuple[int, ...]:
    """Flip ``v`` so its first nonzero entry is positive."""
    for x in v:
        if x:
            return tuple(v) if x > 0 else tuple(-y for y in v)
    return tuple(v)


def lattice_kernel_basis(A) -> list[IntVector]:
    """A lattice basis of the integer kernel of ``A``.

    Computed from the unimodular transform of the HNF of ``A``ᵀ: the rows of
    ``U`` sitting against zero rows of ``H`` span ``ker_Z(A)``. The result is
    echelon-reduced again so entries stay small, then sign-normalized.
    """
    A = as_int_matrix(A)
    H, U = hermite_normal_form(transpose(A))
    kernel = [U[i] for i, row in enumerate(H) if not any(row)]
    if not kernel:
        return []
    K, _ = hermite_normal_form(kernel)
    return [list(normalize_sign(row)) for row in K if any(row)]


def in_kernel(A, b: Sequence[int]) -> bool:
    """True iff ``A @ b == 0`` exactly."""
    A = as_int_matrix(A)
    if len(b) != len(A[0]):
        raise DimensionError(f"vector of length {len(b)} against {len(A[0])} columns")
    return not any(matvec(A, [_as_int(x) for x in b]))


def in_row_span(A, v: Sequence[int]) -> bool:
    """Whether ``v`` lies in the rational row span of ``A``."""
    A = as_int_matrix(A)
    if len(v) != len(A[0]):
        raise DimensionError("vector length does not match column count")
    return rank(A) == rank(A + [list(v)])
