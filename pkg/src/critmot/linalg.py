"""Tiny exact linear algebra over Fraction: rank, solve, multiply.

Matrices are lists of row lists.  Everything is plain Gaussian
elimination with exact pivoting; fine at desk scale.
"""

from __future__ import annotations

from fractions import Fraction


def mat_mul(a: list[list[Fraction]], b: list[list[Fraction]]) -> list[list[Fraction]]:
    if not a or not b:
        return []
    n, k, m = len(a), len(b), len(b[0])
    out = [[Fraction(0)] * m for _ in range(n)]
    for i in range(n):
        for t in range(k):
            aij = a[i][t]
            if aij:
                row = b[t]
                oi = out[i]
                for j in range(m):
                    oi[j] += aij * row[j]
    return out


def rank(matrix: list[list[Fraction]]) -> int:
    rows = [list(map(Fraction, r)) for r in matrix]
    if not rows:
        return 0
    ncols = len(rows[0])
    r = 0
    for col in range(ncols):
        pivot = None
        for i in range(r, len(rows)):
            if rows[i][col]:
                pivot = i
                break
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        pv = rows[r][col]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[r])]
        r += 1
        if r == len(rows):
            break
    return r


def is_invertible(matrix: list[list[Fraction]]) -> bool:
    n = len(matrix)
    if n == 0:
        return True
    if any(len(row) != n for row in matrix):
        return False
    return rank(matrix) == n


def solve(matrix: list[list[Fraction]], rhs: list[Fraction]):
    """One exact solution of matrix @ x = rhs, or None if inconsistent.

    Free variables are set to zero.
    """
    m = len(matrix)
    if m == 0:
        return [] if not any(rhs) else None
    n = len(matrix[0])
    rows = [list(map(Fraction, matrix[i])) + [Fraction(rhs[i])] for i in range(m)]
    pivots = []
    r = 0
    for col in range(n):
        piv = None
        for i in range(r, m):
            if rows[i][col]:
                piv = i
                break
        if piv is None:
            continue
        rows[r], rows[piv] = rows[piv], rows[r]
        pv = rows[r][col]
        rows[r] = [v / pv for v in rows[r]]
        for i in range(m):
            if i != r and rows[i][col]:
                f = rows[i][col]
                rows[i] = [v - f * w for v, w in zip(rows[i], rows[r])]
        pivots.append(col)
        r += 1
        if r == m:
            break
    for i in range(r, m):
        if rows[i][n]:
            return None  # 0 = nonzero
    x = [Fraction(0)] * n
    for i, col in enumerate(pivots):
        x[col] = rows[i][n]
    return x
