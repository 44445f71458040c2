"""Exact dense linear algebra over any exact field-like type.

Entries must support +, -, *, / and be falsy exactly when zero
(``fractions.Fraction``, ``gmpy2.mpq``, and the quadratic-field pairs
used elsewhere in the package all qualify).  Everything here works on
plain lists of lists and returns new lists.
"""

from __future__ import annotations

__all__ = ["rref", "nullspace", "solve", "inverse"]


def rref(matrix: list[list]) -> tuple[list[list], list[int]]:
    """Reduced row echelon form; returns (rows, pivot_columns).

    Zero rows are dropped from the result.
    """
    rows = [list(r) for r in matrix]
    if not rows:
        return [], []
    ncols = len(rows[0])
    pivots: list[int] = []
    r = 0
    for c in range(ncols):
        pivot = next((i for i in range(r, len(rows)) if rows[i][c]), None)
        if pivot is None:
            continue
        rows[r], rows[pivot] = rows[pivot], rows[r]
        inv = 1 / rows[r][c]
        rows[r] = [x * inv for x in rows[r]]
        for i in range(len(rows)):
            if i != r and rows[i][c]:
                factor = rows[i][c]
                rows[i] = [a - factor * b for a, b in zip(rows[i], rows[r])]
        pivots.append(c)
        r += 1
        if r == len(rows):
            break
    return rows[:r], pivots


def nullspace(matrix: list[list]) -> list[list]:
    """Basis of the right kernel of the matrix, as rows.

    Free coordinates are set to 1 one at a time, matching the usual
    reduced-echelon parametrization.
    """
    if not matrix:
        return []
    ncols = len(matrix[0])
    rows, pivots = rref(matrix)
    one = None
    for row in rows:
        for x in row:
            if x:
                one = x / x
                break
        if one is not None:
            break
    if one is None:
        one = 1
    zero = one - one
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vec = [zero] * ncols
        vec[free] = one
        for row, pc in zip(rows, pivots):
            vec[pc] = -row[free]
        basis.append(vec)
    return basis


def solve(matrix: list[list], rhs: list) -> list:
    """Solve A x = b exactly; raises ValueError when inconsistent.

    With more than one solution, free coordinates are set to zero.
    """
    if not matrix:
        raise ValueError("empty system")
    ncols = len(matrix[0])
    augmented = [list(r) + [b] for r, b in zip(matrix, rhs)]
    rows, pivots = rref(augmented)
    if ncols in pivots:
        raise ValueError("inconsistent linear system")
    zero = None
    for row in rows:
        for x in row:
            if x:
                zero = x - x
                break
        if zero is not None:
            break
    solution = [zero if zero is not None else 0] * ncols
    for row, pc in zip(rows, pivots):
        solution[pc] = row[-1]
    return solution


def inverse(matrix: list[list]) -> list[list]:
    """Exact inverse of a square matrix; raises ValueError if singular."""
    n = len(matrix)
    if any(len(r) != n for r in matrix):
        raise ValueError("matrix is not square")
    sample = matrix[0][0]
    one = None
    for row in matrix:
        for x in row:
            if x:
                one = x / x
                break
        if one is not None:
            break
    if one is None:
        raise ValueError("singular matrix")
    zero = one - one
    augmented = [
        list(row) + [one if i == j else zero for j in range(n)]
        for i, row in enumerate(matrix)
    ]
    rows, pivots = rref(augmented)
    if pivots != list(range(n)):
        raise ValueError("singular matrix")
    return [row[n:] for row in rows]
