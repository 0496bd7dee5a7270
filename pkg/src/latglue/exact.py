"""Exact integer/rational matrix kernel.

Everything downstream (lattices, torsion forms, over-lattice searches) runs on
these routines; no floating point is used anywhere in the package.  Matrices
are plain row-major lists of lists holding ``int`` or ``fractions.Fraction``
entries, which keeps the kernel small and keeps every result exact.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

IntMatrix = list[list[int]]
QMatrix = list[list[Fraction]]
Vector = list[Fraction]


class SingularMatrixError(ValueError):
    pass


class RankDeficientError(ValueError):
    pass


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, x, y) with g = gcd(a, b) >= 0 and a*x + b*y = g."""
    x0, x1, y0, y1 = 1, 0, 0, 1
    while b:
        q, a, b = a // b, b, a % b
        x0, x1 = x1, x0 - q * x1
        y0, y1 = y1, y0 - q * y1
    if a < 0:
        a, x0, y0 = -a, -x0, -y0
    return a, x0, y0


def identity_matrix(n: int) -> IntMatrix:
    return [[1 if i == j else 0 for j in range(n)] for i in range(n)]


def copy_matrix(m: Sequence[Sequence]) -> list[list]:
    return [list(row) for row in m]


def matrix_dims(m: Sequence[Sequence]) -> tuple[int, int]:
    rows = len(m)
    cols = len(m[0]) if rows else 0
    if any(len(row) != cols for row in m):
        raise ValueError("ragged matrix")
    return rows, cols


def transpose(m: Sequence[Sequence]) -> list[list]:
    return [list(col) for col in zip(*m)] if m else []


def mat_mul(a: Sequence[Sequence], b: Sequence[Sequence]) -> list[list]:
    ra, ca = matrix_dims(a)
    rb, cb = matrix_dims(b)
    if ca != rb:
        raise ValueError("dimension mismatch")
    bt = transpose(b)
    return [[sum(x * y for x, y in zip(row, col)) for col in bt] for row in a]


def mat_vec(m: Sequence[Sequence], v: Sequence) -> list:
    return [sum(x * y for x, y in zip(row, v)) for row in m]


def is_symmetric(m: Sequence[Sequence]) -> bool:
    rows, cols = matrix_dims(m)
    if rows != cols:
        return False
    return all(m[i][j] == m[j][i] for i in range(rows) for j in range(i + 1, rows))


def det(m: Sequence[Sequence]) -> Fraction:
    """Determinant by exact fraction-valued Gaussian elimination."""
    n, c = matrix_dims(m)
    if n != c:
        raise ValueError("determinant of non-square matrix")
    a = [[Fraction(x) for x in row] for row in m]
    result = Fraction(1)
    for t in range(n):
        pivot_row = next((i for i in range(t, n) if a[i][t] != 0), None)
        if pivot_row is None:
            return Fraction(0)
        if pivot_row != t:
            a[t], a[pivot_row] = a[pivot_row], a[t]
            result = -result
        result *= a[t][t]
        inv = 1 / a[t][t]
        for i in range(t + 1, n):
            if a[i][t] != 0:
                factor = a[i][t] * inv
                a[i] = [x - factor * y for x, y in zip(a[i], a[t])]
    return result


def inverse(m: Sequence[Sequence]) -> QMatrix:
    """Exact inverse via Gauss-Jordan elimination."""
    n, c = matrix_dims(m)
    if n != c:
        raise SingularMatrixError("singular")
    a = [[Fraction(x) for x in row] for row in m]
    inv = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]
    for t in range(n):
        pivot_row = next((i for i in range(t, n) if a[i][t] != 0), None)
        if pivot_row is None:
            raise SingularMatrixError("singular")
        if pivot_row != t:
            a[t], a[pivot_row] = a[pivot_row], a[t]
            inv[t], inv[pivot_row] = inv[pivot_row], inv[t]
        scale = 1 / a[t][t]
        a[t] = [x * scale for x in a[t]]
        inv[t] = [x * scale for x in inv[t]]
        for i in range(n):
            if i != t and a[i][t] != 0:
                factor = a[i][t]
                a[i] = [x - factor * y for x, y in zip(a[i], a[t])]
                inv[i] = [x - factor * y for x, y in zip(inv[i], inv[t])]
    return inv


def int_matrix(m: Sequence[Sequence]) -> IntMatrix:
    """Cast an exactly-integral matrix to int entries, or raise ValueError."""
    out = []
    for row in m:
        new_row = []
        for x in row:
            f = Fraction(x)
            if f.denominator != 1:
                raise ValueError("matrix entry %s is not an integer" % (x,))
            new_row.append(int(f))
        out.append(new_row)
    return out


@dataclass(frozen=True)
class SnfDecomposition:
    """u @ m @ v == d with d diagonal, d_1 | d_2 | ... , u and v unimodular."""

    d: IntMatrix
    u: IntMatrix
    v: IntMatrix

    @property
    def diagonal(self) -> list[int]:
        return [self.d[i][i] for i in range(min(matrix_dims(self.d)))]

    @property
    def invariant_factors(self) -> list[int]:
        return [x for x in self.diagonal if x not in (0, 1)]


def _min_abs_pivot(a: IntMatrix, t: int) -> tuple[int, int] | None:
    # Smallest nonzero absolute value; ties broken by row-major position.
    best = None
    best_val = None
    for i in range(t, len(a)):
        for j in range(t, len(a[0])):
            x = abs(a[i][j])
            if x and (best_val is None or x < best_val):
                best, best_val = (i, j), x
    return best


def snf(m: Sequence[Sequence[int]]) -> SnfDecomposition:
    """Smith normal form with a fixed pivot rule, so output is deterministic.

    Pivots are chosen as the entry of smallest nonzero absolute value in the
    trailing submatrix, ties resolved in row-major order.
    """
    nr, nc = matrix_dims(m)
    a = [[int(x) for x in row] for row in m]
    u = identity_matrix(nr)
    v = identity_matrix(nc)
    t = 0
    while t < min(nr, nc):
        pos = _min_abs_pivot(a, t)
        if pos is None:
            break
        while True:
            i, j = pos
            if i != t:
                a[t], a[i] = a[i], a[t]
                u[t], u[i] = u[i], u[t]
            if j != t:
                for row in a:
                    row[t], row[j] = row[j], row[t]
                for row in v:
                    row[t], row[j] = row[j], row[t]
            if a[t][t] < 0:
                a[t] = [-x for x in a[t]]
                u[t] = [-x for x in u[t]]
            pivot = a[t][t]
            for i in range(t + 1, nr):
                if a[i][t]:
                    q = a[i][t] // pivot
                    a[i] = [x - q * y for x, y in zip(a[i], a[t])]
                    u[i] = [x - q * y for x, y in zip(u[i], u[t])]
            for j in range(t + 1, nc):
                if a[t][j]:
                    q = a[t][j] // pivot
                    for row in a:
                        row[j] -= q * row[t]
                    for row in v:
                        row[j] -= q * row[t]
            if any(a[i][t] for i in range(t + 1, nr)) or any(
                a[t][j] for j in range(t + 1, nc)
            ):
                pos = _min_abs_pivot(a, t)
                continue
            # Fold in any trailing entry the pivot does not divide yet.
            bad = next(
                (
                    (i, j)
                    for i in range(t + 1, nr)
                    for j in range(t + 1, nc)
                    if a[i][j] % pivot
                ),
                None,
            )
            if bad is None:
                break
            i = bad[0]
            a[t] = [x + y for x, y in zip(a[t], a[i])]
            u[t] = [x + y for x, y in zip(u[t], u[i])]
            pos = _min_abs_pivot(a, t)
        t += 1
    return SnfDecomposition(d=a, u=u, v=v)


def hnf(m: Sequence[Sequence[int]]) -> IntMatrix:
    """Row-style Hermite normal form of the row lattice of ``m``.

    Convention: positive pivots, entries above each pivot reduced into
    [0, pivot).  Requires full column rank; the result is square.
    """
    nr, nc = matrix_dims(m)
    a = [[int(x) for x in row] for row in m]
    r = 0
    for j in range(nc):
        # Euclid downwards until one nonzero entry remains in column j.
        while True:
            live = [i for i in range(r, nr) if a[i][j]]
            if not live:
                break
            pick = min(live, key=lambda i: (abs(a[i][j]), i))
            if pick != r:
                a[r], a[pick] = a[pick], a[r]
            if len(live) == 1:
                break
            for i in range(r + 1, nr):
                if a[i][j]:
                    q = a[i][j] // a[r][j]
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
        if r < nr and a[r][j]:
            if a[r][j] < 0:
                a[r] = [-x for x in a[r]]
            for i in range(r):
                q = a[i][j] // a[r][j]
                if q:
                    a[i] = [x - q * y for x, y in zip(a[i], a[r])]
            r += 1
    if r < nc:
        raise RankDeficientError("rank deficient")
    return a[:r]


def congruence_diagonalize(g: Sequence[Sequence]) -> tuple[QMatrix, QMatrix]:
    """Return (p, d) with p.T @ g @ p == d diagonal, p invertible.

    Zero diagonal pivots are repaired the standard way: when every usable
    diagonal entry vanishes but some off-diagonal g_ij != 0 remains, row and
    column j are first added to row and column i.
    """
    n, c = matrix_dims(g)
    if n != c or not is_symmetric(g):
        raise ValueError("congruence_diagonalize needs a symmetric square matrix")
    a = [[Fraction(x) for x in row] for row in g]
    p = [[Fraction(1 if i == j else 0) for j in range(n)] for i in range(n)]

    def add_col(dst: int, src: int, factor: Fraction) -> None:
        for row in a:
            row[dst] += factor * row[src]
        for i in range(n):
            a[dst][i] += factor * a[src][i]
        for row in p:
            row[dst] += factor * row[src]

    def swap(i: int, j: int) -> None:
        for row in a:
            row[i], row[j] = row[j], row[i]
        a[i], a[j] = a[j], a[i]
        for row in p:
            row[i], row[j] = row[j], row[i]

    for t in range(n):
        if a[t][t] == 0:
            k = next((i for i in range(t + 1, n) if a[i][i] != 0), None)
            if k is not None:
                swap(t, k)
            else:
                pair = next(
                    (
                        (i, j)
                        for i in range(t, n)
                        for j in range(i + 1, n)
                        if a[i][j] != 0
                    ),
                    None,
                )
                if pair is None:
                    break  # trailing block is identically zero
                i, j = pair
                if i != t:
                    swap(t, i)  # j > i > t, so column j is untouched
                add_col(t, j, Fraction(1))
        for i in range(t + 1, n):
            if a[t][i] != 0:
                add_col(i, t, -a[t][i] / a[t][t])
    d = [[a[i][j] if i == j else Fraction(0) for j in range(n)] for i in range(n)]
    return p, d


def signature_of(g: Sequence[Sequence]) -> tuple[int, int, int]:
    """(positive, negative, zero) inertia counts of a symmetric matrix."""
    _, d = congruence_diagonalize(g)
    pos = sum(1 for i in range(len(d)) if d[i][i] > 0)
    neg = sum(1 for i in range(len(d)) if d[i][i] < 0)
    return pos, neg, len(d) - pos - neg


def fraction_matrix(m: Sequence[Sequence]) -> QMatrix:
    return [[Fraction(x) for x in row] for row in m]


def mat_eq(a: Sequence[Sequence], b: Sequence[Sequence]) -> bool:
    da, db = matrix_dims(a), matrix_dims(b)
    if da != db:
        return False
    return all(
        Fraction(x) == Fraction(y) for ra, rb in zip(a, b) for x, y in zip(ra, rb)
    )


def matrix_order(m: Sequence[Sequence[int]], cap: int = 1000) -> int | None:
    """Multiplicative order of an integer matrix, or None if above ``cap``."""
    n, c = matrix_dims(m)
    if n != c:
        raise ValueError("order of non-square matrix")
    ident = identity_matrix(n)
    power = copy_matrix(m)
    for k in range(1, cap + 1):
        if power == ident:
            return k
        power = mat_mul(power, m)
    return None
