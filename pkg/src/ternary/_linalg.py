"""Small dense matrix helpers over A = F_q[t]; matrices are tuples of row tuples."""

from typing import List, Sequence, Tuple

from src.ternary.ffpoly import Poly

Matrix = Tuple[Tuple[Poly, ...], ...]


def as_matrix(rows: Sequence[Sequence[Poly]]) -> Matrix:
    return tuple(tuple(r) for r in rows)


def identity(q: int, n: int = 3) -> Matrix:
    return tuple(
        tuple(Poly.one(q) if i == j else Poly.zero(q) for j in range(n)) for i in range(n)
    )


def transpose(m: Matrix) -> Matrix:
    return tuple(zip(*m))


def mat_mul(a: Matrix, b: Matrix) -> Matrix:
    q = a[0][0].q
    cols = transpose(b)
    out: List[Tuple[Poly, ...]] = []
    for row in a:
        out_row = []
        for col in cols:
            acc = Poly.zero(q)
            for x, y in zip(row, col):
                if not x.is_zero() and not y.is_zero():
                    acc = acc + x * y
            out_row.append(acc)
        out.append(tuple(out_row))
    return tuple(out)


def congruence(gram: Matrix, t: Matrix) -> Matrix:
    """T^t G T: the Gram matrix in the basis given by the columns of T."""
    return mat_mul(mat_mul(transpose(t), gram), t)


def det2(a: Poly, b: Poly, c: Poly, d: Poly) -> Poly:
    return a * d - b * c


def det3(m: Matrix) -> Poly:
    return (
        m[0][0] * det2(m[1][1], m[1][2], m[2][1], m[2][2])
        - m[0][1] * det2(m[1][0], m[1][2], m[2][0], m[2][2])
        + m[0][2] * det2(m[1][0], m[1][1], m[2][0], m[2][1])
    )


def principal_minor(m: Matrix, i: int, j: int) -> Poly:
    return det2(m[i][i], m[i][j], m[j][i], m[j][j])


def is_symmetric(m: Matrix) -> bool:
    return all(m[i][j] == m[j][i] for i in range(len(m)) for j in range(i))


def column(m: Matrix, j: int) -> Tuple[Poly, ...]:
    return tuple(row[j] for row in m)


def from_columns(cols: Sequence[Sequence[Poly]]) -> Matrix:
    return transpose(as_matrix(cols))


def apply(m: Matrix, v: Sequence[Poly]) -> Tuple[Poly, ...]:
    q = m[0][0].q
    out = []
    for row in m:
        acc = Poly.zero(q)
        for x, y in zip(row, v):
            acc = acc + x * y
        out.append(acc)
    return tuple(out)


def bilinear(gram: Matrix, x: Sequence[Poly], y: Sequence[Poly]) -> Poly:
    return sum(
        (xi * gij * yj for xi, row in zip(x, gram) for gij, yj in zip(row, y)),
        Poly.zero(gram[0][0].q),
    )


def format_matrix(m: Matrix) -> List[List[str]]:
    return [[str(x) for x in row] for row in m]


def row_hermite(rows: Sequence[Sequence[Poly]]) -> List[Tuple[Poly, ...]]:
    """Echelon basis of the A-module spanned by ``rows``, pivots monic."""
    work = [list(r) for r in rows if any(not x.is_zero() for x in r)]
    out: List[Tuple[Poly, ...]] = []
    ncols = len(work[0]) if work else 0
    for col in range(ncols):
        while True:
            live = [r for r in work if not r[col].is_zero()]
            if len(live) <= 1:
                break
            pivot = min(live, key=lambda r: r[col].degree)
            for r in live:
                if r is pivot:
                    continue
                k = r[col] // pivot[col]
                for j in range(col, ncols):
                    r[j] = r[j] - k * pivot[j]
            work = [r for r in work if any(not x.is_zero() for x in r)]
        live = [r for r in work if not r[col].is_zero()]
        if not live:
            continue
        pivot = live[0]
        q = pivot[col].q
        inv = pow(pivot[col].leading_coefficient, q - 2, q)
        out.append(tuple(x * inv for x in pivot))
        work = [r for r in work if r is not pivot]
    return out


def det_n(m: Sequence[Sequence[Poly]]) -> Poly:
    """Determinant by cofactor expansion along the first row (small n only)."""
    n = len(m)
    if n == 1:
        return m[0][0]
    if n == 2:
        return det2(m[0][0], m[0][1], m[1][0], m[1][1])
    acc = Poly.zero(m[0][0].q)
    for j in range(n):
        if m[0][j].is_zero():
            continue
        minor = [row[:j] + row[j + 1 :] for row in (tuple(r) for r in m[1:])]
        term = m[0][j] * det_n(minor)
        acc = acc - term if j % 2 else acc + term
    return acc
