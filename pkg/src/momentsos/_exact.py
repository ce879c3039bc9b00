"""Exact rational linear algebra used to promote numeric results to proofs.

Numeric solvers hand back binary64 matrices.  To turn those into exact
certificates we round entries to nearby rationals, re-project exactly onto
the affine constraint set over Q, and run a rational LDL^T factorization
that doubles as a positive semidefiniteness proof.  Everything here is
Fraction arithmetic; nothing is trusted from floating point.
"""

from __future__ import annotations

from fractions import Fraction
from math import isqrt
from typing import Optional, Sequence


def rationalize(values, cap: int) -> list[Fraction]:
    """Best rational approximations with denominators bounded by cap."""
    return [Fraction(float(v)).limit_denominator(cap) for v in values]


RATIONALIZATION_CAPS = (1, 4, 16, 64, 1024, 32768, 10**6)


def psd_ldl(G: Sequence[Sequence[Fraction]]):
    """Pivoted LDL^T of a symmetric rational matrix, or None if not PSD.

    Returns (pivots, columns): G = sum_k pivots[k] * col_k col_k^T with each
    col_k a full-length rational vector.  A zero pivot with a nonzero
    residual row disproves semidefiniteness exactly.
    """
    n = len(G)
    A = [[Fraction(x) for x in row] for row in G]
    remaining = list(range(n))
    pivots: list[Fraction] = []
    columns: list[list[Fraction]] = []
    while remaining:
        p = max(remaining, key=lambda i: A[i][i])
        d = A[p][p]
        if d < 0:
            return None
        if d == 0:
            for i in remaining:
                for j in remaining:
                    if A[i][j] != 0:
                        return None
            break
        ell = [Fraction(0)] * n
        ell[p] = Fraction(1)
        for i in remaining:
            if i != p:
                ell[i] = A[i][p] / d
        remaining.remove(p)
        for i in remaining:
            if ell[i] == 0:
                continue
            for j in remaining:
                if ell[j] != 0:
                    A[i][j] -= ell[i] * d * ell[j]
        pivots.append(d)
        columns.append(ell)
    return pivots, columns


def solve_psd_system(M, rhs) -> Optional[list[Fraction]]:
    """Solve M z = rhs for symmetric PSD rational M; None if inconsistent.

    Gauss-Jordan with diagonal pivoting.  When the Schur complement hits
    zero, the untouched equations must have zero right-hand side, otherwise
    rhs is outside the range of M.
    """
    n = len(M)
    A = [[Fraction(x) for x in row] for row in M]
    r = [Fraction(x) for x in rhs]
    z = [Fraction(0)] * n
    remaining = list(range(n))
    solved: list[int] = []
    while remaining:
        p = max(remaining, key=lambda i: A[i][i])
        d = A[p][p]
        if d <= 0:
            break
        inv = 1 / d
        A[p] = [a * inv for a in A[p]]
        r[p] *= inv
        for i in range(n):
            if i != p and A[i][p] != 0:
                f = A[i][p]
                A[i] = [a - f * b for a, b in zip(A[i], A[p])]
                r[i] -= f * r[p]
        remaining.remove(p)
        solved.append(p)
    for i in remaining:
        if r[i] != 0:
            return None
    # after Gauss-Jordan the solved rows reference only unsolved columns,
    # which we set to zero, so z[p] = r[p]
    for p in solved:
        z[p] = r[p]
    return z


def project_affine_exact(x, rows, b) -> Optional[list[Fraction]]:
    """Orthogonal projection of x onto {z : A z = b} over the rationals.

    ``rows`` is a sparse rational matrix, one dict {index: coeff} per
    equation.  Returns None when the system is inconsistent.
    """
    m = len(rows)
    x = [Fraction(v) for v in x]
    if m == 0:
        return x
    residual = []
    for row, bk in zip(rows, b):
        residual.append(sum((c * x[j] for j, c in row.items()), Fraction(0)) - Fraction(bk))
    gram = [[Fraction(0)] * m for _ in range(m)]
    for k in range(m):
        for l in range(k, m):
            shorter, longer = (rows[k], rows[l]) if len(rows[k]) <= len(rows[l]) else (rows[l], rows[k])
            acc = Fraction(0)
            for j, c in shorter.items():
                other = longer.get(j)
                if other is not None:
                    acc += c * other
            gram[k][l] = gram[l][k] = acc
    z = solve_psd_system(gram, residual)
    if z is None:
        return None
    for row, zk in zip(rows, z):
        if zk == 0:
            continue
        for j, c in row.items():
            x[j] -= zk * c
    return x


def residual_exact(x, rows, b) -> list[Fraction]:
    """A x - b over the rationals."""
    out = []
    for row, bk in zip(rows, b):
        out.append(sum((c * x[j] for j, c in row.items()), Fraction(0)) - Fraction(bk))
    return out


def fraction_sqrt(value: Fraction) -> Optional[Fraction]:
    """Exact square root of a rational, or None if it is not a perfect square."""
    if value < 0:
        return None
    num, den = value.numerator, value.denominator
    rn, rd = isqrt(num), isqrt(den)
    if rn * rn == num and rd * rd == den:
        return Fraction(rn, rd)
    return None
