"""Exact rational helpers: parsing, small linear algebra, strict feasibility.

Feasibility of mixed strict / non-strict linear systems is decided by
Fourier-Motzkin elimination with a witness recovered by back-substitution.
The systems met in this package have at most six unknowns and a few dozen
rows, which keeps elimination cheap after deduplication.
"""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations
from math import gcd
from typing import Iterable, Sequence

from gmpy2 import mpq

# GMP rationals: same exact semantics as fractions.Fraction, an order of
# magnitude faster, which matters for the direction enumeration.
Q = mpq
Vec = tuple  # tuple[Q, ...]


def to_q(value) -> Q:
    """Parse an exact rational from an int, Fraction, or "p/q" string.

    Floats are rejected: geometry must be stated exactly.
    """
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, Q):
        return value
    if isinstance(value, Fraction):
        return Q(value.numerator, value.denominator)
    if isinstance(value, int) or type(value).__name__ == "mpz":
        return Q(value)
    if isinstance(value, str):
        return Q(value.strip())
    raise TypeError(f"non-rational numeric {value!r} ({type(value).__name__})")


def qvec(values: Iterable) -> tuple:
    return tuple(to_q(v) for v in values)


def dot(a: Sequence, b: Sequence):
    return sum((x * y for x, y in zip(a, b)), Q(0))


def sub(a: Sequence, b: Sequence) -> tuple:
    return tuple(x - y for x, y in zip(a, b))


def add(a: Sequence, b: Sequence) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


def scale(c, a: Sequence) -> tuple:
    return tuple(c * x for x in a)


def cross3(a: Sequence, b: Sequence) -> tuple:
    return (a[1] * b[2] - a[2] * b[1], a[2] * b[0] - a[0] * b[2], a[0] * b[1] - a[1] * b[0])


def primitive_int(vec: Sequence) -> tuple[int, ...]:
    """Scale a nonzero rational vector to the primitive integer vector with the same direction."""
    vec = [Q(v) for v in vec]
    if all(v == 0 for v in vec):
        raise ValueError("zero vector has no primitive direction")
    den = 1
    for v in vec:
        den = den * int(v.denominator) // gcd(den, int(v.denominator))
    ints = [int(v * den) for v in vec]
    g = 0
    for x in ints:
        g = gcd(g, abs(x))
    return tuple(x // g for x in ints)


def solve(matrix: Sequence[Sequence], rhs: Sequence) -> tuple | None:
    """Solve a square rational system; None when singular."""
    n = len(matrix)
    rows = [[Q(x) for x in matrix[i]] + [Q(rhs[i])] for i in range(n)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return None
        rows[col], rows[pivot] = rows[pivot], rows[col]
        p = rows[col][col]
        rows[col] = [x / p for x in rows[col]]
        for r in range(n):
            if r != col and rows[r][col] != 0:
                f = rows[r][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return tuple(rows[i][n] for i in range(n))


def rank(matrix: Sequence[Sequence]) -> int:
    rows = [[Q(x) for x in r] for r in matrix]
    if not rows:
        return 0
    ncol = len(rows[0])
    rk = 0
    for col in range(ncol):
        pivot = next((r for r in range(rk, len(rows)) if rows[r][col] != 0), None)
        if pivot is None:
            continue
        rows[rk], rows[pivot] = rows[pivot], rows[rk]
        for r in range(len(rows)):
            if r != rk and rows[r][col] != 0:
                f = rows[r][col] / rows[rk][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[rk])]
        rk += 1
    return rk


def det(matrix: Sequence[Sequence]) -> Q:
    rows = [[Q(x) for x in r] for r in matrix]
    n = len(rows)
    sign = 1
    result = Q(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if rows[r][col] != 0), None)
        if pivot is None:
            return Q(0)
        if pivot != col:
            rows[col], rows[pivot] = rows[pivot], rows[col]
            sign = -sign
        result *= rows[col][col]
        for r in range(col + 1, n):
            if rows[r][col] != 0:
                f = rows[r][col] / rows[col][col]
                rows[r] = [x - f * y for x, y in zip(rows[r], rows[col])]
    return sign * result


# A linear constraint is (a, b, strict) meaning a.x < b when strict, a.x <= b otherwise.
Constraint = tuple


def _normalize(con: Constraint) -> Constraint:
    a, b, strict = con
    lead = next((abs(x) for x in a if x != 0), None)
    if lead is None:
        return (a, b, strict)
    return (tuple(x / lead for x in a), b / lead, strict)


def _dedupe(cons: list) -> list:
    best: dict = {}
    for con in cons:
        a, b, strict = _normalize(con)
        prev = best.get(a)
        if prev is None or b < prev[0] or (b == prev[0] and strict and not prev[1]):
            best[a] = (b, strict)
    return [(a, b, s) for a, (b, s) in best.items()]


def feasible_point(constraints: Sequence[Constraint], nvars: int) -> tuple | None:
    """Return a rational point satisfying every constraint, or None.

    Strict rows are honoured exactly, so an open polyhedron with empty
    interior is reported infeasible.
    """
    cons = _dedupe(list(constraints))
    return _fm(cons, nvars)


def _fm(cons: list, nvars: int) -> tuple | None:
    if nvars == 0:
        for _, b, strict in cons:
            if (strict and not b > 0) or (not strict and b < 0):
                return None
        return ()
    k = nvars - 1
    upper, lower, rest = [], [], []
    for a, b, strict in cons:
        c = a[k]
        if c > 0:
            upper.append((a, b, strict))
        elif c < 0:
            lower.append((a, b, strict))
        else:
            rest.append((a[:k], b, strict))
    projected = list(rest)
    for au, bu, su in upper:
        for al, bl, sl in lower:
            cu, cl = au[k], -al[k]
            a = tuple(cl * x + cu * y for x, y in zip(au[:k], al[:k]))
            b = cl * bu + cu * bl
            projected.append((a, b, su or sl))
    sub_point = _fm(_dedupe(projected), k)
    if sub_point is None:
        return None
    lo, lo_strict, hi, hi_strict = None, False, None, False
    for a, b, strict in upper:
        val = (b - dot(a[:k], sub_point)) / a[k]
        if hi is None or val < hi or (val == hi and strict):
            hi, hi_strict = val, strict
    for a, b, strict in lower:
        val = (b - dot(a[:k], sub_point)) / a[k]
        if lo is None or val > lo or (val == lo and strict):
            lo, lo_strict = val, strict
    if lo is None and hi is None:
        x = Q(0)
    elif lo is None:
        x = hi - 1
    elif hi is None:
        x = lo + 1
    elif lo == hi:
        x = lo
    else:
        x = (lo + hi) / 2
    return sub_point + (x,)


def project_last(constraints: Sequence[Constraint], nvars: int) -> list:
    """Eliminate the last variable; the result describes the projection exactly."""
    cons = _dedupe(list(constraints))
    k = nvars - 1
    upper, lower, rest = [], [], []
    for a, b, strict in cons:
        c = a[k]
        if c > 0:
            upper.append((a, b, strict))
        elif c < 0:
            lower.append((a, b, strict))
        else:
            rest.append((a[:k], b, strict))
    out = list(rest)
    for au, bu, su in upper:
        for al, bl, sl in lower:
            cu, cl = au[k], -al[k]
            a = tuple(cl * x + cu * y for x, y in zip(au[:k], al[:k]))
            out.append((a, cl * bu + cu * bl, su or sl))
    return _dedupe([c for c in out if any(x != 0 for x in c[0]) or c[1] < 0])


def box_vertices(constraints: Sequence[Constraint], nvars: int) -> list[tuple]:
    """Vertices of the bounded polyhedron {a.x <= b} by exact pivoting over row subsets."""
    rows = [(a, b) for a, b, _ in constraints]
    verts = set()
    for subset in combinations(range(len(rows)), nvars):
        mat = [rows[i][0] for i in subset]
        point = solve(mat, [rows[i][1] for i in subset])
        if point is None:
            continue
        if all(dot(a, point) <= b for a, b in rows):
            verts.add(point)
    return sorted(verts)


def int_matrix_inverse(matrix: Sequence[Sequence[int]]) -> list[list[int]]:
    """Inverse of a unimodular integer matrix."""
    n = len(matrix)
    cols = []
    for j in range(n):
        e = [Q(1 if i == j else 0) for i in range(n)]
        x = solve(matrix, e)
        if x is None:
            raise ValueError("matrix is singular")
        cols.append(x)
    inv = [[cols[j][i] for j in range(n)] for i in range(n)]
    if any(v.denominator != 1 for row in inv for v in row):
        raise ValueError("matrix is not unimodular")
    return [[int(v) for v in row] for row in inv]


def unimodular_completion(n: Sequence[int]) -> list[list[int]]:
    """Integer matrix M with det +-1 whose last column is the primitive vector n.

    Row operations reduce n to +e_d by Euclid; the accumulated operator U
    satisfies U n = e_d, so M = U^-1 has n as last column.  Remaining
    columns are size-reduced against n to keep the transverse cell small.
    """
    d = len(n)
    v = list(n)
    U = [[1 if i == j else 0 for j in range(d)] for i in range(d)]

    def addrow(dst, src, k):
        v[dst] += k * v[src]
        U[dst] = [x + k * y for x, y in zip(U[dst], U[src])]

    def swap(i, j):
        v[i], v[j] = v[j], v[i]
        U[i], U[j] = U[j], U[i]

    last = d - 1
    while True:
        nz = [i for i in range(d) if v[i] != 0]
        if len(nz) == 1:
            break
        nz.sort(key=lambda i: abs(v[i]))
        p = nz[0]
        for i in nz[1:]:
            addrow(i, p, -(v[i] // v[p]))
    p = next(i for i in range(d) if v[i] != 0)
    if abs(v[p]) != 1:
        raise ValueError(f"{tuple(n)} is not primitive")
    if p != last:
        swap(p, last)
    if v[last] == -1:
        v[last] = 1
        U[last] = [-x for x in U[last]]
        # keep det(U) = +-1 either way; sign is irrelevant downstream
    M = int_matrix_inverse(U)
    nn = sum(x * x for x in n)
    for j in range(d - 1):
        col = [M[i][j] for i in range(d)]
        k = round(Q(sum(c * x for c, x in zip(col, n)), nn))
        for i in range(d):
            M[i][j] -= k * n[i]
    return M
