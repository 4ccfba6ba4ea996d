"""Small exact linear algebra over the rationals.

Matrices are lists of rows. Sizes are tiny (n <= 4 in practice), so plain
Gaussian elimination on ``Fraction`` entries is fast enough and keeps the
combinatorial layer free of rounding.
"""

from fractions import Fraction


def to_fraction_matrix(rows):
    return [[Fraction(a) for a in row] for row in rows]


def det(rows):
    a = to_fraction_matrix(rows)
    n = len(a)
    sign = 1
    result = Fraction(1)
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return Fraction(0)
        if pivot != col:
            a[col], a[pivot] = a[pivot], a[col]
            sign = -sign
        p = a[col][col]
        result *= p
        for r in range(col + 1, n):
            f = a[r][col] / p
            if f:
                for c in range(col, n):
                    a[r][c] -= f * a[col][c]
    return sign * result


def solve(rows, rhs):
    """Solve ``rows @ x = rhs``; returns None when the matrix is singular."""
    n = len(rows)
    a = [list(map(Fraction, row)) + [Fraction(b)] for row, b in zip(rows, rhs)]
    for col in range(n):
        pivot = next((r for r in range(col, n) if a[r][col] != 0), None)
        if pivot is None:
            return None
        a[col], a[pivot] = a[pivot], a[col]
        p = a[col][col]
        for r in range(n):
            if r != col and a[r][col]:
                f = a[r][col] / p
                for c in range(col, n + 1):
                    a[r][c] -= f * a[col][c]
    return [a[i][n] / a[i][i] for i in range(n)]


def inverse(rows):
    n = len(rows)
    cols = []
    for j in range(n):
        e = [Fraction(int(i == j)) for i in range(n)]
        x = solve(rows, e)
        if x is None:
            raise ZeroDivisionError("singular matrix")
        cols.append(x)
    return [[cols[j][i] for j in range(n)] for i in range(n)]


def transpose(rows):
    return [list(col) for col in zip(*rows)]


def matvec(rows, v):
    return [sum((Fraction(a) * b for a, b in zip(row, v)), Fraction(0)) for row in rows]


def matmul(a, b):
    bt = transpose(b)
    return [[sum((Fraction(x) * y for x, y in zip(row, col)), Fraction(0)) for col in bt] for row in a]


def dot(u, v):
    return sum((Fraction(a) * b for a, b in zip(u, v)), Fraction(0))


def rank(rows):
    a = to_fraction_matrix(rows)
    if not a:
        return 0
    m, n = len(a), len(a[0])
    r = 0
    for col in range(n):
        pivot = next((i for i in range(r, m) if a[i][col] != 0), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        for i in range(r + 1, m):
            f = a[i][col] / a[r][col]
            if f:
                for c in range(col, n):
                    a[i][c] -= f * a[r][c]
        r += 1
        if r == m:
            break
    return r


def affine_dimension(points):
    """Dimension of the affine hull of a finite point set (-1 when empty)."""
    points = list(points)
    if not points:
        return -1
    base = points[0]
    diffs = [[Fraction(a) - b for a, b in zip(p, base)] for p in points[1:]]
    return rank(diffs) if diffs else 0


def parse_rational(value):
    """Parse ``"p/q"`` strings, ints and exact decimals into a Fraction."""
    if isinstance(value, bool):
        raise TypeError("booleans are not rationals")
    if isinstance(value, (int, Fraction)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(value).limit_denominator(10**12)
    if isinstance(value, str):
        return Fraction(value.strip())
    raise TypeError(f"cannot parse {value!r} as a rational")


def format_rational(q):
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"
