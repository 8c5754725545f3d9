"""Exact rational arithmetic: scalars, dense univariate polynomials,
matrices, and the division-free kernels (Berkowitz characteristic
polynomial, companion matrices, extended resultants) that the rest of
the package builds on.

Everything here is deterministic and exact over ``fractions.Fraction``.
The Berkowitz routine is additionally generic over a caller-supplied
ring so it can run on matrices whose entries are program nodes or
truncated series rather than plain numbers.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

Scalar = Fraction


def parse_scalar(text: str) -> Fraction:
    """Parse ``p`` or ``p/q`` into a Fraction."""
    return Fraction(text.strip())


def format_scalar(value: Fraction) -> str:
    """Render a Fraction as ``p`` or ``p/q`` in lowest terms."""
    value = Fraction(value)
    if value.denominator == 1:
        return str(value.numerator)
    return f"{value.numerator}/{value.denominator}"


@dataclass(frozen=True)
class RingOps:
    """A commutative ring presented as callables.

    ``cadd``/``cmul`` take a Fraction constant and a ring element; they
    exist so rings of program nodes can emit the corresponding compact
    instructions instead of materialising constants as elements.
    """

    zero: object
    one: object
    add: Callable
    sub: Callable
    mul: Callable
    cadd: Callable
    cmul: Callable

    def from_scalar(self, c: Fraction):
        return self.cadd(c, self.zero)


FRACTION_OPS = RingOps(
    zero=Fraction(0),
    one=Fraction(1),
    add=lambda x, y: x + y,
    sub=lambda x, y: x - y,
    mul=lambda x, y: x * y,
    cadd=lambda c, x: x + c,
    cmul=lambda c, x: x * c,
)


class UniPoly:
    """Dense univariate polynomial with Fraction coefficients.

    Coefficients are stored in ascending order and trailing zeros are
    trimmed, so ``degree`` of the zero polynomial is -1.
    """

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence[Fraction] = ()):
        cs = [Fraction(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = cs

    @staticmethod
    def constant(c) -> "UniPoly":
        return UniPoly([Fraction(c)])

    @staticmethod
    def variable() -> "UniPoly":
        return UniPoly([Fraction(0), Fraction(1)])

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1

    def is_zero(self) -> bool:
        return not self.coeffs

    def __bool__(self) -> bool:
        return bool(self.coeffs)

    def __eq__(self, other) -> bool:
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(tuple(self.coeffs))

    def coeff(self, k: int) -> Fraction:
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return Fraction(0)

    def __add__(self, other: "UniPoly") -> "UniPoly":
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for i, c in enumerate(b):
            out[i] += c
        return UniPoly(out)

    def __neg__(self) -> "UniPoly":
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other: "UniPoly") -> "UniPoly":
        return self + (-other)

    def __mul__(self, other) -> "UniPoly":
        if isinstance(other, UniPoly):
            if not self.coeffs or not other.coeffs:
                return UniPoly()
            out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
            for i, a in enumerate(self.coeffs):
                if a == 0:
                    continue
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
            return UniPoly(out)
        return UniPoly([c * Fraction(other) for c in self.coeffs])

    __rmul__ = __mul__

    def __divmod__(self, divisor: "UniPoly"):
        if divisor.is_zero():
            raise ZeroDivisionError("division by the zero polynomial")
        lead = divisor.coeffs[-1]
        rem = list(self.coeffs)
        dd = divisor.degree
        q = [Fraction(0)] * max(0, len(rem) - dd)
        for k in range(len(rem) - 1, dd - 1, -1):
            c = rem[k] / lead
            if c:
                q[k - dd] = c
                for j, b in enumerate(divisor.coeffs):
                    rem[k - dd + j] -= c * b
        return UniPoly(q), UniPoly(rem[:dd])

    def __mod__(self, divisor: "UniPoly") -> "UniPoly":
        return divmod(self, divisor)[1]

    def __floordiv__(self, divisor: "UniPoly") -> "UniPoly":
        return divmod(self, divisor)[0]

    def monic(self) -> "UniPoly":
        if self.is_zero():
            raise ZeroDivisionError("the zero polynomial has no monic scaling")
        lead = self.coeffs[-1]
        return UniPoly([c / lead for c in self.coeffs])

    def derivative(self) -> "UniPoly":
        return UniPoly([i * c for i, c in enumerate(self.coeffs)][1:])

    def eval(self, x: Fraction) -> Fraction:
        acc = Fraction(0)
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def compose(self, inner: "UniPoly") -> "UniPoly":
        acc = UniPoly()
        for c in reversed(self.coeffs):
            acc = acc * inner + UniPoly.constant(c)
        return acc

    def shift(self, k: int) -> "UniPoly":
        """Multiply by t**k."""
        if self.is_zero():
            return UniPoly()
        return UniPoly([Fraction(0)] * k + self.coeffs)

    def __repr__(self):
        return f"UniPoly({[format_scalar(c) for c in self.coeffs]})"


class Matrix:
    """Row-major matrix of Fractions with exact Gaussian elimination."""

    __slots__ = ("rows",)

    def __init__(self, rows: Sequence[Sequence[Fraction]]):
        self.rows = [[Fraction(x) for x in row] for row in rows]

    @staticmethod
    def identity(n: int) -> "Matrix":
        return Matrix(
            [[Fraction(1) if i == j else Fraction(0) for j in range(n)] for i in range(n)]
        )

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.rows[0]) if self.rows else 0

    def __eq__(self, other):
        if isinstance(other, Matrix):
            return self.rows == other.rows
        return NotImplemented

    def __mul__(self, other: "Matrix") -> "Matrix":
        n, k, m = self.nrows, self.ncols, other.ncols
        assert k == other.nrows
        out = [[Fraction(0)] * m for _ in range(n)]
        for i in range(n):
            ri = self.rows[i]
            for t in range(k):
                a = ri[t]
                if a == 0:
                    continue
                rt = other.rows[t]
                oi = out[i]
                for j in range(m):
                    oi[j] += a * rt[j]
        return Matrix(out)

    def matvec(self, v: Sequence[Fraction]) -> list:
        return [sum((a * x for a, x in zip(row, v)), Fraction(0)) for row in self.rows]

    def transpose(self) -> "Matrix":
        return Matrix(list(map(list, zip(*self.rows))))

    def det(self) -> Fraction:
        n = self.nrows
        assert n == self.ncols
        a = [row[:] for row in self.rows]
        det = Fraction(1)
        for col in range(n):
            piv = next((r for r in range(col, n) if a[r][col] != 0), None)
            if piv is None:
                return Fraction(0)
            if piv != col:
                a[col], a[piv] = a[piv], a[col]
                det = -det
            det *= a[col][col]
            inv = 1 / a[col][col]
            for r in range(col + 1, n):
                f = a[r][col] * inv
                if f:
                    for c in range(col, n):
                        a[r][c] -= f * a[col][c]
        return det

    def solve(self, b: Sequence[Fraction]) -> list:
        """Solve self * x = b; raises ValueError when singular."""
        n = self.nrows
        assert n == self.ncols == len(b)
        a = [row[:] + [Fraction(b[i])] for i, row in enumerate(self.rows)]
        for col in range(n):
            piv = next((r for r in range(col, n) if a[r][col] != 0), None)
            if piv is None:
                raise ValueError("singular matrix")
            a[col], a[piv] = a[piv], a[col]
            inv = 1 / a[col][col]
            a[col] = [x * inv for x in a[col]]
            for r in range(n):
                if r != col and a[r][col]:
                    f = a[r][col]
                    a[r] = [x - f * y for x, y in zip(a[r], a[col])]
        return [a[i][n] for i in range(n)]

    def inverse(self) -> "Matrix":
        n = self.nrows
        cols = [self.solve([Fraction(1) if i == j else Fraction(0) for i in range(n)]) for j in range(n)]
        return Matrix(cols).transpose()


def berkowitz_charpoly(rows: Sequence[Sequence], ops: RingOps = FRACTION_OPS) -> list:
    """Characteristic polynomial of a square matrix, division-free.

    Returns ascending coefficients ``[c_0, ..., c_{n-1}, 1]`` of
    ``det(t*I - A)``.  Entries may live in any commutative ring given by
    ``ops``; no divisions or equality tests are performed on them.
    """
    n = len(rows)
    add, sub, mul = ops.add, ops.sub, ops.mul
    neg = lambda x: sub(ops.zero, x)
    if n == 0:
        return [ops.one]
    poly = [ops.one, neg(rows[0][0])]  # descending
    for i in range(1, n):
        r = rows[i][:i]
        col = [rows[j][i] for j in range(i)]
        items = [ops.one, neg(rows[i][i])]
        vec = col
        for _ in range(i):
            acc = ops.zero
            for a, b in zip(r, vec):
                acc = add(acc, mul(a, b))
            items.append(neg(acc))
            vec = [
                _dot(rows[j][:i], vec, ops) for j in range(i)
            ]
        new = []
        for j in range(i + 2):
            acc = ops.zero
            for k in range(max(0, j - (len(items) - 1)), min(j, i) + 1):
                acc = add(acc, mul(items[j - k], poly[k]))
            new.append(acc)
        poly = new
    return list(reversed(poly))


def _dot(xs, ys, ops: RingOps):
    acc = ops.zero
    for a, b in zip(xs, ys):
        acc = ops.add(acc, ops.mul(a, b))
    return acc


def berkowitz_det(rows: Sequence[Sequence], ops: RingOps = FRACTION_OPS):
    """Determinant as a by-product of the characteristic polynomial."""
    n = len(rows)
    c0 = berkowitz_charpoly(rows, ops)[0]
    return c0 if n % 2 == 0 else ops.sub(ops.zero, c0)


def berkowitz_adjugate(rows: Sequence[Sequence], ops: RingOps = FRACTION_OPS):
    """Adjugate matrix via Cayley-Hamilton, together with charpoly.

    Returns ``(adj, charpoly)`` where ``adj`` satisfies
    ``A * adj = det(A) * I`` and ``charpoly`` is ascending as in
    :func:`berkowitz_charpoly`.  Division-free.
    """
    n = len(rows)
    char = berkowitz_charpoly(rows, ops)
    if n == 0:
        return [], char
    add, mul = ops.add, ops.mul
    # B = sum_{j=0}^{n-1} c_{j+1} A^j ; adj = (-1)^{n+1} B
    acc = [[ops.zero] * n for _ in range(n)]
    power = [[ops.one if i == j else ops.zero for j in range(n)] for i in range(n)]
    for j in range(n):
        cj = char[j + 1]
        for a in range(n):
            for b in range(n):
                acc[a][b] = add(acc[a][b], mul(cj, power[a][b]))
        if j != n - 1:
            power = _mat_mul(power, rows, ops)
    if n % 2 == 0:
        acc = [[ops.sub(ops.zero, x) for x in row] for row in acc]
    return acc, char


def _mat_mul(a, b, ops: RingOps):
    n = len(a)
    m = len(b[0])
    k = len(b)
    out = [[ops.zero] * m for _ in range(n)]
    for i in range(n):
        for t in range(k):
            x = a[i][t]
            for j in range(m):
                out[i][j] = ops.add(out[i][j], ops.mul(x, b[t][j]))
    return out


def companion_matrix(p: UniPoly) -> Matrix:
    """Companion matrix of a monic polynomial of degree >= 1.

    Realised as multiplication by t on the basis 1, t, ..., t^(D-1) of
    Q[t]/(p): ones on the subdiagonal, -p_i down the last column.
    """
    d = p.degree
    if d < 1:
        raise ValueError("companion matrix needs degree >= 1")
    if p.coeffs[-1] != 1:
        raise ValueError("companion matrix needs a monic polynomial")
    rows = [[Fraction(0)] * d for _ in range(d)]
    for j in range(d - 1):
        rows[j + 1][j] = Fraction(1)
    for i in range(d):
        rows[i][d - 1] -= p.coeff(i)
    return Matrix(rows)


def sylvester_matrix(f: UniPoly, g: UniPoly, df: int, dg: int) -> Matrix:
    """Sylvester matrix for degree bounds (df, dg), f-block first.

    Columns hold coefficients of t^(df+dg-1) down to t^0; the bounds are
    honoured even when the actual degrees are lower, which matters for
    subresultant bookkeeping.
    """
    size = df + dg
    rows = [[Fraction(0)] * size for _ in range(size)]
    for i in range(dg):
        for j in range(df + 1):
            rows[i][i + j] = f.coeff(df - j)
    for i in range(df):
        for j in range(dg + 1):
            rows[dg + i][i + j] = g.coeff(dg - j)
    return Matrix(rows)


def ext_resultant(f: UniPoly, g: UniPoly, df: int, dg: int):
    """Resultant with Bezout cofactors for the given degree bounds.

    Returns ``(rho, q1, q2)`` with ``q1*f + q2*g = rho`` where ``rho``
    is the determinant of the Sylvester matrix, ``deg q1 < dg`` and
    ``deg q2 < df``.  When ``rho`` is zero the cofactors are returned as
    zero polynomials.
    """
    if df + dg == 0:
        # Empty Sylvester matrix: the resultant of two constants is 1 by
        # convention and no Bezout identity is available.
        return Fraction(1), UniPoly(), UniPoly()
    s = sylvester_matrix(f, g, df, dg)
    rho = s.det()
    if rho == 0:
        return Fraction(0), UniPoly(), UniPoly()
    size = df + dg
    rhs = [Fraction(0)] * size
    rhs[size - 1] = rho
    u = s.transpose().solve(rhs)
    q1 = UniPoly(list(reversed(u[:dg])))
    q2 = UniPoly(list(reversed(u[dg:])))
    return rho, q1, q2
