"""Brute-force reference implementations used by the test suite.

Everything in this module is written for clarity over speed: dense
exponent-dict polynomials, textbook Chow form constructions for points
and hypersurfaces, and Sylvester resultants.  Production code must not
call into here; tests compare the fast paths against these.
"""

from __future__ import annotations

from fractions import Fraction
from typing import Iterable, Optional, Sequence

from .exact_arith import Matrix, RingOps, UniPoly, sylvester_matrix


class DensePolyMulti:
    """Multivariate polynomial as a mapping exponent-tuple -> Fraction."""

    __slots__ = ("nvars", "terms")

    def __init__(self, nvars: int, terms: Optional[dict] = None):
        self.nvars = nvars
        self.terms = {}
        if terms:
            for mono, c in terms.items():
                c = Fraction(c)
                if c:
                    assert len(mono) == nvars
                    self.terms[tuple(mono)] = c

    @staticmethod
    def constant(c, nvars: int) -> "DensePolyMulti":
        return DensePolyMulti(nvars, {(0,) * nvars: Fraction(c)})

    @staticmethod
    def variable(i: int, nvars: int) -> "DensePolyMulti":
        mono = [0] * nvars
        mono[i] = 1
        return DensePolyMulti(nvars, {tuple(mono): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def __eq__(self, other):
        if isinstance(other, DensePolyMulti):
            return self.nvars == other.nvars and self.terms == other.terms
        return NotImplemented

    def __hash__(self):
        return hash((self.nvars, frozenset(self.terms.items())))

    def __add__(self, other: "DensePolyMulti") -> "DensePolyMulti":
        assert self.nvars == other.nvars
        out = dict(self.terms)
        for mono, c in other.terms.items():
            out[mono] = out.get(mono, Fraction(0)) + c
        return DensePolyMulti(self.nvars, out)

    def __neg__(self) -> "DensePolyMulti":
        return DensePolyMulti(self.nvars, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other: "DensePolyMulti") -> "DensePolyMulti":
        return self + (-other)

    def __mul__(self, other) -> "DensePolyMulti":
        if isinstance(other, DensePolyMulti):
            assert self.nvars == other.nvars
            out: dict = {}
            for m1, c1 in self.terms.items():
                for m2, c2 in other.terms.items():
                    mono = tuple(a + b for a, b in zip(m1, m2))
                    out[mono] = out.get(mono, Fraction(0)) + c1 * c2
            return DensePolyMulti(self.nvars, out)
        return DensePolyMulti(self.nvars, {m: c * Fraction(other) for m, c in self.terms.items()})

    __rmul__ = __mul__

    def __pow__(self, k: int) -> "DensePolyMulti":
        acc = DensePolyMulti.constant(1, self.nvars)
        for _ in range(k):
            acc = acc * self
        return acc

    def eval(self, point: Sequence[Fraction]) -> Fraction:
        assert len(point) == self.nvars
        total = Fraction(0)
        for mono, c in self.terms.items():
            v = c
            for x, e in zip(point, mono):
                for _ in range(e):
                    v *= x
            total += v
        return total

    def partial(self, i: int) -> "DensePolyMulti":
        out: dict = {}
        for mono, c in self.terms.items():
            if mono[i]:
                m = list(mono)
                e = m[i]
                m[i] = e - 1
                key = tuple(m)
                out[key] = out.get(key, Fraction(0)) + c * e
        return DensePolyMulti(self.nvars, out)

    def subst(self, args: Sequence["DensePolyMulti"]) -> "DensePolyMulti":
        """Substitute a polynomial for every variable."""
        assert len(args) == self.nvars
        nv = args[0].nvars
        acc = DensePolyMulti(nv)
        for mono, c in self.terms.items():
            term = DensePolyMulti.constant(c, nv)
            for arg, e in zip(args, mono):
                if e:
                    term = term * arg ** e
            acc = acc + term
        return acc

    def total_degree(self) -> int:
        if not self.terms:
            return -1
        return max(sum(m) for m in self.terms)

    def degree_in(self, i: int) -> int:
        if not self.terms:
            return -1
        return max(m[i] for m in self.terms)

    def coefficient(self, mono: Sequence[int]) -> Fraction:
        return self.terms.get(tuple(mono), Fraction(0))

    def leading_item(self):
        """The (monomial, coefficient) pair that is lexicographically first."""
        if not self.terms:
            return None
        mono = min(self.terms)
        return mono, self.terms[mono]

    def __repr__(self):
        items = sorted(self.terms.items())
        return f"DensePolyMulti({self.nvars}, {items!r})"


def dense_ring_ops(nvars: int) -> RingOps:
    """RingOps adapter so programs can be evaluated into dense polynomials."""
    zero = DensePolyMulti(nvars)
    one = DensePolyMulti.constant(1, nvars)
    return RingOps(
        zero=zero,
        one=one,
        add=lambda a, b: a + b,
        sub=lambda a, b: a - b,
        mul=lambda a, b: a * b,
        cadd=lambda c, a: a + DensePolyMulti.constant(c, nvars),
        cmul=lambda c, a: a * c,
    )


def chow_points(points: Sequence[Sequence[Fraction]]) -> DensePolyMulti:
    """Chow form of a finite point set in projective n-space.

    ``points`` holds projective coordinate vectors of length n+1.  The
    result is the product of the linear forms <U, point> in the n+1
    variables U_0..U_n, scaled so the coefficient of U_0^D equals 1.
    Raises ValueError when that coefficient vanishes (some point lies in
    the hyperplane x_0 = 0).
    """
    if not points:
        raise ValueError("need at least one point")
    nv = len(points[0])
    acc = DensePolyMulti.constant(1, nv)
    for pt in points:
        form = DensePolyMulti(
            nv,
            {tuple(1 if j == i else 0 for j in range(nv)): Fraction(c) for i, c in enumerate(pt)},
        )
        acc = acc * form
    d = len(points)
    lead = acc.coefficient([d] + [0] * (nv - 1))
    if lead == 0:
        raise ValueError("point set touches the hyperplane x_0 = 0")
    return acc * (1 / lead)


def chow_hypersurface(f: DensePolyMulti) -> DensePolyMulti:
    """Chow form of the hypersurface V(f) in P^n, f homogeneous in n+1 vars.

    With U_0..U_{n-1} the groups of n+1 variables each, stacked into an
    n x (n+1) matrix, the Chow form is f evaluated at the signed maximal
    minors (M_0, -M_1, ..., (-1)^n M_n).
    """
    nv = f.nvars
    n = nv - 1
    total = n * (n + 1)
    minors = []
    for j in range(nv):
        cols = [c for c in range(nv) if c != j]
        minor = _symbolic_det(n, cols, total)
        if j % 2 == 1:
            minor = -minor
        minors.append(minor)
    return f.subst(minors)


def _symbolic_det(n: int, cols: Sequence[int], total_vars: int) -> DensePolyMulti:
    """Determinant of the n x n matrix with entry (i, j) = U_{i, cols[j]}."""
    if n == 0:
        return DensePolyMulti.constant(1, total_vars)
    acc = DensePolyMulti(total_vars)
    for perm, sign in _permutations_signed(list(range(n))):
        term = DensePolyMulti.constant(sign, total_vars)
        for i in range(n):
            var = i * (n + 1) + cols[perm[i]]
            term = term * DensePolyMulti.variable(var, total_vars)
        acc = acc + term
    return acc


def _permutations_signed(items: list):
    import itertools

    for perm in itertools.permutations(items):
        inversions = sum(
            1
            for i in range(len(perm))
            for j in range(i + 1, len(perm))
            if perm[i] > perm[j]
        )
        yield list(perm), 1 if inversions % 2 == 0 else -1


def sylvester_resultant(f: Sequence[Fraction], g: Sequence[Fraction], df: int, dg: int) -> Fraction:
    """Resultant of two univariate polynomials by Sylvester determinant.

    Coefficients ascending, degree bounds explicit.  The block of g-rows
    comes first, so res(t - a, t - b) = b - a.
    """
    fp = UniPoly(list(f) + [Fraction(0)] * (df + 1 - len(f)))
    gp = UniPoly(list(g) + [Fraction(0)] * (dg + 1 - len(g)))
    s = sylvester_matrix(gp, fp, dg, df)
    return s.det()


def equal_mod_scalar(p: DensePolyMulti, q: DensePolyMulti):
    """Decide whether p = c * q for some nonzero rational c.

    Returns (True, c) or (False, None).  Two zero polynomials compare
    equal with c = 1.
    """
    if p.is_zero() and q.is_zero():
        return True, Fraction(1)
    if p.is_zero() or q.is_zero():
        return False, None
    lp = p.leading_item()
    lq = q.leading_item()
    if lp[0] != lq[0]:
        return False, None
    c = lp[1] / lq[1]
    if p == q * c:
        return True, c
    return False, None
