"""Chow forms rebuilt from fiber data.

The central object is the Chow form of an equidimensional projective
variety V of dimension r inside P^n: the multihomogeneous polynomial
F_V(U_0, ..., U_r) vanishing exactly on those tuples of r + 1
hyperplanes that have a common point on V.  Programs for Chow forms use
a frozen group-major variable layout, U_00 ... U_0n, U_10 ... U_rn, so
input i*(n+1) + k holds coefficient k of the i-th linear form.

Everything assumes coordinates placed so that V meets the linear space
x_1 = ... = x_r = 0 in exactly deg V points, all inside the affine
chart x_0 != 0.  In that position the value Ch_V(e_0, ..., e_r) is
nonzero, and dividing by it fixes the scalar; the central fiber is a
zero-dimensional set that a GeometricResolution describes exactly.

The main entry point, chow_from_fiber, recovers the full Chow form
from such a resolution plus local equations of V.  It approximates the
norms of the coordinates x_1, ..., x_r and of the generic forms
L_0, ..., L_r by symbolic Newton lifting, reads the Chow form off the
graded pieces of their quotient, and renormalizes once at the end, so
intermediate sign conventions never matter.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from math import comb
from typing import Sequence

from .exact_arith import Matrix, Scalar, UniPoly, berkowitz_det, ext_resultant
from .lifting import LiftingInput, norm_approx
from .slp import (
    DIV,
    Builder,
    Slp,
    eval_many,
    evaluate,
    graded_parts,
    gradient,
    node_ring,
    parse,
    serialize,
    simplify,
    simplify_many,
)
from .slp_division import ProbabilisticFailure, polynomial_division, power_series_quotient


def slot(n: int, i: int, k: int) -> int:
    """Input index of U_ik in the group-major layout."""
    return i * (n + 1) + k


def monomial_exponents(n: int, d: int) -> list[tuple[int, ...]]:
    """Exponent tuples of the degree-d monomials in x_0 ... x_n.

    Listed in decreasing lexicographic order, so x_0^d comes first.
    This fixes the coefficient layout of every degree-d block used by
    generalized forms and by the resultant builders.
    """
    out: list[tuple[int, ...]] = []

    def rec(prefix: tuple[int, ...], remaining: int, slots: int):
        if slots == 1:
            out.append(prefix + (remaining,))
            return
        for a in range(remaining, -1, -1):
            rec(prefix + (a,), remaining - a, slots - 1)

    rec((), d, n + 1)
    return out


def _kind_degree(kind: str) -> int | None:
    """None for the standard kind, the degree d for "gen:d"."""
    if kind == "standard":
        return None
    if kind.startswith("gen:"):
        try:
            d = int(kind[4:])
        except ValueError:
            d = 0
        if d >= 1:
            return d
    raise ValueError(f"unrecognized Chow form kind {kind!r}")


def chow_arity(n: int, r: int, kind: str = "standard") -> int:
    d = _kind_degree(kind)
    if d is None:
        return (r + 1) * (n + 1)
    return r * (n + 1) + comb(n + d, n)


def normalization_point(n: int, r: int, kind: str = "standard") -> list[Fraction]:
    """The point whose value 1 defines the normalized scaling.

    Standard kind: group i at e_i, the forms x_0, x_1, ..., x_r.  For
    "gen:d" the last block holds a degree-d form instead and is set to
    the coefficient vector of x_r^d.
    """
    d = _kind_degree(kind)
    point = [Fraction(0)] * chow_arity(n, r, kind)
    linear = r + 1 if d is None else r
    for i in range(linear):
        point[slot(n, i, i)] = Fraction(1)
    if d is not None:
        target = tuple(d if j == r else 0 for j in range(n + 1))
        point[r * (n + 1) + monomial_exponents(n, d).index(target)] = Fraction(1)
    return point


@dataclass
class ChowForm:
    """A program for a Chow form, with its shape data.

    ``kind`` is "standard" for the usual form in r + 1 linear groups,
    or "gen:d" when the last group is replaced by the coefficients of a
    generic degree-d form (layout per monomial_exponents).  When
    ``normalized`` is set the construction verifies that the program
    evaluates to exactly 1 at the normalization point.
    """

    prog: Slp
    r: int
    n: int
    D: int
    kind: str = "standard"
    normalized: bool = True

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.r <= self.n:
            raise ValueError("need 0 <= r <= n and n >= 1")
        if self.D < 0:
            raise ValueError("degree must be nonnegative")
        if DIV in self.prog.ops:
            raise ValueError("Chow form programs must be division-free")
        want = chow_arity(self.n, self.r, self.kind)
        if self.prog.arity != want:
            raise ValueError(
                f"program has {self.prog.arity} inputs, expected {want} "
                f"for n={self.n} r={self.r} kind={self.kind}"
            )
        if self.normalized:
            value = evaluate(self.prog, normalization_point(self.n, self.r, self.kind))
            if value != 1:
                raise ValueError(f"normalization value is {value}, not 1")


@dataclass
class CharPoly:
    """Characteristic polynomial attached to a Chow form.

    ``prog`` takes the U groups followed by T_0 ... T_r; it computes
    (-1)^D Ch(U with U_i0 shifted by T_i), which has degree D in T_0.
    ``leading`` is its T_0^D coefficient, the program of
    Ch(e_0, U_1, ..., U_r) in the U inputs alone.
    """

    prog: Slp
    leading: Slp
    r: int
    n: int
    D: int

    def __post_init__(self):
        a = (self.r + 1) * (self.n + 1)
        if self.prog.arity != a + self.r + 1:
            raise ValueError("characteristic program must take the U and T inputs")
        if self.leading.arity != a:
            raise ValueError("leading coefficient program must take the U inputs")


@dataclass
class GeometricResolution:
    """Description of a fiber (or family of fibers) by a primitive form.

    ``ell`` holds the n + 1 coefficients of the affine form.  In the
    scalar flavor ``p`` is the monic minimal polynomial of that form on
    a zero-dimensional set and ``v`` gives the points directly:
    coordinate i equals v_i(eta) at each root eta of p.

    In the parametric flavor (a family over base coordinates
    y_1 ... y_r) ``p`` is a tuple of coefficient programs in r inputs,
    ascending powers with the top one identically 1, and each entry of
    ``v`` is a tuple of coefficient programs for w_i = p' * x_i mod p,
    the parametrization with the derivative denominator: coordinate i
    equals w_i(eta) / p'(eta).  Coefficient tuples longer than deg p
    are accepted and reduced by consumers.
    """

    ell: Sequence[Scalar]
    p: UniPoly | Sequence[Slp]
    v: Sequence[UniPoly] | Sequence[Sequence[Slp]]

    def __post_init__(self):
        self.ell = tuple(Fraction(c) for c in self.ell)
        n = len(self.v)
        if len(self.ell) != n + 1:
            raise ValueError("the primitive form needs one coefficient per coordinate plus one")
        if isinstance(self.p, UniPoly):
            self.v = tuple(self.v)
            big_d = self.p.degree
            if big_d < 0 or self.p.coeff(max(big_d, 0)) != 1:
                raise ValueError("minimal polynomial must be monic")
            for w in self.v:
                if not isinstance(w, UniPoly):
                    raise ValueError("scalar flavor needs UniPoly coordinates")
                if w.degree >= max(big_d, 1) or (big_d == 0 and not w.is_zero()):
                    raise ValueError("coordinate polynomials must have degree < deg p")
            if big_d >= 2:
                rho, _, _ = ext_resultant(self.p, self.p.derivative(), big_d, big_d - 1)
                if rho == 0:
                    raise ValueError("the primitive form does not separate the fiber points")
        else:
            self.p = tuple(self.p)
            self.v = tuple(tuple(w) for w in self.v)
            if len(self.p) < 2:
                raise ValueError("parametric flavor needs degree at least one")
            r = self.p[0].arity
            if r < 1:
                raise ValueError("parametric flavor needs at least one base coordinate")
            big_d = len(self.p) - 1
            for c in self.p:
                if c.arity != r or DIV in c.ops:
                    raise ValueError("coefficient programs must share the base arity, without division")
            for w in self.v:
                if len(w) > 2 * big_d + 1:
                    raise ValueError("coordinate coefficient tuples are longer than any reduction of degree < 2 deg p")
                for c in w:
                    if c.arity != r or DIV in c.ops:
                        raise ValueError("coefficient programs must share the base arity, without division")
            if evaluate(self.p[-1], [Fraction(0)] * r) != 1:
                raise ValueError("the top coefficient program must be 1 at the base origin")


def unit_chow(n: int, r: int) -> ChowForm:
    """The Chow form of the empty variety: the constant 1."""
    b = Builder((r + 1) * (n + 1))
    return ChowForm(b.finish(b.one()), r=r, n=n, D=0)


def _interpolate(values: Sequence[Scalar]) -> UniPoly:
    """The polynomial of degree < len(values) through (i, values[i])."""
    m = len(values)
    rows = [[Fraction(i) ** k for k in range(m)] for i in range(m)]
    return UniPoly(Matrix(rows).solve([Fraction(x) for x in values]))


def group_degree(prog: Slp, n: int, group: int, bound: int, rng) -> int:
    """Degree of prog in one (n+1)-variable block, by scaling a probe point.

    Draws a random point, multiplies the block by t = 0 ... bound and
    interpolates the values.  Returns the top nonzero index, -1 when
    every sample vanishes.
    """
    span = 8 * (bound + 1) * (prog.arity + 1)
    point = [Fraction(rng.randrange(span)) for _ in range(prog.arity)]
    lo = group * (n + 1)
    values = []
    for t in range(bound + 1):
        pt = list(point)
        for k in range(lo, lo + n + 1):
            pt[k] = point[k] * t
        values.append(evaluate(prog, pt))
    return _interpolate(values).degree


def _power_ref(b: Builder, base: int, e: int) -> int:
    """Square-and-multiply power of a node reference, e >= 1."""
    result = None
    sq = base
    while e:
        if e & 1:
            result = sq if result is None else b.mul(result, sq)
        e >>= 1
        if e:
            sq = b.mul(sq, sq)
    return result


def _stage_system(n: int, r: int, i: int, f_local: Sequence[Slp], extra: int) -> list[Slp]:
    """The n-equation local system of lifting stage i.

    Parameters come first: i blocks of n + 1 recentered form
    coefficients, plus ``extra`` further inputs that the equations do
    not use (the raw block reserved for the stage's own form).  The
    equations are the recentered forms t_j0 + sum_k t_jk x_k + x_{j+1}
    for j < i, then the plain coordinates x_{i+1}, ..., x_r, then the
    local equations of the variety.
    """
    params = i * (n + 1) + extra
    b = Builder(params + n, fold=True)
    ring = node_ring(b)
    x = [b.input(params + k) for k in range(n)]
    refs = []
    for j in range(i):
        base = j * (n + 1)
        acc = b.input(base)
        for k in range(1, n + 1):
            acc = b.add(acc, b.mul(b.input(base + k), x[k - 1]))
        acc = b.add(acc, x[j])
        refs.append(acc)
    for k in range(i + 1, r + 1):
        refs.append(x[k - 1])
    for f in f_local:
        val = evaluate(f, x, ring)
        refs.append(val if val is not None else b.zero())
    return b.finish_many(refs)


def _coordinate_prog(params: int, n: int, i: int) -> Slp:
    """The program x_i in params + n inputs."""
    b = Builder(params + n)
    return b.finish(b.input(params + i - 1))


def _linear_form_prog(params: int, n: int) -> Slp:
    """U_0' + sum_k U_k' x_k, with the form's block as the last n + 1 parameters."""
    b = Builder(params + n)
    base = params - (n + 1)
    acc = b.input(base)
    for k in range(1, n + 1):
        acc = b.add(acc, b.mul(b.input(base + k), b.input(params + k - 1)))
    return b.finish(acc)


def _stage_point(b: Builder, n: int, i: int, raw_block: bool) -> list[int]:
    """Where stage-i parameters sit inside the full U layout.

    Recentered blocks j < i substitute t_jk = U_jk - 1 at k = j + 1 and
    t_jk = U_jk elsewhere; the raw block, when present, passes the
    U_i coefficients through unchanged.
    """
    pt = []
    for j in range(i):
        for k in range(n + 1):
            ref = b.input(slot(n, j, k))
            pt.append(b.cadd(Fraction(-1), ref) if k == j + 1 else ref)
    if raw_block:
        pt.extend(b.input(slot(n, i, k)) for k in range(n + 1))
    return pt


def _product(b: Builder, refs: Sequence[int]) -> int:
    acc = None
    for ref in refs:
        acc = ref if acc is None else b.mul(acc, ref)
    return acc if acc is not None else b.one()


def chow_from_fiber(
    n: int,
    r: int,
    D: int,
    res: GeometricResolution,
    f_local: Sequence[Slp],
    d: int,
) -> ChowForm:
    """Normalized Chow form of V from a resolution of its central fiber.

    ``res`` must describe V intersected with x_1 = ... = x_r = 0 in the
    scalar flavor, with exactly D points.  ``f_local`` gives the n - r
    local equations of V at those points (each an n-input program in
    the affine coordinates, degree at most d) with invertible Jacobian
    together with the coordinate functions.  D = 0 yields the constant
    form of the empty variety.

    The computation is deterministic.  For each i it approximates the
    norm of x_i (i = 1 ... r) and of the generic form L_i (i = 0 ... r)
    over the fiber lifted against stage-specific parameter blocks, all
    to precision (2r+1) D.  The graded parts of the quotient of the two
    products, taken between orders rD and (2r+1) D around the centered
    base point, determine the Chow form after one exact polynomial
    division and a final renormalization.
    """
    if not 0 <= r <= n:
        raise ValueError("need 0 <= r <= n")
    if D < 0:
        raise ValueError("degree must be nonnegative")
    if D == 0:
        return unit_chow(n, r)
    f_local = list(f_local)
    if len(f_local) != n - r:
        raise ValueError(f"expected {n - r} local equations, got {len(f_local)}")
    for f in f_local:
        if f.arity != n:
            raise ValueError("local equations must take the n affine coordinates")
    if not isinstance(res.p, UniPoly):
        raise ValueError("the central fiber needs the scalar resolution flavor")
    p: UniPoly = res.p
    if p.degree != D:
        raise ValueError(f"fiber has {p.degree} points, expected degree {D}")
    rho, _, _ = ext_resultant(p, p.derivative(), D, max(D - 1, 0)) if D >= 1 else (Fraction(1), 0, 0)
    if rho == 0:
        raise ValueError("the fiber resolution does not separate the points")
    v: tuple[UniPoly, ...] = res.v
    for j in range(r):
        if not v[j].is_zero():
            raise ValueError("the fiber must lie inside x_1 = ... = x_r = 0")

    dd = max(int(d), 1)
    kappa = (2 * r + 1) * D
    arity = (r + 1) * (n + 1)

    b = Builder(arity, fold=True)
    ring = node_ring(b)
    phi_pairs = []
    psi_pairs = []
    for i in range(r + 1):
        if i >= 1:
            params = i * (n + 1)
            system = _stage_system(n, r, i, f_local, extra=0)
            inp = LiftingInput(system, p, v, dd, n, params)
            fg = norm_approx(_coordinate_prog(params, n, i), 1, inp, kappa)
            point = _stage_point(b, n, i, raw_block=False)
            fr, gr = eval_many(list(fg), point, ring)
            phi_pairs.append((fr if fr is not None else b.zero(), gr if gr is not None else b.zero()))
        params = (i + 1) * (n + 1)
        system = _stage_system(n, r, i, f_local, extra=n + 1)
        inp = LiftingInput(system, p, v, dd, n, params)
        fg = norm_approx(_linear_form_prog(params, n), 1, inp, kappa)
        point = _stage_point(b, n, i, raw_block=True)
        fr, gr = eval_many(list(fg), point, ring)
        psi_pairs.append((fr if fr is not None else b.zero(), gr if gr is not None else b.zero()))

    progs = simplify_many(
        b.finish_many(
            [
                _product(b, [f for f, _ in phi_pairs]),
                _product(b, [g for _, g in phi_pairs]),
                _product(b, [f for f, _ in psi_pairs]),
                _product(b, [g for _, g in psi_pairs]),
            ]
        )
    )
    center = [Fraction(0)] * arity
    for j in range(r):
        center[slot(n, j, j + 1)] = Fraction(1)
    phi_parts = graded_parts(progs[0], progs[1], kappa, center)
    psi_parts = graded_parts(progs[2], progs[3], kappa, center)

    low = r * D
    total = (r + 1) * D
    window = simplify_many(list(phi_parts[low:]) + list(psi_parts[low:]))
    phi_win = window[: total + 1]
    psi_win = window[total + 1 :]
    quot = power_series_quotient(arity, low, total, phi_win, psi_win)

    bp = Builder(arity, fold=True)
    phipow = bp.finish(_power_ref(bp, bp.absorb(phi_win[0]), total + 1))
    base = [Fraction(0)] * arity
    for j in range(r + 1):
        base[slot(n, j, 0)] = Fraction(1)
    raw = simplify(polynomial_division(phipow, quot, total, base))

    value = evaluate(raw, normalization_point(n, r))
    if value == 0:
        raise ValueError("normalization value vanished; the position assumptions fail")
    if value == 1:
        final = raw
    else:
        bn = Builder(arity)
        final = bn.finish(bn.cmul(Fraction(1) / value, bn.absorb(raw)))
    return ChowForm(final, r=r, n=n, D=D)


def char_poly_from_chow(ch: ChowForm) -> CharPoly:
    """(-1)^D Ch with every U_i0 shifted by a fresh variable T_i."""
    if ch.kind != "standard":
        raise ValueError("characteristic polynomials are defined for the standard kind")
    n, r = ch.n, ch.r
    arity = (r + 1) * (n + 1)
    b = Builder(arity + r + 1, fold=True)
    point = []
    for i in range(r + 1):
        for k in range(n + 1):
            ref = b.input(slot(n, i, k))
            point.append(b.sub(ref, b.input(arity + i)) if k == 0 else ref)
    val = evaluate(ch.prog, point, node_ring(b))
    if val is None:
        val = b.zero()
    if ch.D % 2:
        val = b.neg(val)
    prog = b.finish(val)

    ba = Builder(arity, fold=True)
    apt: list[int | None] = [ba.one()] + [None] * n
    apt += [ba.input(j) for j in range(n + 1, arity)]
    aval = evaluate(ch.prog, apt, node_ring(ba))
    leading = ba.finish(aval if aval is not None else ba.zero())
    return CharPoly(prog, leading=leading, r=r, n=n, D=ch.D)


def generic_resolution(ch: ChowForm):
    """Resolution of V over the field of U coefficients, with divisions.

    Returns (P, [W_1, ..., W_n]) as programs in the U inputs plus one
    trailing input T_0.  P is the monic degree-D polynomial in T_0 that
    vanishes at T_0 = L_0(U_0, xi) for xi in the fiber cut out by
    L_1, ..., L_r, and the W_i satisfy p'(l_0) x_i = W_i(l_0) on that
    fiber: both are quotients by the leading coefficient a_D.
    """
    if ch.kind != "standard":
        raise ValueError("generic resolutions are defined for the standard kind")
    n, r = ch.n, ch.r
    arity = (r + 1) * (n + 1)

    bp = Builder(arity + 1, fold=True)
    point = [bp.input(j) for j in range(arity)]
    point[0] = bp.sub(bp.input(0), bp.input(arity))
    val = evaluate(ch.prog, point, node_ring(bp))
    if val is None:
        val = bp.zero()
    if ch.D % 2:
        val = bp.neg(val)
    pv = bp.finish(val)
    grads = gradient(pv)

    bd = Builder(arity + 1, allow_div=True, fold=True)
    ring = node_ring(bd)
    apt: list[int | None] = [bd.one()] + [None] * n
    apt += [bd.input(j) for j in range(n + 1, arity)]
    aref = evaluate(ch.prog, apt, ring)
    if aref is None:
        raise ValueError("the leading coefficient vanished structurally")
    identity = [bd.input(j) for j in range(arity + 1)]
    pref = evaluate(pv, identity, ring)
    grefs = eval_many([grads[k] for k in range(1, n + 1)], identity, ring)
    p_out = bd.div(pref if pref is not None else bd.zero(), aref)
    w_out = [
        bd.div(bd.neg(g) if g is not None else bd.zero(), aref)
        for g in grefs
    ]
    progs = bd.finish_many([p_out] + w_out)
    return progs[0], list(progs[1:])


def geom_res_fiber(
    n: int,
    r: int,
    D: int,
    ch: ChowForm,
    xi: Sequence[Scalar],
    c0: Sequence[Scalar],
):
    """Resolution of the fiber of V over xi, by the candidate form c0.

    Specializes the characteristic polynomial of ch numerically: group
    0 becomes (c0_0 - t, c0_1, ..., c0_n) and group j the form
    x_j - xi_j x_0, sampled at t = 0 ... D and interpolated.  Returns
    (D0, resolution) where D0 is the detected fiber degree.  Raises
    ProbabilisticFailure when the samples all vanish or when c0 fails
    to separate the fiber points, both retryable with fresh randomness.
    """
    if ch.kind != "standard" or ch.n != n or ch.r != r:
        raise ValueError("the Chow form does not match the requested shape")
    if ch.D != D:
        raise ValueError("the declared degree does not match the Chow form")
    if not ch.normalized:
        raise ValueError("the fiber construction needs a normalized Chow form")
    if len(xi) != r or len(c0) != n + 1:
        raise ValueError("base point needs r coordinates and the form n + 1")
    arity = (r + 1) * (n + 1)
    sign = Fraction(-1 if D % 2 else 1)

    grads = gradient(ch.prog)
    samples: list[Fraction] = []
    gsamples: list[list[Fraction]] = [[] for _ in range(n)]
    for t in range(D + 1):
        pt = [Fraction(0)] * arity
        pt[0] = Fraction(c0[0]) - t
        for k in range(1, n + 1):
            pt[k] = Fraction(c0[k])
        for j in range(1, r + 1):
            pt[slot(n, j, 0)] = -Fraction(xi[j - 1])
            pt[slot(n, j, j)] = Fraction(1)
        samples.append(sign * evaluate(ch.prog, pt))
        gv = eval_many([grads[k] for k in range(1, n + 1)], pt)
        for i in range(n):
            gsamples[i].append(sign * gv[i])

    p_full = _interpolate(samples)
    if p_full.is_zero():
        raise ProbabilisticFailure("the specialized characteristic polynomial vanished")
    d0 = p_full.degree
    ell = tuple(Fraction(c) for c in c0)
    if d0 == 0:
        return 0, GeometricResolution(ell=ell, p=UniPoly.constant(1), v=(UniPoly(),) * n)
    lam = p_full.coeff(d0)
    p = p_full.monic()
    rho, _, q2 = ext_resultant(p, p.derivative(), d0, d0 - 1)
    if rho == 0:
        raise ProbabilisticFailure("the candidate form does not separate the fiber")
    scale = UniPoly.constant(Fraction(-1) / (lam * rho))
    v = tuple((q2 * _interpolate(gsamples[i]) * scale) % p for i in range(n))
    return d0, GeometricResolution(ell=ell, p=p, v=v)


def _reduce_coeff_refs(ring, pref, urefs, big_d):
    """Reduce node-coefficient lists modulo the monic p given by pref."""
    out = list(urefs)
    for j in range(len(out) - 1, big_d - 1, -1):
        top = out[j]
        del out[j]
        if top is None:
            continue
        for i in range(big_d):
            out[j - big_d + i] = ring.sub(out[j - big_d + i], ring.mul(top, pref[i]))
    out.extend([None] * (big_d - len(out)))
    return out


def _mult_rows_nodes(ring, pref, u, big_d):
    """Multiplication-by-u matrix on the power basis, coefficients as nodes."""
    cols = [list(u)]
    for _ in range(big_d - 1):
        prev = cols[-1]
        top = prev[-1]
        col = [None] + prev[: big_d - 1]
        if top is not None:
            for i in range(big_d):
                col[i] = ring.sub(col[i], ring.mul(top, pref[i]))
        cols.append(col)
    return [[cols[j][i] for j in range(big_d)] for i in range(big_d)]


def chow_from_geomres(n: int, r: int, res: GeometricResolution, rng) -> ChowForm:
    """Normalized Chow form from a resolution of V by (l_0, x_1, ..., x_r).

    For r >= 1 the parametric flavor is required; r = 0 takes the
    scalar flavor and converts the direct parametrization into the
    derivative convention.  The missing local equations are built as
    minimal polynomials of n - r random affine forms: each one arises
    as the determinant of t S - B_i, with S multiplication by p' and
    B_i multiplication by the form's numerator, divided exactly by
    det S.  Separation failures raise ProbabilisticFailure; retry with
    fresh randomness.
    """
    if r == 0:
        if not isinstance(res.p, UniPoly):
            raise ValueError("dimension zero takes the scalar flavor")
        p0: UniPoly = res.p
        big_d = p0.degree
        if big_d == 0:
            return unit_chow(n, 0)
        dp0 = p0.derivative()
        w0 = [(w * dp0) % p0 for w in res.v]
    else:
        if isinstance(res.p, UniPoly):
            raise ValueError("positive dimension needs the parametric flavor")
        if res.p[0].arity != r:
            raise ValueError("the family base does not match r")
        big_d = len(res.p) - 1
        origin = [Fraction(0)] * r
        p0 = UniPoly([evaluate(c, origin) for c in res.p])
        if p0.degree != big_d or p0.coeff(big_d) != 1:
            raise ValueError("the coefficient family is not monic over the base origin")
        w0 = [UniPoly([evaluate(c, origin) for c in w]) % p0 for w in res.v]

    rho, _, q2 = ext_resultant(p0, p0.derivative(), big_d, big_d - 1)
    if rho == 0:
        raise ProbabilisticFailure("the primitive form does not separate the central fiber")
    scale = UniPoly.constant(Fraction(1) / rho)
    v0 = tuple((q2 * w * scale) % p0 for w in w0)
    res0 = GeometricResolution(ell=res.ell, p=p0, v=v0)
    if r == n:
        return chow_from_fiber(n, r, big_d, res0, [], max(big_d, 1))

    span = 8 * n * big_d * big_d
    forms = [[Fraction(rng.randrange(span)) for _ in range(n + 1)] for _ in range(n - r)]

    bt = Builder(r + 1, fold=True)
    ring = node_ring(bt)
    if r == 0:
        pref = [bt.constant(p0.coeff(k)) if p0.coeff(k) != 0 else None for k in range(big_d + 1)]
        wrefs = [
            [bt.constant(w.coeff(k)) if w.coeff(k) != 0 else None for k in range(big_d)]
            for w in w0
        ]
    else:
        ypt = [bt.input(j) for j in range(r)]
        pref = [evaluate(c, ypt, ring) for c in res.p]
        wrefs = [
            _reduce_coeff_refs(ring, pref, [evaluate(c, ypt, ring) for c in w], big_d)
            for w in res.v
        ]
    dpref = [ring.cmul(k + 1, pref[k + 1]) for k in range(big_d)]
    rows_s = _mult_rows_nodes(ring, pref, dpref, big_d)
    det_s = berkowitz_det(rows_s, ring)
    t_ref = bt.input(r)
    dets = []
    for c in forms:
        arefs = []
        for j in range(big_d):
            acc = ring.cmul(c[0], dpref[j])
            for k in range(1, n + 1):
                acc = ring.add(acc, ring.cmul(c[k], wrefs[k - 1][j]))
            arefs.append(acc)
        rows_b = _mult_rows_nodes(ring, pref, arefs, big_d)
        pencil = [
            [ring.sub(ring.mul(rows_s[a][b], t_ref), rows_b[a][b]) for b in range(big_d)]
            for a in range(big_d)
        ]
        dets.append(berkowitz_det(pencil, ring))
    finished = bt.finish_many(
        [x if x is not None else bt.zero() for x in dets]
        + [det_s if det_s is not None else bt.zero()]
    )

    bx = Builder(n, fold=True)
    rx = node_ring(bx)
    xin = [bx.input(j) for j in range(n)]
    outs = []
    for c, h in zip(forms, finished[:-1]):
        acc = bx.constant(c[0])
        for k in range(1, n + 1):
            if c[k] != 0:
                acc = bx.add(acc, bx.cmul(c[k], xin[k - 1]))
        val = evaluate(h, xin[:r] + [acc], rx)
        outs.append(val if val is not None else bx.zero())
    dval = evaluate(finished[-1], xin[:r] + [bx.zero()], rx)
    spliced = bx.finish_many(outs + [dval if dval is not None else bx.zero()])

    origin_n = [Fraction(0)] * n
    try:
        f_local = [
            polynomial_division(spliced[-1], h, big_d, origin_n) for h in spliced[:-1]
        ]
        return chow_from_fiber(n, r, big_d, res0, f_local, max(big_d, 1))
    except ValueError as exc:
        raise ProbabilisticFailure(f"random affine forms failed: {exc}") from exc


_CHOW_HEADER = re.compile(
    r"#\s*chow\s+n=(\d+)\s+r=(\d+)\s+D=(\d+)\s+kind=(standard|gen:\d+)\s*$"
)


def serialize_chow(ch: ChowForm) -> str:
    head = f"# chow n={ch.n} r={ch.r} D={ch.D} kind={ch.kind}\n"
    return head + serialize(ch.prog)


def parse_chow(text: str) -> ChowForm:
    """Read a Chow form file: a header comment line plus a program.

    Every comment line is skipped; the first one matching the header
    shape supplies the dimensions.  The normalized flag is not stored;
    it is re-derived by one evaluation at the normalization point.
    """
    header = None
    body = []
    for line in text.splitlines():
        stripped = line.strip()
        if stripped.startswith("#"):
            if header is None:
                m = _CHOW_HEADER.match(stripped)
                if m:
                    header = m
            continue
        if stripped:
            body.append(line)
    if header is None:
        raise ValueError("missing chow header line")
    n, r, big_d = int(header.group(1)), int(header.group(2)), int(header.group(3))
    kind = header.group(4)
    prog = parse("\n".join(body) + "\n")
    value = evaluate(prog, normalization_point(n, r, kind))
    return ChowForm(prog, r=r, n=n, D=big_d, kind=kind, normalized=value == 1)
