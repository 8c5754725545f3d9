"""Symbolic Newton lifting over a parameter base.

A square local system F(t, x) = 0 (n equations, n dependent variables
x_1..x_n, r parameters t_1..t_r) whose fiber at t = 0 is described by a
geometric resolution (p, v) can be lifted: the implicit branches
x(t) with x(0) ranging over the fiber points are approximated by the
iterated Newton operator.  This module builds straight-line programs
for the iterate written over a single denominator, and for truncated
norms (products of a polynomial over all lifted branches), which is the
form in which the lifting gets consumed downstream.

Programs here take their inputs in the order t_1 .. t_r, x_1 .. x_n.
Homogenized intermediates insert one extra variable x_0 between the two
blocks.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .exact_arith import RingOps, UniPoly, berkowitz_adjugate, berkowitz_charpoly, berkowitz_det
from .slp import DIV, Builder, Slp, _expand_into, eval_many, evaluate, gradient, node_ring, simplify_many


def _unipoly_mod_ring(p: UniPoly) -> RingOps:
    """Arithmetic of UniPoly values reduced modulo p after products."""
    return RingOps(
        zero=UniPoly(),
        one=UniPoly.constant(1),
        add=lambda u, w: u + w,
        sub=lambda u, w: u - w,
        mul=lambda u, w: (u * w) % p,
        cadd=lambda c, u: u + UniPoly.constant(c),
        cmul=lambda c, u: u * Fraction(c),
    )


@dataclass
class LiftingInput:
    """A local system together with a resolution of its special fiber.

    ``f_sys`` holds n division-free programs in r + n inputs (parameters
    first).  ``p`` is the monic minimal polynomial of a primitive
    element of the fiber at t = 0 and ``v`` parametrizes the fiber
    coordinates: the points are (v_1(eta), ..., v_n(eta)) for eta a root
    of p.  ``d`` bounds the degrees of the system's polynomials.

    Construction checks that the Jacobian determinant of the system
    with respect to x is invertible along the fiber, i.e. nonzero as a
    polynomial in eta modulo p; everything later relies on that.
    """

    f_sys: Sequence[Slp]
    p: UniPoly
    v: Sequence[UniPoly]
    d: int
    n: int
    r: int

    def __post_init__(self):
        self.f_sys = tuple(self.f_sys)
        self.v = tuple(self.v)
        n, r = self.n, self.r
        if n < 1 or r < 1:
            raise ValueError("need at least one equation and one parameter")
        if self.d < 1:
            raise ValueError("degree bound must be at least 1")
        if len(self.f_sys) != n:
            raise ValueError(f"expected {n} equations, got {len(self.f_sys)}")
        if len(self.v) != n:
            raise ValueError(f"expected {n} coordinate polynomials, got {len(self.v)}")
        for f in self.f_sys:
            if f.arity != r + n:
                raise ValueError("system programs must have r + n inputs")
        if self.p.degree < 1 or self.p.coeffs[-1] != 1:
            raise ValueError("fiber minimal polynomial must be monic of degree >= 1")
        for w in self.v:
            if w.degree >= self.p.degree:
                raise ValueError("coordinate polynomials must have degree < deg p")

        ring = _unipoly_mod_ring(self.p)
        point = [ring.zero] * r + [w % self.p for w in self.v]
        rows = []
        for f in self.f_sys:
            parts = gradient(f)
            rows.append(eval_many(parts[r:], point, ring))
        delta = berkowitz_det(rows, ring)
        if delta.is_zero():
            raise ValueError("Jacobian is singular along the special fiber")


def _newton_step_refs(b: Builder, f_sys: Sequence[Slp], n: int, r: int):
    """Emit one Newton step into ``b``; return (numerators, denominator).

    The step is x - J^{-1} F written over the common denominator
    det(J): numerator i is det(J) x_i - sum_j adj(J)_{ij} F_j.
    """
    ring = node_ring(b)
    f_refs = []
    rows = []
    for f in f_sys:
        f_refs.append(b.absorb(f))
        parts = gradient(f)
        rows.append([b.absorb(parts[r + i]) for i in range(n)])
    adj, char = berkowitz_adjugate(rows, ring)
    det = char[0] if n % 2 == 0 else ring.sub(None, char[0])
    if det is None:
        raise ValueError("Jacobian is structurally singular")
    gs = []
    for i in range(n):
        acc = ring.mul(det, b.input(r + i))
        for j in range(n):
            acc = ring.sub(acc, ring.mul(adj[i][j], f_refs[j]))
        gs.append(acc)
    return gs, det


def _homogenized_step(f_sys: Sequence[Slp], n: int, r: int, d: int) -> list[Slp]:
    """One Newton step, homogenized in the x block to degree n*d + 1.

    Returns n + 1 programs (numerators then denominator) in r + n + 1
    inputs, the extra input x_0 sitting at index r.  Substituting the
    previous iterate's (denominator, numerators) for (x_0, x) composes
    one more step; the common degree makes the quotients agree.
    """
    nu = n * d + 1
    bs = Builder(r + n, fold=True)
    gs, det = _newton_step_refs(bs, f_sys, n, r)
    step = bs.finish_many([g if g is not None else bs.zero() for g in gs] + [det])

    be = Builder(r + n, fold=True)
    center = {r + i: Fraction(0) for i in range(n)}
    part_rows = [_expand_into(be, comp, center, nu) for comp in step]
    live = [ref for row in part_rows for ref in row if ref is not None]
    parts = be.finish_many(live)

    bh = Builder(r + n + 1, fold=True)
    rh = node_ring(bh)
    point = [bh.input(j) for j in range(r)] + [bh.input(r + 1 + i) for i in range(n)]
    values = dict(zip(live, eval_many(parts, point, rh))) if live else {}
    x0 = bh.input(r)
    outs = []
    for row in part_rows:
        acc = None if row[0] is None else values[row[0]]
        for k in range(1, nu + 1):
            part = None if row[k] is None else values[row[k]]
            acc = rh.add(rh.mul(acc, x0), part)
        outs.append(acc if acc is not None else bh.zero())
    return simplify_many(bh.finish_many(outs))


def num_den_newton(f_sys: Sequence[Slp], n: int, r: int, d: int, m: int):
    """Numerators and denominator of the m-fold Newton iterate.

    Returns ``(gs, f0)`` with gs a list of n programs, all in r + n
    inputs, such that the iterate equals (g_1/f0, ..., g_n/f0) as a
    tuple of rational functions.  ``d`` bounds the degrees of the
    system.  m = 0 gives the identity map; for m > 1 the step is
    homogenized to degree n*d + 1 and composed with itself, every
    composition splicing into one shared arena.
    """
    f_sys = list(f_sys)
    if len(f_sys) != n:
        raise ValueError(f"expected {n} equations, got {len(f_sys)}")
    if n < 1 or r < 1:
        raise ValueError("need at least one equation and one parameter")
    if d < 1:
        raise ValueError("degree bound must be at least 1")
    if m < 0:
        raise ValueError("iteration count must be nonnegative")
    for f in f_sys:
        if f.arity != r + n:
            raise ValueError("system programs must have r + n inputs")

    b = Builder(r + n, fold=True)
    if m == 0:
        gs = [b.input(r + i) for i in range(n)]
        f0 = b.one()
    else:
        raw, f0 = _newton_step_refs(b, f_sys, n, r)
        gs = [g if g is not None else b.zero() for g in raw]
        if m > 1:
            hom = _homogenized_step(f_sys, n, r, d)
            ring = node_ring(b)
            params = [b.input(j) for j in range(r)]
            for _ in range(m - 1):
                vals = eval_many(hom, params + [f0] + gs, ring)
                if vals[n] is None:
                    raise ValueError("Newton denominator vanished structurally")
                gs = [v if v is not None else b.zero() for v in vals[:n]]
                f0 = vals[n]
    progs = simplify_many(b.finish_many(gs + [f0]))
    return progs[:n], progs[n]


def _residue_ring(b: Builder, p: UniPoly) -> RingOps:
    """Q[eta]/(p) with node coefficients, as vectors of length deg p.

    Elements are tuples of D = deg p references (None marking zero
    coordinates).  Products convolve and then reduce using the numeric
    images of eta^D, ..., eta^(2D-2), so a multiplication costs O(D^2)
    emitted nodes.
    """
    nr = node_ring(b)
    big_d = p.degree
    red = []
    power = UniPoly([0] * big_d + [1]) % p
    for _ in range(big_d - 1):
        red.append([(i, c) for i, c in enumerate(power.coeffs) if c != 0])
        power = (power * UniPoly.variable()) % p

    zero = (None,) * big_d

    def add(u, w):
        return tuple(nr.add(a, c) for a, c in zip(u, w))

    def sub(u, w):
        return tuple(nr.sub(a, c) for a, c in zip(u, w))

    def mul(u, w):
        conv = [None] * (2 * big_d - 1)
        for i, a in enumerate(u):
            if a is None:
                continue
            for j, c in enumerate(w):
                if c is None:
                    continue
                t = b.mul(a, c)
                conv[i + j] = t if conv[i + j] is None else b.add(conv[i + j], t)
        out = conv[:big_d]
        for e in range(big_d - 1):
            top = conv[big_d + e]
            if top is None:
                continue
            for i, c in red[e]:
                out[i] = nr.add(out[i], nr.cmul(c, top))
        return tuple(out)

    def cadd(c, u):
        if c == 0:
            return u
        return (nr.cadd(c, u[0]),) + tuple(u[1:])

    def cmul(c, u):
        if c == 0:
            return zero
        return tuple(nr.cmul(c, a) for a in u)

    return RingOps(
        zero=zero,
        one=(b.one(),) + (None,) * (big_d - 1),
        add=add,
        sub=sub,
        mul=mul,
        cadd=cadd,
        cmul=cmul,
    )


def _mult_rows(nr: RingOps, p: UniPoly, u):
    """Matrix of multiplication by u on the power basis of Q[eta]/(p)."""
    big_d = p.degree
    cols = [list(u)]
    for _ in range(big_d - 1):
        prev = cols[-1]
        top = prev[-1]
        col = [None] + prev[: big_d - 1]
        if top is not None:
            for i in range(big_d):
                c = p.coeff(i)
                if c != 0:
                    col[i] = nr.add(col[i], nr.cmul(-c, top))
        cols.append(col)
    return [[cols[j][i] for j in range(big_d)] for i in range(big_d)]


def _det_ref(nr: RingOps, rows):
    n = len(rows)
    c0 = berkowitz_charpoly(rows, nr)[0]
    return c0 if n % 2 == 0 else nr.sub(None, c0)


def _pow_ref(nr: RingOps, base: int, e: int):
    result = None
    sq = base
    while e:
        if e & 1:
            result = sq if result is None else nr.mul(result, sq)
        e >>= 1
        if e:
            sq = nr.mul(sq, sq)
    return result


def norm_approx(h: Slp, delta: int, inp: LiftingInput, kappa: int):
    """Truncated norm of h over the lifted fiber, as a quotient.

    Returns programs ``(f, g)`` in the r parameters with f(0) != 0 and
    g/f congruent mod (t)^(kappa+1) to the product of h over the
    branches of the lifted fiber.  ``delta`` bounds the degree of h in
    the x variables.  The construction runs ceil(log2(kappa+1)) Newton
    steps, substitutes the fiber parametrization into the resulting
    numerators and denominator inside Q[eta]/(p), applies the degree-
    delta homogenization of h there, and takes multiplication-operator
    determinants: g from h's value, f as the denominator norm raised to
    delta.

    Raises ValueError when the denominator norm vanishes at t = 0,
    which is the visible symptom of an input violating the lifting
    invariants.
    """
    n, r = inp.n, inp.r
    if h.arity != r + n:
        raise ValueError("h must take the r + n system inputs")
    if DIV in h.ops:
        raise ValueError("h must be division-free")
    if delta < 0:
        raise ValueError("degree bound of h must be nonnegative")
    if kappa < 0:
        raise ValueError("precision must be nonnegative")

    m = kappa.bit_length()  # = ceil(log2(kappa + 1))
    gs, f0 = num_den_newton(inp.f_sys, n, r, inp.d, m)

    bo = Builder(r, fold=True)
    nr = node_ring(bo)
    ring = _residue_ring(bo, inp.p)
    big_d = inp.p.degree

    def vector(poly: UniPoly):
        w = poly % inp.p
        return tuple(
            bo.constant(w.coeff(i)) if w.coeff(i) != 0 else None for i in range(big_d)
        )

    t_vals = [(bo.input(j),) + (None,) * (big_d - 1) for j in range(r)]
    x_vals = [vector(w) for w in inp.v]
    vals = eval_many(list(gs) + [f0], t_vals + x_vals, ring)
    u, u0 = vals[:n], vals[n]

    # Degree-delta homogenization of h, applied to (u0, u): expand h in
    # the x block and pair part k with u0^(delta - k).
    bh = Builder(r + n, fold=True)
    hrow = _expand_into(bh, h, {r + i: Fraction(0) for i in range(n)}, delta)
    live = [ref for ref in hrow if ref is not None]
    hvals = dict(zip(live, eval_many(bh.finish_many(live), t_vals + list(u), ring))) if live else {}
    u0_pow = [ring.one]
    for _ in range(delta):
        u0_pow.append(ring.mul(u0_pow[-1], u0))
    uh = ring.zero
    for k in range(delta + 1):
        if hrow[k] is None:
            continue
        uh = ring.add(uh, ring.mul(hvals[hrow[k]], u0_pow[delta - k]))

    det0 = _det_ref(nr, _mult_rows(nr, inp.p, u0))
    if det0 is None:
        raise ValueError("denominator norm is identically zero")
    g_ref = _det_ref(nr, _mult_rows(nr, inp.p, uh))
    f_ref = bo.one() if delta == 0 else _pow_ref(nr, det0, delta)

    det0_prog, f_prog, g_prog = simplify_many(
        bo.finish_many([det0, f_ref, g_ref if g_ref is not None else bo.zero()])
    )
    if evaluate(det0_prog, [Fraction(0)] * r) == 0:
        raise ValueError("denominator norm vanishes at t = 0")
    return f_prog, g_prog
