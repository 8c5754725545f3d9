"""Equidimensional decomposition of program-encoded polynomial systems.

The centerpiece is :func:`equidim`, which takes homogeneous programs
f_1 ... f_s and an inequation g and returns one normalized-scale Chow
form per dimension, covering exactly the components of V(f) \\ V(g).
Around it sit the pieces it is built from, each usable on its own:
majority-vote amplification of randomized runs, degree detection,
intersection of a variety with one more hypersurface, and the splitting
of a variety along a polynomial.

The dimension sweep works on fibers.  After a random linear change of
coordinates the moving part of each dimension is carried as the exact
resolution of its central fiber (a monic squarefree minimal polynomial
over Q together with coordinate parametrizations), and the passage from
one dimension to the next lifts that fiber along one coordinate axis,
cuts with the next generic combination, and splits off the components
where the inequation or the following combination vanishes.  Chow forms
are only materialized per dimension, from the cleaned fiber; nothing
symbolic is dragged through the recursion.

Randomness is explicit: every routine takes a splittable generator and
draws integer points from ranges sized so one run fails with small,
documented probability.  Detected failures raise
:class:`~chowkit.slp_division.ProbabilisticFailure`; undetected wrong
output stays inside the stated error budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Sequence

from .chow_core import (
    ChowForm,
    GeometricResolution,
    char_poly_from_chow,
    chow_from_fiber,
    group_degree,
    normalization_point,
    slot,
    unit_chow,
)
from .exact_arith import (
    Matrix,
    RingOps,
    UniPoly,
    berkowitz_adjugate,
    berkowitz_det,
    ext_resultant,
)
from .slp import DIV, Builder, Slp, eval_many, evaluate, expand, gradient, node_ring, simplify
from .slp_division import ProbabilisticFailure, gcd, polynomial_division

DEFAULT_N = 2 ** 20

_FAILED = object()


# ---------------------------------------------------------------------------
# Small ring helpers.


def _ref(b: Builder, x: int | None) -> int:
    return x if x is not None else b.zero()


def _power(b: Builder, base: int, e: int) -> int:
    """base ** e as a node reference, with e = 0 giving the constant 1."""
    if e == 0:
        return b.one()
    result = None
    sq = base
    while e:
        if e & 1:
            result = sq if result is None else b.mul(result, sq)
        e >>= 1
        if e:
            sq = b.mul(sq, sq)
    return result


def _upoly_ops() -> RingOps:
    return RingOps(
        zero=UniPoly(),
        one=UniPoly.constant(1),
        add=lambda a, b: a + b,
        sub=lambda a, b: a - b,
        mul=lambda a, b: a * b,
        cadd=lambda c, x: x + UniPoly.constant(c),
        cmul=lambda c, x: x * Fraction(c),
    )


_UNIPOLY_OPS = _upoly_ops()


def _quot_ops(rho: UniPoly) -> RingOps:
    """Arithmetic in Q[t] / (rho) on reduced representatives."""
    return RingOps(
        zero=UniPoly(),
        one=UniPoly.constant(1),
        add=lambda a, b: a + b,
        sub=lambda a, b: a - b,
        mul=lambda a, b: (a * b) % rho,
        cadd=lambda c, x: x + UniPoly.constant(c),
        cmul=lambda c, x: x * Fraction(c),
    )


def _upoly_pow(base: UniPoly, e: int) -> UniPoly:
    out = UniPoly.constant(1)
    for _ in range(e):
        out = out * base
    return out


def _upoly_gcd(a: UniPoly, b: UniPoly) -> UniPoly:
    while not b.is_zero():
        a, b = b, a % b
    return a.monic() if not a.is_zero() else a


def _upoly_divexact(num: UniPoly, den: UniPoly) -> UniPoly | None:
    """num / den when the division is exact, None when it is not."""
    q, rem = divmod(num, den)
    return q if rem.is_zero() else None


def _squarefree(p: UniPoly) -> UniPoly:
    """Monic squarefree part of a nonzero polynomial."""
    g = _upoly_gcd(p, p.derivative())
    if g.degree <= 0:
        return p.monic()
    q = _upoly_divexact(p, g)
    return q.monic()


def _taylor_ops(b: Builder, bound: int) -> RingOps:
    """Truncated polynomials in one formal variable over arena nodes.

    Elements are tuples of length bound + 1 of node references (None
    for a structurally missing coefficient), ascending powers.
    Evaluating a program over this ring with one input replaced by the
    formal variable extracts that program's coefficients.
    """
    nr = node_ring(b)
    width = bound + 1

    def add(x, y):
        return tuple(nr.add(x[i], y[i]) for i in range(width))

    def sub(x, y):
        return tuple(nr.sub(x[i], y[i]) for i in range(width))

    def mul(x, y):
        out: list[int | None] = [None] * width
        for i in range(width):
            if x[i] is None:
                continue
            for j in range(width - i):
                if y[j] is None:
                    continue
                out[i + j] = nr.add(out[i + j], nr.mul(x[i], y[j]))
        return tuple(out)

    def cadd(c, x):
        return (nr.cadd(c, x[0]),) + tuple(x[1:])

    def cmul(c, x):
        return tuple(nr.cmul(c, xi) for xi in x)

    return RingOps(
        zero=(None,) * width,
        one=(b.one(),) + (None,) * bound,
        add=add,
        sub=sub,
        mul=mul,
        cadd=cadd,
        cmul=cmul,
    )


def _matrix_ops(b: Builder, dim: int) -> RingOps:
    """dim x dim matrices of arena nodes, with None as the zero matrix."""
    nr = node_ring(b)

    def diag(ref):
        return tuple(
            tuple(ref if i == j else None for j in range(dim)) for i in range(dim)
        )

    def add(x, y):
        if x is None:
            return y
        if y is None:
            return x
        return tuple(
            tuple(nr.add(x[i][j], y[i][j]) for j in range(dim)) for i in range(dim)
        )

    def sub(x, y):
        if y is None:
            return x
        if x is None:
            return tuple(
                tuple(nr.sub(None, y[i][j]) for j in range(dim)) for i in range(dim)
            )
        return tuple(
            tuple(nr.sub(x[i][j], y[i][j]) for j in range(dim)) for i in range(dim)
        )

    def mul(x, y):
        if x is None or y is None:
            return None
        out = []
        for i in range(dim):
            row = []
            for j in range(dim):
                acc = None
                for k in range(dim):
                    acc = nr.add(acc, nr.mul(x[i][k], y[k][j]))
                row.append(acc)
            out.append(tuple(row))
        return tuple(out)

    def cadd(c, x):
        c = Fraction(c)
        if c == 0:
            return x
        if x is None:
            return diag(b.constant(c))
        return tuple(
            tuple(nr.cadd(c, x[i][j]) if i == j else x[i][j] for j in range(dim))
            for i in range(dim)
        )

    def cmul(c, x):
        if x is None or c == 0:
            return None
        return tuple(tuple(nr.cmul(c, x[i][j]) for j in range(dim)) for i in range(dim))

    return RingOps(zero=None, one=diag(b.one()), add=add, sub=sub, mul=mul, cadd=cadd, cmul=cmul)


def _homogenize(f: Slp, d: int) -> Slp:
    """Degree-d homogenization of an affine program.

    The output takes the original inputs first and the homogenizing
    variable last.  The degree of f must be at most d; components of
    degree k are multiplied by the last variable to the power d - k.
    """
    if d < 0:
        raise ValueError("homogenization degree must be nonnegative")
    arity = f.arity
    parts = expand(f, list(range(arity)), [Fraction(0)] * arity, d)
    b = Builder(arity + 1, fold=True)
    nr = node_ring(b)
    point = [b.input(i) for i in range(arity)]
    vals = eval_many(parts, point, nr)
    x0 = b.input(arity)
    acc = None
    for k, val in enumerate(vals):
        if val is None:
            continue
        term = val if k == d else b.mul(val, _power(b, x0, d - k))
        acc = nr.add(acc, term)
    return b.finish(_ref(b, acc))


def _mat_mul_nodes(x, y, nr, dim):
    out = []
    for i in range(dim):
        row = []
        for j in range(dim):
            acc = None
            for k in range(dim):
                acc = nr.add(acc, nr.mul(x[i][k], y[k][j]))
            row.append(acc)
        out.append(tuple(row))
    return tuple(out)


# ---------------------------------------------------------------------------
# Amplification and degree detection.


def amplify(run: Callable, N: int, rng, *, degree_bound: int, key: Callable | None = None):
    """Drive the error of a randomized computation below 1/N.

    ``run`` is called ceil(6 (log2 N + 1)) times, each time with a
    fresh child generator, and must return the same mathematical value
    with probability at least 3/4 per call (detected failures may raise
    ProbabilisticFailure instead).  The results are compared through
    ``key``; by default programs and Chow forms are compared by their
    values at one shared random point drawn wide enough for
    ``degree_bound``.  The first result whose class holds a strict
    majority of all calls is returned.

    Raises ProbabilisticFailure when no class reaches a majority, or
    re-raises the last failure when every call failed.
    """
    if N < 2:
        raise ValueError("amplification needs N >= 2")
    if degree_bound < 0:
        raise ValueError("degree bound must be nonnegative")
    s = math.ceil(6 * (math.log2(N) + 1))
    values = []
    last_failure = None
    for j in range(s):
        try:
            values.append(run(rng.split(f"run{j}")))
        except ProbabilisticFailure as exc:
            values.append(_FAILED)
            last_failure = exc
    good = [v for v in values if v is not _FAILED]
    if not good:
        raise last_failure

    if key is None:
        progs_of = _default_program_view
        arity = 0
        for v in good:
            arity = max(arity, max((p.arity for p in progs_of(v)), default=0))
        span = max(2, 4 * N * s * s * max(degree_bound, 1))
        probe = [Fraction(x) for x in rng.split("probe").integers(span, arity)]

        def key(value):
            return tuple(evaluate(p, probe[: p.arity]) for p in progs_of(value))

    counts: dict = {}
    first: dict = {}
    for v in good:
        k = key(v)
        counts[k] = counts.get(k, 0) + 1
        first.setdefault(k, v)
    for k, c in counts.items():
        if 2 * c > s:
            return first[k]
    raise ProbabilisticFailure("no majority among the repeated runs")


def _default_program_view(value) -> list[Slp]:
    if isinstance(value, Slp):
        return [value]
    if isinstance(value, ChowForm):
        return [value.prog]
    if isinstance(value, (tuple, list)):
        out = []
        for item in value:
            out.extend(_default_program_view(item))
        return out
    raise TypeError("the default key understands programs and Chow forms only; pass key=")


def deg_detect(fs: Sequence[Slp], d: int, N: int, rng) -> list[int]:
    """Total degrees of a family of programs, -1 for the zero ones.

    Expands each program to order d around the origin and reads off the
    top component that does not vanish at one shared random point from
    [0, s d N)^arity, s the number of programs.  Errors are silent
    underestimates, with total probability at most 1/N.
    """
    fs = list(fs)
    if not fs:
        return []
    if d < 0:
        raise ValueError("the degree bound must be nonnegative")
    arity = fs[0].arity
    if any(f.arity != arity for f in fs):
        raise ValueError("the programs must share one arity")
    span = max(2, len(fs) * d * N)
    point = [Fraction(x) for x in rng.integers(span, arity)]
    center = [Fraction(0)] * arity
    out = []
    for f in fs:
        parts = expand(f, list(range(arity)), center, d)
        vals = eval_many(parts, point)
        deg = -1
        for k in range(d, -1, -1):
            if vals[k] != 0:
                deg = k
                break
        out.append(deg)
    return out


# ---------------------------------------------------------------------------
# Intersection with one polynomial.


def intersection(n: int, r: int, D: int, f: Slp, d: int, ch: ChowForm, rng) -> ChowForm:
    """Chow form of V cut by one polynomial f of degree at most d.

    ``ch`` must be the normalized form of an equidimensional V of
    dimension r >= 1 and degree D on which f is a nonzerodivisor; the
    result is the normalized form of V intersected with the degree-d
    homogenization of f (components at infinity and multiplicities are
    removed by a derivative gcd).  One call errs with probability at
    most 1/4; detected bad draws raise ProbabilisticFailure.

    The norm of f over the generic fiber is evaluated on companion
    matrices built from the coefficients of the form in the slot U_r0,
    scaled by the leading coefficient so no divisions occur, and the
    two determinant identities |f^h(M)| and |M_0| are divided out
    exactly at a configuration based on coordinate hyperplanes.
    """
    _check_form(ch, n, r, D, "intersection")
    if r < 1:
        raise ValueError("intersection consumes one dimension, so r >= 1 is needed")
    if f.arity != n:
        raise ValueError(f"the polynomial must take the {n} affine coordinates")
    if d < 0:
        raise ValueError("the degree bound must be nonnegative")
    if D == 0:
        return unit_chow(n, r - 1)

    arity = (r + 1) * (n + 1)
    b = Builder(arity, fold=True)
    nr = node_ring(b)
    tops = _taylor_ops(b, D)
    spot = slot(n, r, 0)
    tpoint = []
    for m in range(arity):
        if m == spot:
            tpoint.append((None, b.one()) + (None,) * (D - 1))
        else:
            tpoint.append((b.input(m),) + (None,) * D)
    cs = evaluate(ch.prog, tpoint, tops)
    a = cs[D]
    if a is None:
        raise ValueError("the leading coefficient of the form vanished structurally")

    grads = gradient(ch.prog)
    gsel = [grads[slot(n, r, i)] for i in range(1, n + 1)]
    gvals = eval_many(gsel, tpoint, tops)

    # Companion-style matrix of the slot variable, scaled by a.
    mq = [[None] * D for _ in range(D)]
    for i in range(D - 1):
        mq[i + 1][i] = a
    for j in range(D):
        mq[j][D - 1] = nr.sub(None, cs[j])
    mq = tuple(tuple(row) for row in mq)

    mops = _matrix_ops(b, D)
    powers = [mops.one]
    for _ in range(1, D):
        powers.append(_mat_mul_nodes(powers[-1], mq, nr, D))
    apow = [b.one()]
    for _ in range(1, D):
        apow.append(b.mul(apow[-1], a))

    def combination(coeffs):
        acc = None
        for j, cref in enumerate(coeffs):
            if cref is None:
                continue
            scaled = b.mul(cref, apow[D - 1 - j]) if D - 1 - j > 0 else cref
            term = tuple(
                tuple(None if e is None else b.mul(scaled, e) for e in row)
                for row in powers[j]
            )
            acc = mops.add(acc, term)
        return acc

    mats = []
    for i in range(n):
        mats.append(combination([gvals[i][j] for j in range(D)]))
    qprime = [nr.cmul(k + 1, cs[k + 1]) for k in range(D)]
    m0 = combination(qprime)
    if m0 is None:
        raise ValueError("the derivative matrix vanished structurally")

    fh = _homogenize(f, d)
    hmat = evaluate(fh, mats + [m0], mops)
    if hmat is None:
        raise ValueError("the polynomial to intersect with must not be zero")
    h1 = berkowitz_det([list(row) for row in hmat], nr)
    h2 = berkowitz_det([list(row) for row in m0], nr)
    ad = _power(b, a, d)
    ah1 = nr.mul(ad, h1)
    h2d = _power(b, _ref(b, h2), d) if d > 0 else b.one()
    prog_h2d, prog_ah1 = b.finish_many([_ref(b, h2d), _ref(b, ah1)])

    bound = r * d * D
    span_tail = max(2, 12 * D * D)
    e_div = [Fraction(0)] * arity
    for i in range(r):
        e_div[slot(n, i, i + 1)] = Fraction(1)
    tail = rng.split("tail").integers(span_tail, n)
    for k in range(1, n + 1):
        e_div[slot(n, r, k)] = Fraction(tail[k - 1])
    if evaluate(prog_h2d, e_div) == 0:
        raise ProbabilisticFailure("the companion norm |M_0| vanished at the chosen evaluation point")
    chdvf = simplify(polynomial_division(prog_h2d, prog_ah1, bound, e_div))

    # Remove multiplicities and the components at infinity: they are
    # exactly the factors not depending on U_00, so they sit inside the
    # gcd with the U_00 derivative with full multiplicity.
    deriv = simplify(gradient(chdvf)[slot(n, 0, 0)])
    cleanup = _normalized_gcd(chdvf, deriv, arity, bound, 12, rng.split("gcd"))

    span_u = max(2, 12 * r * d * D)
    u = [Fraction(x) for x in rng.split("u").integers(span_u, arity)]
    if evaluate(cleanup, u) == 0:
        raise ProbabilisticFailure("G(u) = 0 at the random division point")
    reduced = polynomial_division(cleanup, chdvf, bound, u)

    # The result no longer involves the group r; rebase to r - 1 groups.
    new_arity = r * (n + 1)
    bs = Builder(new_arity, fold=True)
    pt: list = [bs.input(m) for m in range(new_arity)]
    pt += [bs.one()] + [None] * n
    val = evaluate(reduced, pt, node_ring(bs))
    raw = simplify(bs.finish(_ref(bs, val)))

    nv = evaluate(raw, normalization_point(n, r - 1))
    if nv == 0:
        raise ProbabilisticFailure("the intersected form vanishes at the normalization configuration")
    if nv == 1:
        final = raw
    else:
        bn = Builder(new_arity)
        final = bn.finish(bn.cmul(Fraction(1) / nv, bn.absorb(raw)))
    out_d = group_degree(final, n, 0, max(d * D, 0), rng.split("deg"))
    return ChowForm(final, r=r - 1, n=n, D=max(out_d, 0))


def _check_form(ch: ChowForm, n: int, r: int, D: int, who: str) -> None:
    if ch.kind != "standard":
        raise ValueError(f"{who} expects a standard-kind form")
    if (ch.n, ch.r, ch.D) != (n, r, D):
        raise ValueError(
            f"{who} was given shape (n={n}, r={r}, D={D}) but the form carries "
            f"(n={ch.n}, r={ch.r}, D={ch.D})"
        )
    if not ch.normalized:
        raise ValueError(f"{who} expects a normalized form")


def _normalized_gcd(f: Slp, g: Slp, arity: int, bound: int, N: int, rng) -> Slp:
    """Amplified gcd whose candidates are rescaled to 1 at a shared point.

    The plain gcd is only defined up to a scalar, so each run is
    normalized at one probe point drawn once; runs where the candidate
    vanishes there count as failures.
    """
    span = max(2, 8 * bound * (bound + 1))
    z = [Fraction(x) for x in rng.split("z").integers(span, arity)]

    def run(child):
        cand = gcd(f, g, arity, bound, child)
        val = evaluate(cand, z)
        if val == 0:
            raise ProbabilisticFailure("the divisor candidate vanished at the shared probe")
        if val == 1:
            return cand
        bb = Builder(arity)
        return bb.finish(bb.cmul(Fraction(1) / val, bb.absorb(cand)))

    return simplify(amplify(run, N, rng.split("vote"), degree_bound=bound))


# ---------------------------------------------------------------------------
# Separation along a polynomial.


def separate(
    n: int,
    r: int,
    D: int,
    g: Slp,
    d: int,
    ch: ChowForm,
    rng,
    assumption_holds: bool = True,
):
    """Split V into the components inside V(g) and the others.

    Returns (form of Y, form of W) with Y the union of the components
    of V on which g vanishes identically, W the rest, both normalized.
    ``g`` must be a nonzero program of degree at most d.  One call errs
    with probability at most 1/4, coming from the inner gcd when the
    position assumptions hold; with ``assumption_holds=False`` the gcd
    is amplified and the exact division uses a random base point
    instead of the distinguished configuration, keeping the same
    overall budget.

    The factor of Y inside the shifted form P is the gcd of P with
    g^h(P', -dP/dU_01, ..., -dP/dU_0n), the norm of g written through
    the parametrization of the generic fiber by derivatives of P.
    """
    _check_form(ch, n, r, D, "separate")
    if g.arity != n:
        raise ValueError(f"the splitting polynomial must take the {n} affine coordinates")
    if d < 0:
        raise ValueError("the degree bound must be nonnegative")
    if D == 0:
        return unit_chow(n, r), unit_chow(n, r)
    d_eff = max(d, 1)

    dg = deg_detect([g], d_eff, 64, rng.split("gdeg"))[0]
    if dg < 0:
        # g is the zero polynomial: everything lies inside V(g).
        return ch, unit_chow(n, r)

    cp = char_poly_from_chow(ch)
    base = (r + 1) * (n + 1)
    big = base + r + 1
    pv = cp.prog

    grads = gradient(pv)
    bg = Builder(big, fold=True)
    ngr = node_ring(bg)
    idpoint = [bg.input(m) for m in range(big)]
    gsel = [grads[slot(n, 0, i)] for i in range(1, n + 1)] + [grads[base]]
    gvals = eval_many(gsel, idpoint, ngr)
    coords = [ngr.sub(None, gvals[i]) for i in range(n)]
    pprime = gvals[n]
    gh = _homogenize(g, dg)
    gval = evaluate(gh, coords + [pprime], ngr)
    big_g = simplify(bg.finish(_ref(bg, gval)))

    bound = d_eff * (r + 1) * D
    if assumption_holds:
        py = simplify(gcd(pv, big_g, big, bound, rng.split("gcd")))
        epoint = [Fraction(0)] * big
        for i in range(r + 1):
            epoint[slot(n, i, i)] = Fraction(1)
    else:
        py = _normalized_gcd(pv, big_g, big, bound, 8, rng.split("gcd"))
        span = max(2, 8 * bound * (bound + 1))
        epoint = [Fraction(x) for x in rng.split("base").integers(span, big)]
    if evaluate(py, epoint) == 0:
        raise ProbabilisticFailure("the inside factor vanishes at the division base point")
    pw = polynomial_division(py, pv, (r + 1) * D, epoint)

    ch_y = _shifted_factor_to_form(py, n, r, D, rng.split("ny"))
    ch_w = _shifted_factor_to_form(pw, n, r, D, rng.split("nw"))
    if ch_y.D + ch_w.D != D:
        raise ProbabilisticFailure("the split degrees do not add up to the input degree")
    return ch_y, ch_w


def _shifted_factor_to_form(prog: Slp, n: int, r: int, D: int, rng) -> ChowForm:
    """Forget the shift variables of a factor of P and renormalize."""
    base = (r + 1) * (n + 1)
    b = Builder(base, fold=True)
    pt: list = [b.input(m) for m in range(base)]
    pt += [None] * (prog.arity - base)
    val = evaluate(prog, pt, node_ring(b))
    raw = simplify(b.finish(_ref(b, val)))
    nv = evaluate(raw, normalization_point(n, r))
    if nv == 0:
        raise ProbabilisticFailure("a split factor vanishes at the normalization configuration")
    if nv != 1:
        bn = Builder(base)
        raw = bn.finish(bn.cmul(Fraction(1) / nv, bn.absorb(raw)))
    deg = group_degree(raw, n, 0, D, rng)
    return ChowForm(raw, r=r, n=n, D=max(deg, 0))


# ---------------------------------------------------------------------------
# Input preparation.


@dataclass
class PreparedSystem:
    """A system in generic coordinates, ready for the dimension sweep.

    ``qs`` holds n + 1 programs in the n affine coordinates y: random
    combinations of the degree-equalized family x_i^(d - deg f_j) f_j,
    composed with x = B^-1 (1, y).  ``h`` is the inequation under the
    same substitution.  ``A`` is the (n+1) x t combination matrix over
    the family ordered first by equation, then by the multiplier index
    i = 0 ... n; ``B`` is the coordinate change and ``B_inv`` its
    inverse.
    """

    qs: tuple[Slp, ...]
    h: Slp
    B: Matrix
    B_inv: Matrix
    A: Matrix


def prepare_input(fs: Sequence[Slp], g: Slp, d: int, N: int, rng) -> PreparedSystem:
    """Draw the random combinations and coordinate change for equidim.

    The inputs must be homogeneous programs in n + 1 variables of
    degree at most d, not all zero (their degrees are detected here).
    Entries of A come from [0, 8 N (d+1)^(2n)), entries of B from
    [0, 2 N n^2 d^(2n)), resampled until B is invertible.
    """
    fs = list(fs)
    if not fs:
        raise ValueError("at least one equation is needed")
    arity = fs[0].arity
    if arity < 2:
        raise ValueError("homogeneous inputs need at least two variables")
    n = arity - 1
    if any(f.arity != arity for f in fs) or g.arity != arity:
        raise ValueError("all equations and the inequation must share one arity")
    for prog in [*fs, g]:
        if DIV in prog.ops:
            raise ValueError("the inputs must be division-free")
    if d < 0 or N < 2:
        raise ValueError("need d >= 0 and N >= 2")

    degs = deg_detect(fs, d, N, rng.split("degrees"))
    active = [(j, dj) for j, dj in enumerate(degs) if dj >= 0]
    if not active:
        raise ValueError("cannot prepare an identically zero system")

    span_b = max(2, 2 * N * n * n * d ** (2 * n))
    bmat = None
    for attempt in range(64):
        entries = rng.split(f"B{attempt}").integers(span_b, (n + 1) * (n + 1))
        cand = Matrix(
            [
                [Fraction(entries[i * (n + 1) + j]) for j in range(n + 1)]
                for i in range(n + 1)
            ]
        )
        if cand.det() != 0:
            bmat = cand
            break
    if bmat is None:
        raise ProbabilisticFailure("no invertible coordinate change was found")
    binv = bmat.inverse()

    t = (n + 1) * len(active)
    span_a = max(2, 8 * N * (d + 1) ** (2 * n))
    aentries = rng.split("A").integers(span_a, (n + 1) * t)
    amat = Matrix(
        [[Fraction(aentries[i * t + j]) for j in range(t)] for i in range(n + 1)]
    )

    b = Builder(n, fold=True)
    nr = node_ring(b)
    xs = []
    for k in range(n + 1):
        acc = None
        for m in range(1, n + 1):
            acc = nr.add(acc, nr.cmul(binv.rows[k][m], b.input(m - 1)))
        xs.append(nr.cadd(binv.rows[k][0], acc))
    family = []
    for j, dj in active:
        fval = evaluate(fs[j], xs, nr)
        for i in range(n + 1):
            if d - dj == 0 or fval is None:
                family.append(fval)
            else:
                family.append(nr.mul(_power(b, _ref(b, xs[i]), d - dj), fval))
    q_refs = []
    for row in range(n + 1):
        acc = None
        for col, fam in enumerate(family):
            acc = nr.add(acc, nr.cmul(amat.rows[row][col], fam))
        q_refs.append(_ref(b, acc))
    h_ref = _ref(b, evaluate(g, xs, nr))
    progs = b.finish_many(q_refs + [h_ref])
    return PreparedSystem(qs=tuple(progs[:-1]), h=progs[-1], B=bmat, B_inv=binv, A=amat)


# ---------------------------------------------------------------------------
# Exact curve arithmetic for the dimension sweep.
#
# Elements of Q[[t]][T] / (p(t, T)) are tuples of UniPoly in t, indexed
# by the power of T, of length deg_T p.  The minimal polynomial p is a
# list of UniPoly coefficients whose top entry is the constant 1.


def _curve_ops(p: Sequence[UniPoly], sigma: int | None) -> RingOps:
    bigd = len(p) - 1

    def tr(u: UniPoly) -> UniPoly:
        if sigma is None or u.degree < sigma:
            return u
        return UniPoly(u.coeffs[:sigma])

    def add(x, y):
        return tuple(x[i] + y[i] for i in range(bigd))

    def sub(x, y):
        return tuple(x[i] - y[i] for i in range(bigd))

    def mul(x, y):
        conv = [UniPoly() for _ in range(2 * bigd - 1)]
        for i in range(bigd):
            if x[i].is_zero():
                continue
            for j in range(bigd):
                if y[j].is_zero():
                    continue
                conv[i + j] = conv[i + j] + tr(x[i] * y[j])
        for k in range(2 * bigd - 2, bigd - 1, -1):
            c = conv[k]
            if c.is_zero():
                continue
            for j in range(bigd):
                conv[k - bigd + j] = conv[k - bigd + j] - tr(c * p[j])
        return tuple(tr(conv[i]) for i in range(bigd))

    def cadd(c, x):
        return (x[0] + UniPoly.constant(c),) + tuple(x[1:])

    def cmul(c, x):
        return tuple(xi * Fraction(c) for xi in x)

    zero = (UniPoly(),) * bigd
    one = (UniPoly.constant(1),) + (UniPoly(),) * (bigd - 1)
    return RingOps(zero=zero, one=one, add=add, sub=sub, mul=mul, cadd=cadd, cmul=cmul)


def _elem_from_poly(q: UniPoly, bigd: int):
    """A polynomial in the label variable T, as a curve element."""
    return tuple(UniPoly.constant(q.coeff(j)) for j in range(bigd))


def _elem_label(p: Sequence[UniPoly]):
    """The class of T itself modulo p."""
    bigd = len(p) - 1
    if bigd == 1:
        return (-p[0],)
    return (UniPoly(), UniPoly.constant(1)) + (UniPoly(),) * (bigd - 2)


def _pprime(p: Sequence[UniPoly]):
    bigd = len(p) - 1
    return tuple(p[j + 1] * Fraction(j + 1) for j in range(bigd))


def _curve_inverse(x, p: Sequence[UniPoly], ops: RingOps, sigma: int) -> tuple:
    """Inverse of a curve element, by inverting at t = 0 and lifting."""
    bigd = len(p) - 1
    p0 = UniPoly([pj.coeff(0) for pj in p])
    x0 = UniPoly([xi.coeff(0) for xi in x])
    rho, _, q2 = ext_resultant(p0, x0, bigd, max(x0.degree, 0))
    if rho == 0:
        raise ProbabilisticFailure("a determinant is not invertible on the special fiber")
    inv0 = (q2 * (Fraction(1) / rho)) % p0
    u = _elem_from_poly(inv0, bigd)
    steps = max(1, math.ceil(math.log2(max(sigma, 2)))) + 1
    for _ in range(steps):
        u = ops.mul(u, ops.cadd(2, ops.sub(ops.zero, ops.mul(x, u))))
    return u


def _lift_curve(
    f_loc: Sequence[Slp],
    p0: UniPoly,
    v0: Sequence[UniPoly],
    li: int,
    ti: int,
    n: int,
    sigma: int,
):
    """Lift a fiber to the curve obtained by freeing one coordinate.

    ``p0`` and ``v0`` resolve the fiber at t = 0 with labels given by
    coordinate li; coordinate ti becomes the parameter t, coordinates
    below ti stay cut to zero and the remaining ones are the unknowns
    of the Newton iteration against the local system ``f_loc``.  The
    returned pair (p, v) carries the minimal polynomial and coordinates
    of the curve over Q[[t]] modulo t^sigma, with p exact.
    """
    bigd = p0.degree
    p = [UniPoly.constant(p0.coeff(j)) for j in range(bigd)] + [UniPoly.constant(1)]
    v: list = []
    for j in range(n):
        if j == ti:
            v.append((UniPoly([Fraction(0), Fraction(1)]),) + (UniPoly(),) * (bigd - 1))
        elif j < ti:
            v.append((UniPoly(),) * bigd)
        else:
            v.append(_elem_from_poly(v0[j], bigd))
    free = list(range(ti + 1, n))
    m = len(free)
    if len(f_loc) != m:
        raise ValueError(f"expected {m} local equations, got {len(f_loc)}")
    grads = [gradient(q) for q in f_loc]

    s = 1
    while s < sigma:
        s = min(2 * s, sigma)
        ops = _curve_ops(p, sigma)
        if m:
            fvals = eval_many(list(f_loc), v, ops)
            jrows = []
            for gr in grads:
                jrows.append(eval_many([gr[j] for j in free], v, ops))
            adj, char = berkowitz_adjugate(jrows, ops)
            det = char[0] if m % 2 == 0 else ops.sub(ops.zero, char[0])
            invdet = _curve_inverse(det, p, ops, sigma)
            for row, j in enumerate(free):
                acc = ops.zero
                for k in range(m):
                    acc = ops.add(acc, ops.mul(adj[row][k], fvals[k]))
                v[j] = ops.sub(v[j], ops.mul(acc, invdet))
        # Re-align the labels: the label coordinate must stay equal to T.
        eps = ops.sub(v[li], _elem_label(p))
        corr = ops.mul(eps, _pprime(p))
        p = [p[j] - corr[j] for j in range(bigd)] + [UniPoly.constant(1)]
        p = [pj if pj.degree < sigma else UniPoly(pj.coeffs[:sigma]) for pj in p]
        ops2 = _curve_ops(p, sigma)
        for j in free:
            dv = tuple(v[j][k + 1] * Fraction(k + 1) for k in range(bigd - 1)) + (UniPoly(),)
            v[j] = ops2.sub(v[j], ops2.mul(eps, dv))

    ops = _curve_ops(p, sigma)
    for j, pj in enumerate(p[:-1]):
        if pj.degree > bigd - j:
            raise ProbabilisticFailure("the curve minimal polynomial exceeded its degree bound")
    if m:
        for res in eval_many(list(f_loc), v, ops):
            if any(not c.is_zero() for c in res):
                raise ProbabilisticFailure("the curve lift lost consistency")
    drift = ops.sub(v[li], _elem_label(p))
    if any(not c.is_zero() for c in drift):
        raise ProbabilisticFailure("the curve labels drifted during the lift")
    return p, v


def _cut_curve(
    p: Sequence[UniPoly],
    v: Sequence,
    qh: Slp,
    d: int,
    n: int,
    sigma: int,
):
    """Intersect a lifted curve with one homogenized combination.

    Computes the resultant in the label variable of p and the
    combination evaluated on the derivative-scaled parametrization
    w_i = p' x_i mod p, divides out the discriminant power that the
    scaling introduced, and returns the squarefree part rho together
    with the coordinates of the intersection points modulo rho.
    """
    bigd = len(p) - 1
    tops = _curve_ops(p, sigma)
    pp = _pprime(p)
    ws = []
    for j in range(n):
        w = tops.mul(pp, v[j])
        if any(c.degree > 2 * bigd for c in w):
            raise ProbabilisticFailure("the curve parametrization exceeded its degree bound")
        ws.append(w)

    free_ops = _curve_ops(p, None)
    qval = evaluate(qh, ws + [pp], free_ops)

    def mult_det(elem):
        cols = [list(elem)]
        for _ in range(bigd - 1):
            prev = cols[-1]
            top = prev[bigd - 1]
            nxt = [UniPoly() if i == 0 else prev[i - 1] for i in range(bigd)]
            if not top.is_zero():
                for i in range(bigd):
                    nxt[i] = nxt[i] - top * p[i]
            cols.append(nxt)
        rows = [[cols[j][i] for j in range(bigd)] for i in range(bigd)]
        return berkowitz_det(rows, _UNIPOLY_OPS)

    resultant = mult_det(qval)
    if resultant.is_zero():
        raise ProbabilisticFailure("a combination vanished along the whole curve")
    disc = mult_det(pp)
    rtrue = _upoly_divexact(resultant, _upoly_pow(disc, d))
    if rtrue is None or rtrue.is_zero():
        raise ProbabilisticFailure("the curve resultant lost exactness")
    rho = _squarefree(rtrue)
    if rho.degree == 0:
        return UniPoly.constant(1), [UniPoly() for _ in range(n)]

    pmod = [pj % rho for pj in p]
    qmod = [qj % rho for qj in qval]
    tstar = _branch_value(pmod, qmod, rho)
    ppstar = _teval([c % rho for c in pp], tstar, rho)
    inv = _quot_inverse(ppstar, rho)
    coords = []
    for j in range(n):
        wstar = _teval([c % rho for c in ws[j]], tstar, rho)
        coords.append((wstar * inv) % rho)
    return rho, coords


def _teval(coeffs: Sequence[UniPoly], x: UniPoly, rho: UniPoly) -> UniPoly:
    acc = UniPoly()
    for c in reversed(list(coeffs)):
        acc = (acc * x + c) % rho
    return acc


def _quot_inverse(x: UniPoly, rho: UniPoly) -> UniPoly:
    rval, _, q2 = ext_resultant(rho, x, rho.degree, max(x.degree, 0))
    if rval == 0:
        raise ProbabilisticFailure("a fiber value is not invertible modulo the minimal polynomial")
    return (q2 * (Fraction(1) / rval)) % rho


def _branch_value(pt: Sequence[UniPoly], qt: Sequence[UniPoly], rho: UniPoly) -> UniPoly:
    """The common root in the label variable of two polynomials mod rho.

    Runs the Euclidean algorithm in T over Q[t]/(rho) and expects a
    gcd of degree exactly one; anything else means the branches of the
    curve are not in general position over this parameter line.
    """

    def strip(poly):
        out = [c % rho for c in poly]
        while out and out[-1].is_zero():
            out.pop()
        return out

    a = strip(pt)
    b = strip(qt)
    while b:
        inv = _quot_inverse(b[-1], rho)
        db = len(b) - 1
        rem = list(a)
        while len(rem) - 1 >= db and rem:
            factor = (rem[-1] * inv) % rho
            shiftpos = len(rem) - 1 - db
            for i in range(db + 1):
                rem[shiftpos + i] = (rem[shiftpos + i] - factor * b[i]) % rho
            rem.pop()
            while rem and rem[-1].is_zero():
                rem.pop()
        a, b = b, rem
    if len(a) - 1 != 1:
        raise ProbabilisticFailure("the fiber branches collide over the parameter line")
    inv = _quot_inverse(a[1], rho)
    return (-(a[0] * inv)) % rho


def _split_fiber(rho: UniPoly, coords: Sequence[UniPoly], prog: Slp):
    """Split a fiber along the vanishing of one program.

    Returns ((rho_in, coords_in), (rho_out, coords_out)) for the parts
    where the program vanishes and where it does not.
    """
    if rho.degree == 0:
        empty = (UniPoly.constant(1), [UniPoly() for _ in coords])
        return empty, empty
    val = evaluate(prog, list(coords), _quot_ops(rho))
    gin = rho.monic() if val.is_zero() else _upoly_gcd(rho, val)
    if gin.degree == 0:
        return (UniPoly.constant(1), [UniPoly() for _ in coords]), (rho, list(coords))
    gout = _upoly_divexact(rho, gin)
    gout = gout.monic() if gout.degree > 0 else UniPoly.constant(1)
    inside = (gin, [c % gin for c in coords])
    if gout.degree == 0:
        outside = (UniPoly.constant(1), [UniPoly() for _ in coords])
    else:
        outside = (gout, [c % gout for c in coords])
    return inside, outside


# ---------------------------------------------------------------------------
# The decomposition driver.


@dataclass
class DecompositionResult:
    """One Chow form per dimension, index r of ``forms`` for dimension r.

    Empty dimensions carry the constant form 1.  The entry for r = n is
    the determinant form of the whole space exactly when the input
    system was identically zero.  Nonempty entries are scaled so the
    form equals 1 at the distinguished configuration in the random
    coordinates the sweep used; their programs are written in the
    original coordinates.
    """

    forms: tuple[ChowForm, ...]

    @property
    def degrees(self) -> tuple[int, ...]:
        return tuple(f.D for f in self.forms)


def equidim(
    fs: Sequence[Slp],
    g: Slp,
    d: int,
    rng,
    N: int = DEFAULT_N,
    attempts: int = 1,
) -> DecompositionResult:
    """Chow forms of the equidimensional parts of V(f_1 ... f_s) \\ V(g).

    The inputs must be homogeneous division-free programs in n + 1
    variables of degree at most d (g included).  N controls the error
    budget: one attempt is wrong with probability O(1/N).  Detected
    failures raise ProbabilisticFailure after exhausting ``attempts``
    independent retries, with the failing stage named in the message.
    """
    fs = list(fs)
    if not fs:
        raise ValueError("at least one equation is needed")
    arity = fs[0].arity
    if arity < 2:
        raise ValueError("homogeneous inputs need at least two variables")
    if any(f.arity != arity for f in fs) or g.arity != arity:
        raise ValueError("all equations and the inequation must share one arity")
    for prog in [*fs, g]:
        if DIV in prog.ops:
            raise ValueError("the inputs must be division-free")
    if d < 0:
        raise ValueError("the degree bound must be nonnegative")
    if N < 4:
        raise ValueError("the error parameter N must be at least 4")
    last: ProbabilisticFailure | None = None
    for k in range(max(1, attempts)):
        try:
            return _equidim_once(fs, g, d, N, rng.split(f"attempt{k}"))
        except ProbabilisticFailure as exc:
            last = exc
    raise last


def _equidim_once(fs: list[Slp], g: Slp, d: int, N: int, rng) -> DecompositionResult:
    n = fs[0].arity - 1
    degs = deg_detect([*fs, g], d, N, rng.split("degrees"))
    if degs[-1] < 0:
        # The inequation is zero, so nothing is left of the variety.
        return DecompositionResult(tuple(unit_chow(n, r) for r in range(n + 1)))
    if all(dg < 0 for dg in degs[:-1]):
        forms = [unit_chow(n, r) for r in range(n)]
        forms.append(_whole_space_form(n))
        return DecompositionResult(tuple(forms))

    prep = prepare_input(fs, g, d, N, rng.split("prepare"))
    qs = prep.qs

    # First sweep, from dimension n - 1 down to 0: carry the moving
    # part as an exact fiber, store the candidate union fiber per
    # dimension.
    unions: list[tuple[UniPoly, list[UniPoly]]] = [
        (UniPoly.constant(1), [UniPoly() for _ in range(n)]) for _ in range(n)
    ]
    mov_p = UniPoly([Fraction(0), Fraction(1)])
    mov_v: list[UniPoly] = [UniPoly() for _ in range(n)]
    for r in range(n - 1, -1, -1):
        bigd = mov_p.degree
        if bigd == 0:
            break
        m = n - r - 1
        sigma = 2 * bigd + 3
        try:
            p, v = _lift_curve(list(qs[:m]), mov_p, mov_v, min(r + 1, n - 1), r, n, sigma)
            rho, coords = _cut_curve(p, v, _homogenize(qs[m], d), d, n, sigma)
        except ProbabilisticFailure as exc:
            raise ProbabilisticFailure(f"the dimension {r} sweep failed: {exc}") from exc
        _, kept = _split_fiber(rho, coords, prep.h)
        (ru, cu), (rm, cm) = _split_fiber(kept[0], kept[1], qs[m + 1])
        unions[r] = (ru, cu)
        mov_p, mov_v = rm, cm

    # Second sweep, top down: remove the candidates sitting inside a
    # higher-dimensional component, then rebuild each Chow form from
    # its cleaned fiber.
    forms_y: list[ChowForm | None] = [None] * n
    filters: dict[int, Slp] = {}
    for r in range(n - 1, -1, -1):
        rho, coords = unions[r]
        for k in range(n - 1, r, -1):
            if k in filters and rho.degree > 0:
                _, (rho, coords) = _split_fiber(rho, coords, filters[k])
        if rho.degree == 0:
            continue
        ell = [Fraction(0)] * (n + 1)
        ell[r + 1] = Fraction(1)
        try:
            res = GeometricResolution(ell, rho, tuple(coords))
            forms_y[r] = chow_from_fiber(n, r, rho.degree, res, list(qs[: n - r]), d)
        except ValueError as exc:
            raise ProbabilisticFailure(
                f"the dimension {r} reconstruction failed: {exc}"
            ) from exc
        if r >= 1:
            filters[r] = _configuration_filter(forms_y[r], n, N, d, rng.split(f"filter{r}"))

    forms = []
    for r in range(n):
        if forms_y[r] is None:
            forms.append(unit_chow(n, r))
        else:
            forms.append(_apply_coordinate_change(forms_y[r], prep.B_inv))
    forms.append(unit_chow(n, n))
    return DecompositionResult(tuple(forms))


def _whole_space_form(n: int) -> ChowForm:
    """The determinant form |(U_0 ... U_n)| of the full space."""
    b = Builder((n + 1) * (n + 1))
    rows = [[b.input(slot(n, i, k)) for k in range(n + 1)] for i in range(n + 1)]
    val = berkowitz_det(rows, node_ring(b))
    return ChowForm(b.finish(_ref(b, val)), r=n, n=n, D=1)


def _configuration_filter(ch: ChowForm, n: int, N: int, d: int, rng) -> Slp:
    """A polynomial in y vanishing on the affine part of ch's variety.

    Specializes the shifted form at one random U_0 row and coordinate
    rows e_1 ... e_r; membership of a fiber point is then a vanishing
    test.  Used to discard candidate components embedded in a
    higher-dimensional true component.
    """
    r = ch.r
    cp = char_poly_from_chow(ch)
    base = (r + 1) * (n + 1)
    span = max(2, 6 * max(n - 1, 1) * N * d ** (2 * n + 1))
    u = [Fraction(x) for x in rng.integers(span, n + 1)]
    b = Builder(n, fold=True)
    nr = node_ring(b)
    point: list = [None] * (base + r + 1)
    for k in range(n + 1):
        point[slot(n, 0, k)] = b.constant(u[k]) if u[k] else None
    for i in range(1, r + 1):
        point[slot(n, i, i)] = b.one()
    acc = b.constant(u[0]) if u[0] else None
    for j in range(1, n + 1):
        acc = nr.add(acc, nr.cmul(u[j], b.input(j - 1)))
    point[base] = acc
    for i in range(1, r + 1):
        point[base + i] = b.input(i - 1)
    val = evaluate(cp.prog, point, nr)
    return simplify(b.finish(_ref(b, val)))


def _apply_coordinate_change(ch: ChowForm, binv: Matrix) -> ChowForm:
    """Rewrite a form in the original coordinates through U -> U B^-1."""
    n, r = ch.n, ch.r
    if ch.D == 0:
        return unit_chow(n, r)
    arity = (r + 1) * (n + 1)
    b = Builder(arity, fold=True)
    nr = node_ring(b)
    point = []
    for i in range(r + 1):
        for m in range(n + 1):
            acc = None
            for k in range(n + 1):
                acc = nr.add(acc, nr.cmul(binv.rows[k][m], b.input(slot(n, i, k))))
            point.append(acc)
    val = evaluate(ch.prog, point, nr)
    prog = simplify(b.finish(_ref(b, val)))
    return ChowForm(prog, r=r, n=n, D=ch.D, kind=ch.kind, normalized=False)
