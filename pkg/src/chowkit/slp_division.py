"""Effective division of program-encoded polynomials.

Three procedures: exact polynomial division that avoids division
instructions altogether, a bounded-probability multivariate gcd through
subresultants of the t-homogenized inputs, and the quotient of two
power series given by their graded parts.

All random choices are driven by an explicitly passed generator; a run
that draws an unusable point raises :class:`ProbabilisticFailure` so
callers can retry or amplify.
"""

from __future__ import annotations

from fractions import Fraction
from random import Random
from typing import Sequence

from .exact_arith import Matrix, berkowitz_adjugate
from .slp import Builder, Slp, _expand_into, eval_many, evaluate, node_ring, simplify, trim


class ProbabilisticFailure(RuntimeError):
    """A randomized subroutine drew a point it cannot work with.

    The paper-style contract is a bounded error probability per run;
    this exception is the detectable part of that error event.  Callers
    either propagate it or retry with fresh randomness.
    """


def polynomial_division(f: Slp, g: Slp, d: int, a: Sequence) -> Slp:
    """Division-free program for h = g/f, assuming f divides g.

    ``d`` bounds the degree of the quotient and ``a`` is a point with
    ``f(a) != 0``.  Built literally as: alpha = f(a); H = g * v(alpha - f)
    with v the geometric series truncated at degree d; then the sum of
    the homogeneous components of H centered at a up to degree d.  The
    tail of the series only contributes to components of degree above d
    because alpha - f vanishes at a, so the result is exactly g/f
    whenever the divisibility precondition holds.  Non-divisibility is
    not detected.
    """
    if f.arity != g.arity:
        raise ValueError("divisor and dividend must share one arity")
    if d < 0:
        raise ValueError("quotient degree bound must be nonnegative")
    point = [Fraction(x) for x in a]
    alpha = evaluate(f, point)
    if alpha == 0:
        raise ValueError("polynomial division needs a base point where the divisor does not vanish")
    b = Builder(f.arity, fold=True)
    fo = b.absorb(f)
    go = b.absorb(g)
    z = b.sub(b.constant(alpha), fo)
    inv = 1 / alpha
    acc = b.constant(inv ** (d + 1))
    for i in range(d - 1, -1, -1):
        acc = b.cadd(inv ** (i + 1), b.mul(z, acc))
    h_prog = simplify(b.finish(b.mul(go, acc)))
    out = Builder(f.arity, fold=True)
    parts = _expand_into(out, h_prog, dict(enumerate(point)), d)
    total = None
    for p in parts:
        if p is None:
            continue
        total = p if total is None else out.add(total, p)
    return out.finish(total if total is not None else out.zero())


def gcd(f: Slp, g: Slp, n: int, d: int, rng: Random) -> Slp:
    """Greatest common divisor of two program-encoded polynomials.

    Bounded-probability: one run succeeds with probability at least 3/4
    over the random point, returning some nonzero scalar multiple of
    gcd(f, g) (the output is deliberately left unnormalized).  Degrees
    of f and g must be at most ``d``.

    The run draws one integer point ``a`` from [0, 8d(d+1))^n and fails
    (raises :class:`ProbabilisticFailure`) if ``f(a) = 0``.  Both inputs
    are t-homogenized at a, so their graded parts centered at a become
    the t-coefficients; the subresultant algorithm in t over Q[x] then
    locates the gcd, with every zero-test performed by evaluating at
    a + w for an independently drawn displacement w (the parts are
    homogeneous in x - a and vanish identically at a itself, so the
    center is useless as a test point; the displacement must not be a
    itself, since for homogeneous inputs the line from a through 2a
    crosses the origin and every subresultant vanishes there).  The
    extraneous Q[x]-factor q, whose value at a + w is the nonzero
    subresultant determinant, is divided out with
    :func:`polynomial_division` centered at a + w.
    """
    if f.arity != n or g.arity != n:
        raise ValueError(f"expected programs of arity {n}")
    if d < 0:
        raise ValueError("degree bound must be nonnegative")
    ell = max(1, 8 * d * (d + 1))
    a = [Fraction(rng.randrange(ell)) for _ in range(n)]
    if evaluate(f, a) == 0:
        raise ProbabilisticFailure("the random point hit the zero set of f")
    probe = [x + 1 + rng.randrange(ell) for x in a]

    b = Builder(n, fold=True)
    center = dict(enumerate(a))
    fparts = _expand_into(b, f, center, d)
    gparts = _expand_into(b, g, center, d)
    live = [p for p in fparts + gparts if p is not None]
    family = b.finish_many(live)
    values = dict(zip(live, eval_many(family, probe))) if live else {}

    def val(ref):
        return Fraction(0) if ref is None else values[ref]

    # Degree of the homogenization G in t: drop the identically-zero
    # leading parts (decided at the probe point).
    estar = next((k for k in range(d + 1) if val(gparts[k]) != 0), d + 1)
    if estar == d + 1:
        # g identically zero as far as the probe can tell, so f divides
        # every common multiple and is itself the answer.
        return trim(f)
    big_e = d - estar

    # Coefficient of t^i: F_coef(i) is the part of degree d - i, and
    # G_coef(i) the part of degree d - i after stripping t^estar.
    def f_coef(i):
        return fparts[d - i] if 0 <= i <= d else None

    def g_coef(i):
        j = big_e - i
        return gparts[estar + j] if 0 <= j <= big_e else None

    one_slp = _constant_one(n)
    if big_e == 0:
        return one_slp  # the homogenization of g is a unit in Q(x)

    def entry(j, r, c):
        # Row r of the (d + E - 2j)-row subresultant layout, column c.
        if r < big_e - j:
            return f_coef(d + r - c)
        s = r - (big_e - j)
        return g_coef(big_e + s - c)

    def entry_value(j, r, c):
        return val(entry(j, r, c))

    j0 = None
    for j in range(big_e):
        size = d + big_e - 2 * j
        m = Matrix([[entry_value(j, r, c) for c in range(size)] for r in range(size)])
        if m.det() != 0:
            j0 = j
            break
    if j0 == 0:
        return one_slp  # coprime: the zeroth subresultant is the resultant

    if j0 is None:
        # Every principal subresultant vanished: the homogenization of g
        # divides that of f, so g itself is the gcd up to the leading
        # q-factor, which here is the order-estar part of g.
        q_ref = gparts[estar]
        num_ref = None
        ring = node_ring(b)
        for k in range(estar, d + 1):
            num_ref = ring.add(num_ref, gparts[k])
    else:
        size = d + big_e - 2 * j0
        ring = node_ring(b)
        rows = [[entry(j0, r, c) for c in range(size)] for r in range(size)]
        adj, _ = berkowitz_adjugate(rows, ring)
        cof = adj[size - 1]

        def det_with_last_column(col):
            acc = None
            for r in range(size):
                acc = ring.add(acc, ring.mul(cof[r], col[r]))
            return acc

        # q is the principal subresultant coefficient; the other
        # t-coefficients of the subresultant share the first size-1
        # columns, so one adjugate serves them all.  Summing them is
        # evaluation at t = 1.
        q_ref = det_with_last_column([entry(j0, r, size - 1) for r in range(size)])
        num_ref = None
        for i in range(j0 + 1):
            c = d + big_e - j0 - 1 - i
            num_ref = ring.add(num_ref, det_with_last_column([entry(j0, r, c) for r in range(size)]))

    if q_ref is None or num_ref is None:
        raise ProbabilisticFailure("degenerate subresultant data at the random point")
    q_slp, num_slp = b.finish_many([q_ref, num_ref])
    return polynomial_division(q_slp, num_slp, d, probe)


def _constant_one(n: int) -> Slp:
    b = Builder(n)
    return b.finish(b.one())


def power_series_quotient(
    n: int,
    m: int,
    d: int,
    phi_parts: Sequence[Slp],
    psi_parts: Sequence[Slp],
    rng: Random | None = None,
) -> Slp:
    """q = phi_m^(d+1) * h for the polynomial quotient h = psi/phi.

    ``phi_parts`` and ``psi_parts`` hold the graded parts of orders
    m .. m+d of two power series phi (of exact order m) and psi, as
    programs of arity ``n``.  Built as P = (sum of psi parts weighted by
    t^i) times the truncated geometric series in -(higher phi parts),
    keeping t-coefficients 0..d and summing them.  The order m itself
    does not enter the arithmetic; it documents the caller's contract,
    and a wrong order silently yields garbage.  Passing ``rng`` enables
    a probe that phi_m is not identically zero (one random evaluation).
    """
    if len(phi_parts) != d + 1 or len(psi_parts) != d + 1:
        raise ValueError(f"need exactly d+1 = {d + 1} parts of each series")
    for p in list(phi_parts) + list(psi_parts):
        if p.arity != n:
            raise ValueError(f"expected programs of arity {n}")
    if m < 0:
        raise ValueError("the order must be nonnegative")
    if rng is not None:
        probe = [Fraction(rng.randrange(10 ** 6)) for _ in range(n)]
        if evaluate(phi_parts[0], probe) == 0:
            raise ProbabilisticFailure(
                "phi_m vanished at a random probe; the stated order m looks wrong"
            )
    if d == 0:
        return trim(psi_parts[0])  # q = phi_m^1 * (psi_m / phi_m)
    b = Builder(n, fold=True)
    phi = [b.absorb(p) for p in phi_parts]
    psi = [b.absorb(p) for p in psi_parts]

    # Powers of phi_m; pow_pm[k] is a node for phi_m^k, k >= 1.
    pow_pm: list = [None, phi[0]]
    for _ in range(2, d + 1):
        pow_pm.append(b.mul(pow_pm[-1], phi[0]))

    # (-W)^k as t-polynomials with node coefficients, W the tail of phi.
    neg_w: list = [None] + [b.neg(phi[j]) for j in range(1, d + 1)]
    wpow: list = [[None] * (d + 1) for _ in range(d + 1)]
    wpow[1] = list(neg_w)
    for k in range(2, d + 1):
        for i in range(k, d + 1):
            acc = None
            for j in range(1, i - k + 2):
                left = wpow[k - 1][i - j]
                if left is None:
                    continue
                term = b.mul(left, neg_w[j])
                acc = term if acc is None else b.add(acc, term)
            wpow[k][i] = acc

    # v_i = sum_k phi_m^(d-k) * [t^i](-W)^k, truncated at t^d.
    v: list = [pow_pm[d]] + [None] * d
    for k in range(1, d + 1):
        scale = pow_pm[d - k]  # None when d = k: the scalar 1
        for i in range(k, d + 1):
            w = wpow[k][i]
            if w is None:
                continue
            term = w if scale is None else b.mul(scale, w)
            v[i] = term if v[i] is None else b.add(v[i], term)

    # q = sum of the t-coefficients 0..d of P = (psi series) * v.
    out = None
    for i in range(d + 1):
        for i1 in range(i + 1):
            q = v[i - i1]
            if q is None:
                continue
            term = b.mul(psi[i1], q)
            out = term if out is None else b.add(out, term)
    return b.finish(out if out is not None else b.zero())
