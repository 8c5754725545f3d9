"""Instrumented V(2,2) fiber run: where do the arenas blow up?"""
import time
from fractions import Fraction

from chowkit import chow_core, lifting
from chowkit.exact_arith import Matrix, UniPoly
from chowkit.chow_core import GeometricResolution, chow_from_fiber
from chowkit.slp import Builder

t_start = time.time()


def stamp(msg):
    print(f"[{time.time() - t_start:7.1f}s] {msg}", flush=True)


real_norm = lifting.norm_approx


def traced_norm(h, delta, inp, kappa):
    t0 = time.time()
    f, g = real_norm(h, delta, inp, kappa)
    stamp(f"norm_approx r={inp.r} -> |f|={len(f.ops)} |g|={len(g.ops)} in {time.time()-t0:.1f}s")
    return f, g


real_ndn = lifting.num_den_newton


def traced_ndn(f_sys, n, r, d, m):
    t0 = time.time()
    gs, f0 = real_ndn(f_sys, n, r, d, m)
    stamp(f"  num_den_newton n={n} r={r} m={m} -> arena={len(f0.ops)} in {time.time()-t0:.1f}s")
    return gs, f0


lifting.num_den_newton = traced_ndn
chow_core.norm_approx = traced_norm

from chowkit import slp as slp_mod

real_gp = slp_mod.graded_parts


def traced_gp(f, g, bound, a):
    t0 = time.time()
    parts = real_gp(f, g, bound, a)
    stamp(f"graded_parts |f|={len(f.ops)} |g|={len(g.ops)} bound={bound} -> arena={len(parts[0].ops)} in {time.time()-t0:.1f}s")
    return parts


chow_core.graded_parts = traced_gp

from chowkit import slp_division as sd

real_pd = sd.polynomial_division


def traced_pd(f, g, d, a):
    t0 = time.time()
    out = real_pd(f, g, d, a)
    stamp(f"polynomial_division |f|={len(f.ops)} |g|={len(g.ops)} d={d} -> {len(out.ops)} in {time.time()-t0:.1f}s")
    return out


chow_core.polynomial_division = traced_pd

real_pq = sd.power_series_quotient


def traced_pq(n, m, d, phi_parts, psi_parts, rng=None):
    t0 = time.time()
    out = real_pq(n, m, d, phi_parts, psi_parts, rng)
    stamp(f"power_series_quotient d={d} parts~{len(phi_parts[0].ops)} -> {len(out.ops)} in {time.time()-t0:.1f}s")
    return out


chow_core.power_series_quotient = traced_pq

real_sm = slp_mod.simplify_many


def traced_sm(progs):
    t0 = time.time()
    out = real_sm(progs)
    if progs and len(progs[0].ops) > 50000:
        stamp(f"  simplify_many {len(progs)} progs arena {len(progs[0].ops)} -> {len(out[0].ops)} in {time.time()-t0:.1f}s")
    return out


chow_core.simplify_many = traced_sm
lifting.simplify_many = traced_sm

# V(2,2) Veronese fiber: points (x1, x2) in {+-1}^2 mapped by degree-2
# monomials, z-coordinates z0 = y00, z_i = y_(2ei) - y00, cut coords
# z1, z2; remaining chart coords t1 = x1 (slot of y_(e0+e1)), t2 = x2,
# t3 = x1 x2 (slot of y_(e1+e2)).
lvals = [Fraction(1) + 2 * s1 + 4 * s2 for s1 in (1, -1) for s2 in (1, -1)]
pts = [(s1, s2) for s1 in (1, -1) for s2 in (1, -1)]
p = UniPoly([1])
for lv in lvals:
    p = p * UniPoly([-lv, 1])
print("p =", p.coeffs)
W = Matrix([[lv ** k for k in range(4)] for lv in lvals])
cols = {
    0: [Fraction(0)] * 4,
    1: [Fraction(0)] * 4,
    2: [Fraction(s1) for s1, s2 in pts],
    3: [Fraction(s2) for s1, s2 in pts],
    4: [Fraction(s1 * s2) for s1, s2 in pts],
}
v = []
for j in range(5):
    sol = W.solve(cols[j])
    v.append(UniPoly(sol))
res = GeometricResolution(ell=(1, 0, 0, 2, 4, 0), p=p, v=tuple(v))

bf = Builder(5)
t1, t2, t3 = bf.input(2), bf.input(3), bf.input(4)
z1, z2 = bf.input(0), bf.input(1)
f1 = bf.sub(bf.cadd(1, z1), bf.mul(t1, t1))
f2 = bf.sub(bf.cadd(1, z2), bf.mul(t2, t2))
f3 = bf.sub(t3, bf.mul(t1, t2))
floc = bf.finish_many([f1, f2, f3])

stamp("start chow_from_fiber(5, 2, 4, ...)")
ch = chow_from_fiber(5, 2, 4, res, floc, 2)
stamp(f"done: |prog| = {len(ch.prog.ops)}")
pt0 = chow_core.normalization_point(5, 2)
print("value at normalization point:", chow_core.evaluate(ch.prog, pt0))
