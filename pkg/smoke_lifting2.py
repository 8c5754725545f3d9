import random
from fractions import Fraction

from chowkit.exact_arith import UniPoly
from chowkit.lifting import num_den_newton
from chowkit.slp import Builder, eval_many, evaluate, expand
from chowkit.slp_division import gcd
from chowkit.oracle import DensePolyMulti, dense_ring_ops

F = Fraction

# Circle-style family: F = (x1^2 + x2^2 - 1 - t1, x2 - x1*t2), r = 2, n = 2.
# Substituting the m-fold iterate into F and expanding in t must kill all
# graded parts of degree < 2^m.
b = Builder(4)
t1, t2, x1, x2 = (b.input(i) for i in range(4))
f1 = b.sub(b.add(b.mul(x1, x1), b.mul(x2, x2)), b.cadd(1, t1))
f2 = b.sub(x2, b.mul(x1, t2))
fam = b.finish_many([f1, f2])

for m in (1, 2, 3):
    gs, f0 = num_den_newton(list(fam), 2, 2, 2, m)
    # x(0) = (1, 0) solves the fiber system at t = 0.  Build the residual
    # F_j(t, g/f0) * f0^2 as programs in t alone via substitution at the
    # dense-polynomial level (cheap here, 2 params).
    ops = dense_ring_ops(2)
    tvals = [DensePolyMulti.variable(0, 2), DensePolyMulti.variable(1, 2)]
    point = tvals + [DensePolyMulti.constant(F(1), 2), DensePolyMulti.constant(F(0), 2)]
    vals = eval_many(list(gs) + [f0], point, ops)
    gv, f0v = vals[:2], vals[2]
    # residuals: f1(t, g1/f0, g2/f0) * f0^2 and f2(...) * f0^2
    r1 = gv[0] * gv[0] + gv[1] * gv[1] - (f0v * f0v) - (f0v * f0v) * tvals[0]
    r2 = gv[1] * f0v - gv[0] * f0v * tvals[1]
    order = 2**m
    for res in (r1, r2):
        # f0(0) != 0, so orders of res and res/f0^2 agree; check low parts vanish
        for mono, c in res.terms.items():
            if sum(mono) < order:
                raise AssertionError((m, mono, c))
    print(f"residual order 2^{m} ok")

# gcd with g identically zero returns (a scalar multiple of) f
bz = Builder(1)
fz = bz.finish(bz.cadd(-1, bz.mul(bz.input(0), bz.input(0))))  # x^2 - 1
bz2 = Builder(1)
zz = bz2.finish(bz2.zero())
h = gcd(fz, zz, 1, 2, random.Random(3))
for x in (F(0), F(2), F(5), F(-3)):
    assert evaluate(h, [x]) == x * x - 1, (x, evaluate(h, [x]))
print("gcd with zero g ok")
