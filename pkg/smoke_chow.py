import random
import time
from fractions import Fraction

from chowkit.chow_core import (
    ChowForm,
    GeometricResolution,
    char_poly_from_chow,
    chow_from_fiber,
    chow_from_geomres,
    generic_resolution,
    geom_res_fiber,
    group_degree,
    parse_chow,
    serialize_chow,
    unit_chow,
)
from chowkit.exact_arith import UniPoly
from chowkit.oracle import (
    DensePolyMulti,
    chow_hypersurface,
    chow_points,
    dense_ring_ops,
    equal_mod_scalar,
)
from chowkit.slp import Builder, evaluate
from chowkit.slp_division import ProbabilisticFailure

F = Fraction


def dense(prog):
    nv = prog.arity
    point = [DensePolyMulti.variable(i, nv) for i in range(nv)]
    val = evaluate(prog, point, dense_ring_ops(nv))
    return val if val is not None else DensePolyMulti(nv)


def poly_prog(arity, build):
    b = Builder(arity, dedup=True)
    return b.finish(build(b))


t0 = time.time()

# 1. two points (1:1), (1:-1) in P^1, dimension zero
res2 = GeometricResolution(ell=(0, 1), p=UniPoly([-1, 0, 1]), v=(UniPoly([0, 1]),))
f1 = poly_prog(1, lambda b: b.cadd(F(-1), b.mul(b.input(0), b.input(0))))
ch2 = chow_from_fiber(1, 0, 2, res2, [f1], 2)
oracle2 = chow_points([(F(1), F(1)), (F(1), F(-1))])
assert dense(ch2.prog) == oracle2, (dense(ch2.prog).terms, oracle2.terms)
print("two points exact:", dense(ch2.prog).terms)

# 2. plane V(x2) in P^2
resp = GeometricResolution(ell=(0, 0, 1), p=UniPoly([0, 1]), v=(UniPoly(), UniPoly()))
fx2 = poly_prog(2, lambda b: b.input(1))
chp = chow_from_fiber(2, 1, 1, resp, [fx2], 1)
dp = dense(chp.prog)
x2d = DensePolyMulti.variable(2, 3)
oraclep = chow_hypersurface(x2d)
okp, cp = equal_mod_scalar(dp, oraclep)
print("plane mod scalar:", okp, cp, "terms:", dp.terms)
assert okp

# 3. circle x1^2 + x2^2 - x0^2
resc = GeometricResolution(ell=(0, 0, 1), p=UniPoly([-1, 0, 1]), v=(UniPoly(), UniPoly([0, 1])))
fcirc = poly_prog(
    2,
    lambda b: b.cadd(
        F(-1), b.add(b.mul(b.input(0), b.input(0)), b.mul(b.input(1), b.input(1)))
    ),
)
chc = chow_from_fiber(2, 1, 2, resc, [fcirc], 2)
v0, v1, v2 = (DensePolyMulti.variable(i, 3) for i in range(3))
circ_dense = v1 * v1 + v2 * v2 - v0 * v0
oraclec = chow_hypersurface(circ_dense)
dc = dense(chc.prog)
okc, cc = equal_mod_scalar(dc, oraclec)
print("circle mod scalar:", okc, cc, "len(prog) =", len(chc.prog), "terms:", len(dc.terms))
assert okc
print("circle time: %.2fs" % (time.time() - t0))

# group degrees
rng = random.Random(7)
for g in range(2):
    assert group_degree(chc.prog, 2, g, 4, rng) == 2

# 4. fiber back out of the circle form
d0, fib = geom_res_fiber(2, 1, 2, chc, (F(0),), (F(0), F(0), F(1)))
print("fiber:", d0, fib.p.coeffs, [w.coeffs for w in fib.v])
assert d0 == 2 and fib.p == UniPoly([-1, 0, 1])
assert fib.v[0].is_zero() and fib.v[1] == UniPoly([0, 1])

try:
    geom_res_fiber(2, 1, 2, chc, (F(0),), (F(0), F(1), F(0)))
    raise AssertionError("x1 should not separate")
except ProbabilisticFailure as exc:
    print("expected failure:", exc)

# 5. parametric family for the circle, top coefficient list unreduced
b = Builder(1)
y = b.input(0)
p_coeffs = b.finish_many([b.cadd(F(-1), b.mul(y, y)), b.zero(), b.one()])
bw = Builder(1)
yw = bw.input(0)
w1c0, w1c1, w2c0, w2c1, w2c2 = bw.finish_many(
    [bw.zero(), bw.cmul(F(2), yw), bw.zero(), bw.zero(), bw.constant(F(2))]
)
res_par = GeometricResolution(
    ell=(0, 0, 1), p=p_coeffs, v=((w1c0, w1c1), (w2c0, w2c1, w2c2))
)
chg = chow_from_geomres(2, 1, res_par, random.Random(11))
okg, cg = equal_mod_scalar(dense(chg.prog), oraclec)
print("geomres circle mod scalar:", okg, cg)
assert okg and chg.D == 2

# 6. char poly and generic resolution on the circle
cpoly = char_poly_from_chow(chc)
rr = random.Random(3)
upt = [F(rr.randrange(100)) for _ in range(6)]
vals = [evaluate(cpoly.prog, upt + [F(t), F(0)]) for t in range(3)]
pT = [vals[0], None, None]
# interpolate degree-2 in T_0
c0 = vals[0]
c2 = (vals[2] - 2 * vals[1] + vals[0]) / 2
c1 = vals[1] - vals[0] - c2
lead = evaluate(cpoly.leading, upt)
assert c2 == lead, (c2, lead)
print("char poly leading matches a_D")

P, W = generic_resolution(chc)
xi = (F(1), F(3, 5), F(4, 5))
u1 = [F(0), F(-4, 3), F(1)]  # L_1 vanishes at xi
u0 = [F(rr.randrange(50)) for _ in range(3)]
t_val = u0[0] + u0[1] * xi[1] + u0[2] * xi[2]
point = u0 + u1
assert evaluate(P, point + [t_val]) == 0
pvals = [evaluate(P, point + [F(t)]) for t in range(4)]
pc3 = UniPoly(
    # cubic fit is overkill for degree 2 but cheap insurance
    __import__("chowkit.chow_core", fromlist=["_interpolate"])._interpolate(pvals).coeffs
)
dP = pc3.derivative()
for i, xv in ((0, xi[1]), (1, xi[2])):
    wv = evaluate(W[i], point + [t_val])
    assert dP.eval(t_val) * xv == wv, (i, dP.eval(t_val), xv, wv)
print("generic resolution identity holds")

# 7. serialize round trip
blob = serialize_chow(chc)
back = parse_chow(blob)
assert serialize_chow(back) == blob
assert back.normalized and back.D == 2 and back.r == 1 and back.n == 2
u = unit_chow(3, 1)
assert parse_chow(serialize_chow(u)).D == 0
print("serialization round trip ok")

# 8. r = 0 geomres path: two points again, direct flavor
ch2b = chow_from_geomres(1, 0, res2, random.Random(2))
assert dense(ch2b.prog) == oracle2
print("r=0 geomres ok")

print("total %.2fs" % (time.time() - t0))
