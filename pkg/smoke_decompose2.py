"""Second round of decompose checks: harder equidim geometries."""

from __future__ import annotations

import time
from fractions import Fraction

from chowkit.decompose import equidim
from chowkit.oracle import DensePolyMulti, chow_points, equal_mod_scalar
from chowkit.randomness import SplitRng
from chowkit.slp import evaluate, from_dense
from chowkit.slp_division import ProbabilisticFailure


def dense_of(prog):
    from chowkit.oracle import dense_ring_ops

    ops = dense_ring_ops(prog.arity)
    point = [DensePolyMulti.variable(i, prog.arity) for i in range(prog.arity)]
    return evaluate(prog, point, ops)


rng = SplitRng(99)

# --- two skew lines in P^3 ----------------------------------------------------
# L1 = {x1 = x2 = 0}, L2 = {x0 = x3 = 0}: V(x1 x0, x1 x3, x2 x0, x2 x3)
fs = [
    from_dense(4, {(1, 1, 0, 0): 1}),
    from_dense(4, {(0, 1, 0, 1): 1}),
    from_dense(4, {(1, 0, 1, 0): 1}),
    from_dense(4, {(0, 0, 1, 1): 1}),
]
g1 = from_dense(4, {(0, 0, 0, 0): 1})
t0 = time.time()
out = equidim(fs, g1, 2, rng.split("skew"), N=2 ** 20, attempts=3)
print(f"skew lines degrees: {out.degrees} ({time.time() - t0:.1f}s)")
assert out.degrees == (0, 2, 0, 0), out.degrees

# the r=1 form should vanish exactly when a configuration touches L1 or L2:
# check at a few explicit configurations.
form = out.forms[1]
den = dense_of(form.prog)


def config(u0, u1):
    return [Fraction(c) for c in (*u0, *u1)]


# hyperplanes through (1:0:0:5) and (0:3:1:0)... pick pairs meeting L1
u_l1 = config((0, 7, 3, 0), (5, 2, 4, -5))   # both vanish on some (a:0:0:b)?
# <(0,7,3,0), (a,0,0,b)> = 0 always? = 0*a + 0 + 0 + 0*b = 0 -> first contains L1
# second: 5a - 5b = 0 -> meets L1 at (1:0:0:1)
assert den.eval(u_l1) == 0
u_l2 = config((1, 0, 0, 0), (0, 5, -15, 0))  # first contains L2 (x0=0 on L2)
# second: 5 x1 - 15 x2 on (0:a:b:0): 5a - 15b = 0 -> meets L2 at (0:3:1:0)
assert den.eval(u_l2) == 0
u_no = config((1, 2, 3, 4), (4, 3, 2, 1))
assert den.eval(u_no) != 0
print("skew lines incidence checks ok")

# --- point + line in P^2 -------------------------------------------------------
# V(x1 * x2, x1 * (x1 - x0)) = line {x1 = 0} union point (1:1:0)
fs2 = [
    from_dense(3, {(0, 1, 1): 1}),
    from_dense(3, {(0, 2, 0): 1, (1, 1, 0): -1}),
]
t0 = time.time()
out2 = equidim(fs2, from_dense(3, {(0, 0, 0): 1}), 2, rng.split("ptline"), N=2 ** 20, attempts=3)
print(f"point+line degrees: {out2.degrees} ({time.time() - t0:.1f}s)")
assert out2.degrees == (1, 1, 0), out2.degrees
ok0, _ = equal_mod_scalar(dense_of(out2.forms[0].prog), chow_points([(1, 1, 0)]))
assert ok0, "point form mismatch"
# line {x1=0} dual: Ch(U_0, U_1) = U_00 U_12 - U_02 U_10
want_line = DensePolyMulti(6, {(1, 0, 0, 0, 0, 1): 1, (0, 0, 1, 1, 0, 0): -1})
ok1, _ = equal_mod_scalar(dense_of(out2.forms[1].prog), want_line)
assert ok1, "line form mismatch"
print("point+line forms ok")

# --- inequation removing one component -----------------------------------------
# plane + line again, but g = x3 kills the plane {x3 = 0}
fs3 = [from_dense(4, {(0, 1, 0, 1): 1}), from_dense(4, {(0, 0, 1, 1): 1})]
g3 = from_dense(4, {(0, 0, 0, 1): 1})
t0 = time.time()
out3 = equidim(fs3, g3, 2, rng.split("gsplit"), N=2 ** 20, attempts=3)
print(f"plane+line with g=x3 degrees: {out3.degrees} ({time.time() - t0:.1f}s)")
assert out3.degrees == (0, 1, 0, 0), out3.degrees
want_l = DensePolyMulti(
    8,
    {
        (1, 0, 0, 0, 0, 0, 0, 1): 1,
        (0, 0, 0, 1, 1, 0, 0, 0): -1,
    },
)
okl, _ = equal_mod_scalar(dense_of(out3.forms[1].prog), want_l)
assert okl, "line-only form mismatch"
print("inequation split ok")

# --- zero-dimensional system ----------------------------------------------------
# V(x1^2 - x0^2, x2) = {(1:1:0), (1:-1:0)}
fs4 = [
    from_dense(3, {(0, 2, 0): 1, (2, 0, 0): -1}),
    from_dense(3, {(0, 0, 1): 1}),
]
t0 = time.time()
out4 = equidim(fs4, from_dense(3, {(0, 0, 0): 1}), 2, rng.split("dim0"), N=2 ** 20, attempts=3)
print(f"two points degrees: {out4.degrees} ({time.time() - t0:.1f}s)")
assert out4.degrees == (2, 0, 0), out4.degrees
okp, _ = equal_mod_scalar(
    dense_of(out4.forms[0].prog), chow_points([(1, 1, 0), (1, -1, 0)])
)
assert okp, "two-point form mismatch"
print("zero-dimensional system ok")

print("ALL SMOKE-2 OK")
