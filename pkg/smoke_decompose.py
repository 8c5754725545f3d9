"""Scratch checks for decompose.py against the dense oracles."""

from __future__ import annotations

import time
from fractions import Fraction

from chowkit.chow_core import ChowForm, GeometricResolution, chow_from_fiber, slot
from chowkit.decompose import (
    DEFAULT_N,
    amplify,
    deg_detect,
    equidim,
    intersection,
    prepare_input,
    separate,
)
from chowkit.exact_arith import UniPoly
from chowkit.oracle import DensePolyMulti, chow_points, dense_ring_ops, equal_mod_scalar
from chowkit.randomness import SplitRng
from chowkit.slp import Builder, evaluate, from_dense
from chowkit.slp_division import ProbabilisticFailure


def dense_of(prog):
    ops = dense_ring_ops(prog.arity)
    point = [DensePolyMulti.variable(i, prog.arity) for i in range(prog.arity)]
    return evaluate(prog, point, ops)


def affine_prog(terms, arity):
    return from_dense(arity, terms)


rng = SplitRng(20260816)

# --- deg_detect ------------------------------------------------------------
b = Builder(2)
zero_prog = b.finish(b.zero())
f1 = from_dense(2, {(1, 0): 1})            # y1
f2 = from_dense(2, {(2, 0): 1, (0, 2): 1, (0, 0): -1})  # circle
assert deg_detect([f1, f2, zero_prog], 3, 64, rng.split("dd")) == [1, 2, -1]
print("deg_detect ok")

# --- amplify ---------------------------------------------------------------
counter = {"n": 0}

def flaky(child):
    counter["n"] += 1
    if counter["n"] % 4 == 0:
        return from_dense(1, {(1,): 2})    # wrong value every 4th run
    return from_dense(1, {(1,): 1})

got = amplify(flaky, 16, rng.split("amp"), degree_bound=1)
assert dense_of(got) == DensePolyMulti.variable(0, 1)
print("amplify ok")

# --- intersection: plane in P^2 cut by x1 ----------------------------------
# Ch of the line {x2 = 0}: U_00 U_11 - U_01 U_10.
plane = from_dense(6, {(1, 0, 0, 0, 1, 0): 1, (0, 1, 0, 1, 0, 0): -1})
ch_plane = ChowForm(plane, r=1, n=2, D=1)
out = intersection(2, 1, 1, f1, 1, ch_plane, rng.split("i1"))
assert (out.r, out.n, out.D) == (0, 2, 1)
assert dense_of(out.prog) == DensePolyMulti.variable(0, 3), dense_of(out.prog)
print("intersection plane/x1 ok")

# --- circle form from the hypersurface oracle, then cut by x1 ---------------
from chowkit.oracle import chow_hypersurface

circle_h = DensePolyMulti(3, {(2, 0, 0): -1, (0, 2, 0): 1, (0, 0, 2): 1})
circle_form = chow_hypersurface(circle_h)
ch_circle = ChowForm(from_dense(6, circle_form.terms), r=1, n=2, D=2)
assert ch_circle.D == 2 and ch_circle.normalized
out2 = intersection(2, 1, 2, f1, 1, ch_circle, rng.split("i2"))
want2 = chow_points([(1, 0, 1), (1, 0, -1)])
assert dense_of(out2.prog) == want2, (dense_of(out2.prog), want2)
print("intersection circle/x1 ok")

# degree law: generic line cuts the circle in 2 points
line = from_dense(2, {(0, 0): 5, (1, 0): 3, (0, 1): 7})
out3 = intersection(2, 1, 2, line, 1, ch_circle, rng.split("i3"))
assert out3.D == 2
assert not equal_mod_scalar(dense_of(out3.prog), want2)[0]
print("intersection circle/generic-line ok (D=2)")

# constant polynomial: empty intersection at any degree bound
for dconst in (0, 1):
    one_prog = from_dense(2, {(0, 0): 1})
    out4 = intersection(2, 1, 2, one_prog, dconst, ch_circle, rng.split(f"i4{dconst}"))
    assert out4.D == 0, out4.D
print("intersection with constants ok (unit)")

# --- separate ---------------------------------------------------------------
pts = chow_points([(1, 0, 1), (1, 1, 1)])
ch2 = ChowForm(from_dense(3, pts.terms), r=0, n=2, D=2)
y_form, w_form = separate(2, 0, 2, f1, 1, ch2, rng.split("s1"))
assert dense_of(y_form.prog) == chow_points([(1, 0, 1)])
assert dense_of(w_form.prog) == chow_points([(1, 1, 1)])
print("separate two points by y1 ok")

one_prog = from_dense(2, {(0, 0): 1})
y5, w5 = separate(2, 0, 2, one_prog, 1, ch2, rng.split("s2"))
assert y5.D == 0 and w5.D == 2
assert dense_of(w5.prog) == pts
print("separate by constant ok")

y6, w6 = separate(2, 0, 2, zero_prog, 1, ch2, rng.split("s3"))
assert y6 is ch2 and w6.D == 0
print("separate by zero ok")

# with the circle: y1 vanishes at no component
y7, w7 = separate(2, 1, 2, f1, 2, ch_circle, rng.split("s4"))
assert y7.D == 0 and w7.D == 2
print("separate circle by y1 ok")

# assumption-free variant
y8, w8 = separate(2, 0, 2, f1, 1, ch2, rng.split("s5"), assumption_holds=False)
assert dense_of(y8.prog) == chow_points([(1, 0, 1)])
print("separate (assumption-free) ok")

# --- prepare_input sanity ----------------------------------------------------
fs_h = [from_dense(4, {(0, 1, 0, 1): 1}), from_dense(4, {(0, 0, 1, 1): 1})]
g_one = from_dense(4, {(0, 0, 0, 0): 1})
prep = prepare_input(fs_h, g_one, 2, 16, rng.split("prep"))
assert len(prep.qs) == 4 and prep.qs[0].arity == 3
# every q vanishes where all f do: pick x = (1, 5, 7, 0) on V(f1, f2),
# map through y = (Bx)/ (Bx)_0 to affine coordinates.
x = [Fraction(1), Fraction(5), Fraction(7), Fraction(0)]
bx = prep.B.matvec(x)
assert bx[0] != 0
y = [bx[k] / bx[0] for k in range(1, 4)]
for q in prep.qs:
    val = evaluate(q, y)
    assert val == 0, val
assert evaluate(prep.h, y) == 1
print("prepare_input ok")

# --- equidim: P^1 trivial system ---------------------------------------------
p1 = equidim(
    [from_dense(2, {(1, 0): 1}), from_dense(2, {(0, 1): 1})],
    from_dense(2, {(0, 0): 1}),
    1,
    rng.split("e1"),
    N=64,
)
assert p1.degrees == (0, 0), p1.degrees
print("equidim P^1 empty ok")

# --- equidim: identically zero system ----------------------------------------
bz = Builder(3)
z3 = bz.finish(bz.zero())
p2 = equidim([z3], from_dense(3, {(0, 0, 0): 1}), 1, rng.split("e2"), N=64)
assert p2.degrees == (0, 0, 1)
assert p2.forms[2].D == 1 and p2.forms[2].r == 2
print("equidim all-zero ok")

# --- equidim: plane + line in P^3 --------------------------------------------
t0 = time.time()
fs4 = [from_dense(4, {(0, 1, 0, 1): 1}), from_dense(4, {(0, 0, 1, 1): 1})]
p3 = equidim(fs4, from_dense(4, {(0, 0, 0, 0): 1}), 2, rng.split("e3"), N=DEFAULT_N, attempts=3)
dt = time.time() - t0
print("equidim plane+line degrees:", p3.degrees, f"({dt:.1f}s)")
assert p3.degrees == (0, 1, 1, 0), p3.degrees

plane_d = dense_of(p3.forms[2].prog)
want_plane = DensePolyMulti(12)
import itertools
for perm in itertools.permutations(range(3)):
    sign = 1
    for i in range(3):
        for j in range(i + 1, 3):
            if perm[i] > perm[j]:
                sign = -sign
    mono = [0] * 12
    for i in range(3):
        mono[slot(3, i, perm[i])] += 1
    want_plane = want_plane + DensePolyMulti(12, {tuple(mono): sign})
okp, _ = equal_mod_scalar(plane_d, want_plane)
assert okp, "plane form mismatch"

line_d = dense_of(p3.forms[1].prog)
want_line = DensePolyMulti(
    8,
    {
        tuple(1 if m in (slot(3, 0, 0), slot(3, 1, 3)) else 0 for m in range(8)): 1,
        tuple(1 if m in (slot(3, 0, 3), slot(3, 1, 0)) else 0 for m in range(8)): -1,
    },
)
okl, _ = equal_mod_scalar(line_d, want_line)
assert okl, "line form mismatch"
print("equidim plane+line forms match the duals")

print("ALL SMOKE OK")
