import time
from fractions import Fraction

from chowkit.chow_core import GeometricResolution, chow_from_fiber
from chowkit.exact_arith import UniPoly
from chowkit.randomness import SplitRng
from chowkit.slp import Builder, evaluate

# circle x1^2 + x2^2 - x0^2 fiber at x1 = 0: points (1, 0, +-1)
t0 = time.time()
p = UniPoly([Fraction(-1), Fraction(0), Fraction(1)])  # eta^2 - 1
v = (UniPoly(), UniPoly([Fraction(0), Fraction(1)]))  # x1 = 0, x2 = eta
res = GeometricResolution(ell=(0, 0, 1), p=p, v=v)
b = Builder(2)
f_loc = b.finish(b.add(b.mul(b.input(0), b.input(0)), b.add(b.mul(b.input(1), b.input(1)), b.cadd(-1, b.zero()))))
ch = chow_from_fiber(2, 1, 2, res, [f_loc], 2)
t1 = time.time()
print(f"construction: {t1 - t0:.2f}s, length {len(ch.prog.ops)}")

rng = SplitRng(7)
pts = [[Fraction(rng.randrange(10**6)) for _ in range(6)] for _ in range(10)]
t2 = time.time()
vals = [evaluate(ch.prog, pt) for pt in pts]
t3 = time.time()
print(f"10 evals: {t3 - t2:.2f}s -> 100 evals ~ {10 * (t3 - t2):.1f}s")
