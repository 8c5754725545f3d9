import time
from fractions import Fraction

from chowkit.chow_core import GeometricResolution, chow_from_fiber, monomial_exponents
from chowkit.exact_arith import Matrix, UniPoly
from chowkit.slp import Builder, evaluate

# Veronese V(2,2) in P^5, z-coordinates:
# z0 = y_{x0^2}, z1 = y_{x1^2} - z0, z2 = y_{x2^2} - z0,
# z3 = y_{x0x1}, z4 = y_{x0x2}, z5 = y_{x1x2}
# fiber: x in {(1,+-1,+-1)}, affine zeta = (0, 0, x1, x2, x1x2)
# primitive form ell = z0 + 2 z3 + 4 z4 -> 1 + 2 x1 + 4 x2

pts = [(1, 1), (1, -1), (-1, 1), (-1, -1)]
lvals = [Fraction(1 + 2 * a + 4 * b) for a, b in pts]
p = UniPoly([Fraction(1)])
for lv in lvals:
    p = p * UniPoly([-lv, Fraction(1)])
print("p =", p.coeffs if hasattr(p, 'coeffs') else [p.coeff(k) for k in range(5)])

# interpolation matrix in powers of ell-values
W = Matrix([[lv ** k for k in range(4)] for lv in lvals])
zeta_cols = [
    [Fraction(0)] * 4,                      # zeta1
    [Fraction(0)] * 4,                      # zeta2
    [Fraction(a) for a, b in pts],          # zeta3 = x1
    [Fraction(b) for a, b in pts],          # zeta4 = x2
    [Fraction(a * b) for a, b in pts],      # zeta5
]
v = tuple(UniPoly(W.solve(col)) for col in zeta_cols)
res = GeometricResolution(ell=(1, 0, 0, 2, 4, 0), p=p, v=v)

# local equations in affine coords (zeta1..zeta5), t1 = zeta3, t2 = zeta4
b = Builder(5)
z1, z2, t1, t2, z5 = (b.input(i) for i in range(5))
f1 = b.sub(b.cadd(1, z1), b.mul(t1, t1))
f2 = b.sub(b.cadd(1, z2), b.mul(t2, t2))
f3 = b.sub(z5, b.mul(t1, t2))
floc = b.finish_many([f1, f2, f3])

t0 = time.time()
ch = chow_from_fiber(5, 2, 4, res, floc, 2)
t1_ = time.time()
print(f"chow_from_fiber(5,2,4): {t1_ - t0:.1f}s, length {len(ch.prog.ops)}")
