import random
from fractions import Fraction

from chowkit.exact_arith import UniPoly
from chowkit.lifting import LiftingInput, norm_approx, num_den_newton
from chowkit.slp import Builder, evaluate

F = Fraction


def slp_x_minus_t():
    b = Builder(2)
    return b.finish(b.sub(b.input(1), b.input(0)))


def slp_x2_minus_1_minus_t():
    b = Builder(2)
    x = b.input(1)
    return b.finish(b.sub(b.mul(x, x), b.cadd(1, b.input(0))))


# Example: F = (x - t), m = 1 -> g1 = t, f0 = 1
gs, f0 = num_den_newton([slp_x_minus_t()], 1, 1, 1, 1)
for _ in range(10):
    t, x = F(random.randrange(-9, 9)), F(random.randrange(-9, 9))
    g1v = evaluate(gs[0], [t, x])
    f0v = evaluate(f0, [t, x])
    assert g1v == t * f0v and f0v == 1, (g1v, f0v)
print("newton linear ok")

# Example: F = (x^2 - 1 - t), m = 1 -> g1 = x^2 + 1 + t, f0 = 2x
gs, f0 = num_den_newton([slp_x2_minus_1_minus_t()], 1, 1, 2, 1)
for _ in range(10):
    t, x = F(random.randrange(-9, 9)), F(random.randrange(1, 9))
    assert evaluate(gs[0], [t, x]) == x * x + 1 + t
    assert evaluate(f0, [t, x]) == 2 * x
print("newton quadratic step ok")

# m = 2 equals two literal Newton steps with divisions, at 10 random points
gs2, f02 = num_den_newton([slp_x2_minus_1_minus_t()], 1, 1, 2, 2)
rng = random.Random(7)
for _ in range(10):
    t = F(rng.randrange(-4, 5))
    x = F(rng.randrange(1, 9))
    cur = x
    for _ in range(2):
        cur = cur - (cur * cur - 1 - t) / (2 * cur)
    num = evaluate(gs2[0], [t, x])
    den = evaluate(f02, [t, x])
    assert den != 0 and num / den == cur, (num, den, cur)
print("newton two-step composition ok")

# m = 0 is the identity
gs0, f00 = num_den_newton([slp_x2_minus_1_minus_t()], 1, 1, 2, 0)
assert evaluate(gs0[0], [F(3), F(5)]) == 5 and evaluate(f00, [F(3), F(5)]) == 1
print("newton zero-step ok")

# Lifting input for W = V(x^2 - 1 - t): p = eta^2 - 1, v = (eta)
inp = LiftingInput(
    f_sys=[slp_x2_minus_1_minus_t()],
    p=UniPoly([-1, 0, 1]),
    v=[UniPoly.variable()],
    d=2,
    n=1,
    r=1,
)
print("lifting input invariant ok")


def series_mod(prog, kappa):
    """Coefficients of prog's value as a power series in t, mod t^(kappa+1)."""
    # single parameter: evaluate at enough points and interpolate? easier:
    # evaluate over truncated jet arithmetic using UniPoly mod t^(kappa+1)
    from chowkit.exact_arith import RingOps

    trunc = UniPoly([0] * (kappa + 1) + [1])
    ring = RingOps(
        zero=UniPoly(),
        one=UniPoly.constant(1),
        add=lambda u, w: u + w,
        sub=lambda u, w: u - w,
        mul=lambda u, w: (u * w) % trunc,
        cadd=lambda c, u: u + UniPoly.constant(c),
        cmul=lambda c, u: u * F(c),
    )
    return evaluate(prog, [UniPoly.variable()], ring)


def check_norm(h, delta, kappa, expect_coeffs):
    f, g = norm_approx(h, delta, inp, kappa)
    fs = series_mod(f, kappa)
    gs_ = series_mod(g, kappa)
    # compare g/f with the expected series: g = expect * f mod t^(kappa+1)
    expect = UniPoly(expect_coeffs)
    trunc = UniPoly([0] * (kappa + 1) + [1])
    assert (gs_ - (expect * fs) % trunc) % trunc == UniPoly(), (gs_, fs)


# h = 1 (delta 0): norm is 1
b = Builder(2)
one_prog = b.finish(b.one())
check_norm(one_prog, 0, 3, [1])
print("norm of unit ok")

# h = x: product of the two roots of x^2 = 1 + t is -(1+t)
b = Builder(2)
x_prog = b.finish(b.input(1))
for kappa in (0, 1, 2, 5):
    coeffs = [-1, -1] if kappa >= 1 else [-1]
    check_norm(x_prog, 1, kappa, coeffs)
print("norm of x ok")

# h = x^2: (1+t)^2
b = Builder(2)
x = b.input(1)
x2_prog = b.finish(b.mul(x, x))
check_norm(x2_prog, 2, 4, [1, 2, 1])
print("norm of x^2 ok")

# multiplicativity on a small instance: N(x * (x+1)) = N(x) N(x+1)
b = Builder(2)
x = b.input(1)
hx = b.finish(b.mul(x, b.cadd(1, x)))
f1, g1 = norm_approx(x_prog, 1, inp, 4)
b2 = Builder(2)
xp1 = b2.finish(b2.cadd(1, b2.input(1)))
f2, g2 = norm_approx(xp1, 1, inp, 4)
f12, g12 = norm_approx(hx, 2, inp, 4)
trunc = UniPoly([0] * 5 + [1])
lhs = (series_mod(g12, 4) * series_mod(f1, 4) % trunc * series_mod(f2, 4)) % trunc
rhs = (series_mod(f12, 4) * series_mod(g1, 4) % trunc * series_mod(g2, 4)) % trunc
assert (lhs - rhs) % trunc == UniPoly(), (lhs, rhs)
print("norm multiplicativity ok")

print("all lifting smoke tests passed")
