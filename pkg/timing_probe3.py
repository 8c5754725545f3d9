import time
from fractions import Fraction

from chowkit.chow_core import GeometricResolution, chow_from_fiber
from chowkit.exact_arith import UniPoly
from chowkit.randomness import SplitRng
from chowkit.slp import ADD, CADD, CMUL, DIV, MUL, SUB, Builder, Slp, evaluate, trim


def simplify_once(prog: Slp) -> Slp:
    b = Builder(prog.arity, allow_div=DIV in prog.ops, dedup=True)
    CONST, NODE = 0, 1
    # state per old ref: (CONST, Fraction) or (NODE, new ref)
    states = []
    cadd_of: dict[int, tuple[Fraction, int]] = {}
    cmul_of: dict[int, tuple[Fraction, int]] = {}

    def resolve(r):
        if r < 0:
            return (NODE, r)
        return states[r]

    def emit_cadd(c, ref):
        if c == 0:
            return (NODE, ref)
        base = cadd_of.get(ref)
        if base is not None:
            c2, y = base
            return emit_cadd(c + c2, y)
        out = b.cadd(c, ref)
        cadd_of[out] = (c, ref)
        return (NODE, out)

    def emit_cmul(c, ref):
        if c == 0:
            return (CONST, Fraction(0))
        if c == 1:
            return (NODE, ref)
        base = cmul_of.get(ref)
        if base is not None:
            c2, y = base
            return emit_cmul(c * c2, y)
        out = b.cmul(c, ref)
        cmul_of[out] = (c, ref)
        return (NODE, out)

    for k in range(len(prog.ops)):
        op = prog.ops[k]
        ka, va = resolve(prog.a[k])
        if op == CADD:
            c = prog.const[k]
            st = (CONST, c + va) if ka == CONST else emit_cadd(c, va)
        elif op == CMUL:
            c = prog.const[k]
            st = (CONST, c * va) if ka == CONST else emit_cmul(c, va)
        else:
            kb, vb = resolve(prog.b[k])
            if op == ADD:
                if ka == CONST and kb == CONST:
                    st = (CONST, va + vb)
                elif ka == CONST:
                    st = emit_cadd(va, vb)
                elif kb == CONST:
                    st = emit_cadd(vb, va)
                else:
                    x, y = (va, vb) if va <= vb else (vb, va)
                    st = (NODE, b.add(x, y))
            elif op == SUB:
                if ka == CONST and kb == CONST:
                    st = (CONST, va - vb)
                elif kb == CONST:
                    st = emit_cadd(-vb, va)
                elif ka == CONST:
                    n = emit_cmul(Fraction(-1), vb)
                    st = emit_cadd(va, n[1]) if n[0] == NODE else (CONST, va)
                elif va == vb:
                    st = (CONST, Fraction(0))
                else:
                    st = (NODE, b.sub(va, vb))
            elif op == MUL:
                if ka == CONST and kb == CONST:
                    st = (CONST, va * vb)
                elif ka == CONST:
                    st = emit_cmul(va, vb)
                elif kb == CONST:
                    st = emit_cmul(vb, va)
                else:
                    x, y = (va, vb) if va <= vb else (vb, va)
                    st = (NODE, b.mul(x, y))
            else:  # DIV
                if ka == CONST and kb == CONST and vb != 0:
                    st = (CONST, va / vb)
                elif kb == CONST and vb != 0:
                    st = emit_cmul(Fraction(1) / vb, va)
                else:
                    xa = b.constant(va) if ka == CONST else va
                    xb = b.constant(vb) if kb == CONST else vb
                    st = (NODE, b.div(xa, xb))
        states.append(st)

    kind, val = resolve(prog.output)
    out = b.constant(val) if kind == CONST else val
    return trim(b.finish(out))


def simplify(prog: Slp) -> Slp:
    cur = trim(prog)
    while True:
        nxt = simplify_once(cur)
        if len(nxt.ops) >= len(cur.ops):
            return cur
        cur = nxt


p = UniPoly([Fraction(-1), Fraction(0), Fraction(1)])
v = (UniPoly(), UniPoly([Fraction(0), Fraction(1)]))
res = GeometricResolution(ell=(0, 0, 1), p=p, v=v)
b = Builder(2)
f_loc = b.finish(b.add(b.mul(b.input(0), b.input(0)), b.add(b.mul(b.input(1), b.input(1)), b.cadd(-1, b.zero()))))
ch = chow_from_fiber(2, 1, 2, res, [f_loc], 2)
print(f"raw length {len(ch.prog.ops)}")

t0 = time.time()
small = simplify(ch.prog)
t1 = time.time()
print(f"simplified length {len(small.ops)} in {t1 - t0:.2f}s")

rng = SplitRng(7)
pts = [[Fraction(rng.randrange(10**6)) for _ in range(6)] for _ in range(10)]
t2 = time.time()
vals2 = [evaluate(small, pt) for pt in pts]
t3 = time.time()
print(f"10 simplified evals: {t3 - t2:.2f}s -> 100 ~ {10 * (t3 - t2):.1f}s")
vals1 = [evaluate(ch.prog, pt) for pt in pts[:3]]
assert vals1 == vals2[:3], "value mismatch"
print("values agree")
