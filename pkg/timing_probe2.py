import time
from fractions import Fraction

from chowkit.chow_core import GeometricResolution, chow_from_fiber
from chowkit.exact_arith import UniPoly
from chowkit.randomness import SplitRng
from chowkit.slp import ADD, CADD, CMUL, DIV, MUL, SUB, Builder, evaluate, trim

p = UniPoly([Fraction(-1), Fraction(0), Fraction(1)])
v = (UniPoly(), UniPoly([Fraction(0), Fraction(1)]))
res = GeometricResolution(ell=(0, 0, 1), p=p, v=v)
b = Builder(2)
f_loc = b.finish(b.add(b.mul(b.input(0), b.input(0)), b.add(b.mul(b.input(1), b.input(1)), b.cadd(-1, b.zero()))))
ch = chow_from_fiber(2, 1, 2, res, [f_loc], 2)
prog = trim(ch.prog)
print(f"trimmed length {len(prog.ops)}")


def compile_prog(pr):
    lines = ["def _f(point, K):"]
    need = [False] * pr.arity

    def ref(r):
        if r < 0:
            need[-1 - r] = True
            return f"x{-1 - r}"
        return f"v{r}"

    body = []
    consts = {}
    for k in range(len(pr.ops)):
        op = pr.ops[k]
        va = ref(pr.a[k])
        if op == CADD or op == CMUL:
            c = pr.const[k]
            key = (c.numerator, c.denominator)
            cn = consts.get(key)
            if cn is None:
                cn = f"c{len(consts)}"
                consts[key] = cn
            sym = "+" if op == CADD else "*"
            body.append(f" v{k}={cn}{sym}{va}")
        else:
            vb = ref(pr.b[k])
            sym = {ADD: "+", SUB: "-", MUL: "*", DIV: "/"}[op]
            body.append(f" v{k}={va}{sym}{vb}")
    for (num, den), cn in consts.items():
        lines.append(f" {cn}=K({num},{den})")
    for i in range(pr.arity):
        if need[i]:
            lines.append(f" x{i}=point[{i}]")
    lines.extend(body)
    lines.append(f" return {ref(pr.output)}")
    src = "\n".join(lines)
    t0 = time.time()
    ns = {}
    exec(compile(src, "<slp>", "exec"), ns)
    t1 = time.time()
    print(f"compile: {t1 - t0:.2f}s, source {len(src)} bytes")
    return ns["_f"]


fn = compile_prog(prog)
rng = SplitRng(7)
pts = [[Fraction(rng.randrange(10**6)) for _ in range(6)] for _ in range(10)]
t2 = time.time()
vals2 = [fn(pt, Fraction) for pt in pts]
t3 = time.time()
print(f"10 compiled evals: {t3 - t2:.2f}s -> 100 ~ {10 * (t3 - t2):.1f}s")
vals1 = [evaluate(ch.prog, pt) for pt in pts[:2]]
assert vals1 == vals2[:2], "mismatch"
print("values agree with the interpreter")
