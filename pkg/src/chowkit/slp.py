"""Straight-line programs over the rationals.

A program is a flat arena of instructions stored as parallel integer
lists, plus a single output reference.  References are plain ints:
instruction ``k`` is ``k`` (0-based) and input ``x_i`` (1-based, as in
the text format) is ``-i``.  Several programs may share one arena and
differ only in their output reference; :func:`gradient`, :func:`expand`
and :func:`graded_parts` return families built that way, so the
combined size of such a family is the size of the shared arena.

Construction applies no rewriting beyond folding the identity
operations ``cadd 0`` and ``cmul 1``, which keeps instruction counts in
step with the cost accounting the tests assert.  :class:`Builder` has
an opt-in deduplication mode used by internal engines where only upper
bounds on length matter; none of the public operations here enable it.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Iterator, Mapping, Sequence

from .exact_arith import FRACTION_OPS, RingOps, Scalar, format_scalar, parse_scalar

ADD, SUB, MUL, CADD, CMUL, DIV = range(6)

_NAMES = {ADD: "add", SUB: "sub", MUL: "mul", CADD: "cadd", CMUL: "cmul", DIV: "div"}
_CODES = {name: code for code, name in _NAMES.items()}


@dataclass(frozen=True)
class Instruction:
    """One instruction, in readable form (see :meth:`Slp.instruction`)."""

    opcode: str
    operands: tuple[int, ...]
    const: Scalar | None = None


class Slp:
    """An immutable division-free straight-line program.

    ``len(prog)`` is the instruction count L.  Instances are built by
    :class:`Builder`, :func:`parse` or the transformation functions in
    this module, never directly.
    """

    __slots__ = ("arity", "ops", "a", "b", "const", "output")

    def __init__(self, arity, ops, a, b, const, output):
        self.arity = arity
        self.ops = tuple(ops)
        self.a = tuple(a)
        self.b = tuple(b)
        self.const = tuple(const)
        self.output = output

    def __len__(self) -> int:
        return len(self.ops)

    def __eq__(self, other):
        if isinstance(other, Slp):
            return (
                type(self) is type(other)
                and self.arity == other.arity
                and self.ops == other.ops
                and self.a == other.a
                and self.b == other.b
                and self.const == other.const
                and self.output == other.output
            )
        return NotImplemented

    def __hash__(self):
        return hash((type(self), self.arity, self.ops, self.a, self.b, self.const, self.output))

    def instruction(self, k: int) -> Instruction:
        op = self.ops[k]
        if op in (CADD, CMUL):
            return Instruction(_NAMES[op], (self.a[k],), self.const[k])
        return Instruction(_NAMES[op], (self.a[k], self.b[k]))

    def instructions(self) -> Iterator[Instruction]:
        for k in range(len(self.ops)):
            yield self.instruction(k)

    def __repr__(self):
        return f"<{type(self).__name__} arity={self.arity} len={len(self.ops)} output={self.output}>"


class DivSlp(Slp):
    """A straight-line program that may divide.

    Semantically a rational function; evaluation can fail at poles.
    :func:`split_divisions` turns one into a numerator/denominator pair
    of ordinary programs.
    """

    __slots__ = ()


def _program(arity, ops, a, b, const, output):
    cls = DivSlp if DIV in ops else Slp
    return cls(arity, ops, a, b, const, output)


class Builder:
    """Mutable arena for constructing programs.

    Node-creating methods return references usable as operands of later
    instructions.  Inputs are addressed through :meth:`input` (0-based).
    ``dedup=True`` merges structurally identical instructions on
    emission; leave it off when instruction counts must follow the
    construction verbatim.

    ``fold=True`` additionally rewrites on emission: constants fold,
    multiplication by a known constant becomes cmul, chains of cadd or
    cmul merge, x - x collapses, and commutative operands are oriented
    so the deduplication table catches mirrored nodes.  Values are
    preserved exactly; only the instruction count changes.  The
    internal engines building large intermediate arenas switch this on
    to keep their live graphs near the size of the true content.
    """

    def __init__(self, arity: int, *, allow_div: bool = False, dedup: bool = False, fold: bool = False):
        if arity < 0:
            raise ValueError("arity must be nonnegative")
        self.arity = arity
        self.ops: list[int] = []
        self.a: list[int] = []
        self.b: list[int] = []
        self.const: list[Scalar | None] = []
        self.allow_div = allow_div
        self._memo: dict | None = {} if (dedup or fold) else None
        self._zero: int | None = None
        self._fold = fold
        self._known: dict[int, Fraction] = {}
        self._cadd_of: dict[int, tuple[Fraction, int]] = {}
        self._cmul_of: dict[int, tuple[Fraction, int]] = {}

    def input(self, i: int) -> int:
        if not 0 <= i < self.arity:
            raise ValueError(f"input index {i} out of range for arity {self.arity}")
        return -1 - i

    def _check(self, r: int) -> None:
        if r >= len(self.ops) or r < -self.arity:
            raise ValueError(f"invalid operand reference {r}")

    def _emit(self, op: int, x: int, y: int, c: Scalar | None = None) -> int:
        self._check(x)
        if op not in (CADD, CMUL):
            self._check(y)
        if self._memo is not None:
            key = (op, x, y, c)
            hit = self._memo.get(key)
            if hit is not None:
                return hit
        k = len(self.ops)
        self.ops.append(op)
        self.a.append(x)
        self.b.append(y)
        self.const.append(c)
        if self._memo is not None:
            self._memo[key] = k
        return k

    def add(self, x: int, y: int) -> int:
        if self._fold:
            cx = self._known.get(x)
            cy = self._known.get(y)
            if cx is not None:
                return self.constant(cx + cy) if cy is not None else self.cadd(cx, y)
            if cy is not None:
                return self.cadd(cy, x)
            if x > y:
                x, y = y, x
        return self._emit(ADD, x, y)

    def sub(self, x: int, y: int) -> int:
        if self._fold:
            cx = self._known.get(x)
            cy = self._known.get(y)
            if cy is not None:
                return self.constant(cx - cy) if cx is not None else self.cadd(-cy, x)
            if cx is not None:
                return self.cadd(cx, self.cmul(Fraction(-1), y))
            if x == y:
                return self.zero()
        return self._emit(SUB, x, y)

    def mul(self, x: int, y: int) -> int:
        if self._fold:
            cx = self._known.get(x)
            cy = self._known.get(y)
            if cx is not None:
                return self.constant(cx * cy) if cy is not None else self.cmul(cx, y)
            if cy is not None:
                return self.cmul(cy, x)
            if x > y:
                x, y = y, x
        return self._emit(MUL, x, y)

    def div(self, x: int, y: int) -> int:
        if not self.allow_div:
            raise ValueError("division requires a Builder with allow_div=True")
        if self._fold:
            # Fold only through a provably nonzero denominator, so a
            # program failing at a pole still fails there.
            cy = self._known.get(y)
            if cy is not None and cy != 0:
                cx = self._known.get(x)
                return self.constant(cx / cy) if cx is not None else self.cmul(Fraction(1) / cy, x)
        return self._emit(DIV, x, y)

    def cadd(self, c, x: int) -> int:
        c = Fraction(c)
        if self._fold:
            cx = self._known.get(x)
            if cx is not None:
                return self.constant(c + cx)
            chain = self._cadd_of.get(x)
            if chain is not None:
                c = c + chain[0]
                x = chain[1]
        if c == 0:
            self._check(x)
            return x
        r = self._emit(CADD, x, 0, c)
        if self._fold:
            self._cadd_of[r] = (c, x)
        return r

    def cmul(self, c, x: int) -> int:
        c = Fraction(c)
        if self._fold:
            if c == 0:
                return self.zero()
            cx = self._known.get(x)
            if cx is not None:
                return self.constant(c * cx)
            chain = self._cmul_of.get(x)
            if chain is not None:
                c = c * chain[0]
                x = chain[1]
        if c == 1:
            self._check(x)
            return x
        r = self._emit(CMUL, x, 0, c)
        if self._fold:
            self._cmul_of[r] = (c, x)
        return r

    def neg(self, x: int) -> int:
        return self.cmul(-1, x)

    def zero(self) -> int:
        """A node evaluating to 0 (cached; needs arity >= 1 to anchor)."""
        if self.arity == 0:
            raise ValueError("cannot build a constant in a program with no inputs")
        if self._zero is None:
            self._zero = self._emit(SUB, -1, -1)
            if self._fold:
                self._known[self._zero] = Fraction(0)
        return self._zero

    def constant(self, c) -> int:
        c = Fraction(c)
        if c == 0:
            return self.zero()
        r = self._emit(CADD, self.zero(), 0, c)
        if self._fold:
            self._known[r] = c
        return r

    def one(self) -> int:
        return self.constant(1)

    def absorb(self, prog: Slp) -> int:
        """Copy a program's live instructions into this arena.

        Returns the reference holding the program's value.  The copy is
        verbatim (after dead-code removal), bypassing deduplication.
        """
        if prog.arity != self.arity:
            raise ValueError(f"cannot absorb arity {prog.arity} into arity {self.arity}")
        src = trim(prog)
        if DIV in src.ops and not self.allow_div:
            raise ValueError("cannot absorb a dividing program into a division-free arena")
        off = len(self.ops)
        for k in range(len(src.ops)):
            self.ops.append(src.ops[k])
            ra = src.a[k]
            self.a.append(ra if ra < 0 else ra + off)
            if src.ops[k] in (CADD, CMUL):
                self.b.append(0)
            else:
                rb = src.b[k]
                self.b.append(rb if rb < 0 else rb + off)
            self.const.append(src.const[k])
        return src.output if src.output < 0 else src.output + off

    def finish(self, output: int) -> Slp:
        return self.finish_many([output])[0]

    def finish_many(self, outputs: Sequence[int]) -> list[Slp]:
        """Freeze the arena and return one program per output reference.

        The returned programs share a single instruction tuple, so a
        family produced by one call costs one arena, not many.
        """
        for r in outputs:
            self._check(r)
        ops = tuple(self.ops)
        a = tuple(self.a)
        b = tuple(self.b)
        const = tuple(self.const)
        return [_program(self.arity, ops, a, b, const, r) for r in outputs]


def node_ring(b: Builder) -> RingOps:
    """Arena references as a commutative ring.

    ``None`` stands for a structural zero and is folded away instead of
    emitting instructions, so generic ring algorithms (determinants in
    particular) stay cheap on sparse matrices of program nodes.
    """

    def add(x, y):
        if x is None:
            return y
        if y is None:
            return x
        return b.add(x, y)

    def sub(x, y):
        if y is None:
            return x
        if x is None:
            return b.neg(y)
        return b.sub(x, y)

    def mul(x, y):
        if x is None or y is None:
            return None
        return b.mul(x, y)

    def cadd(c, x):
        c = Fraction(c)
        if c == 0:
            return x
        if x is None:
            return b.constant(c)
        return b.cadd(c, x)

    def cmul(c, x):
        if x is None or c == 0:
            return None
        return b.cmul(c, x)

    return RingOps(zero=None, one=b.one(), add=add, sub=sub, mul=mul, cadd=cadd, cmul=cmul)


def evaluate(prog: Slp, point: Sequence, ring: RingOps = FRACTION_OPS, div=None):
    """Value of the program at a point, generically over a ring.

    ``point`` supplies one ring element per input.  Division nodes use
    ``div`` when given, plain ``/`` otherwise; on the rationals that
    raises ZeroDivisionError at poles, which is the documented failure
    mode for programs with divisions.
    """
    if len(point) != prog.arity:
        raise ValueError(f"program expects {prog.arity} inputs, got {len(point)}")
    return _eval_arena(prog, point, ring, div)[0]


def eval_many(progs: Sequence[Slp], point: Sequence, ring: RingOps = FRACTION_OPS, div=None) -> list:
    """Evaluate a family of programs at one point.

    Programs sharing one arena (as returned by :func:`gradient`,
    :func:`expand`, ...) are evaluated in a single pass.
    """
    if not progs:
        return []
    first = progs[0]
    if any(p.arity != first.arity for p in progs):
        raise ValueError("programs must share one arity")
    if len(point) != first.arity:
        raise ValueError(f"programs expect {first.arity} inputs, got {len(point)}")
    if all(p.ops is first.ops for p in progs):
        _, fetch = _eval_arena(first, point, ring, div)
        return [fetch(p.output) for p in progs]
    return [evaluate(p, point, ring, div) for p in progs]


def _eval_arena(prog: Slp, point: Sequence, ring: RingOps, div):
    if div is None:
        def div(u, v):
            return u / v
    vals = []
    ops_, a_, b_, const_ = prog.ops, prog.a, prog.b, prog.const
    add, sub, mul = ring.add, ring.sub, ring.mul
    cadd, cmul = ring.cadd, ring.cmul
    for k in range(len(ops_)):
        op = ops_[k]
        x = a_[k]
        xv = vals[x] if x >= 0 else point[-1 - x]
        if op == CADD:
            v = cadd(const_[k], xv)
        elif op == CMUL:
            v = cmul(const_[k], xv)
        else:
            y = b_[k]
            yv = vals[y] if y >= 0 else point[-1 - y]
            if op == ADD:
                v = add(xv, yv)
            elif op == SUB:
                v = sub(xv, yv)
            elif op == MUL:
                v = mul(xv, yv)
            else:
                v = div(xv, yv)
        vals.append(v)

    def fetch(r):
        return vals[r] if r >= 0 else point[-1 - r]

    return fetch(prog.output), fetch


def compose(outer: Slp, inners: Sequence[Slp]) -> Slp:
    """Substitute the inner programs for the outer program's inputs.

    The result's instruction list is the verbatim concatenation of all
    inner lists followed by the outer list, so its length is exactly
    ``sum(len(inner_i)) + len(outer)``.
    """
    inners = list(inners)
    if len(inners) != outer.arity:
        raise ValueError(f"outer program has arity {outer.arity}, got {len(inners)} inner programs")
    if not inners:
        return outer
    n = inners[0].arity
    for p in inners:
        if p.arity != n:
            raise ValueError("inner programs must share one arity")
    ops: list[int] = []
    a: list[int] = []
    b: list[int] = []
    const: list[Scalar | None] = []
    inner_out = []
    off = 0
    for p in inners:
        for k in range(len(p.ops)):
            ops.append(p.ops[k])
            ra = p.a[k]
            a.append(ra if ra < 0 else ra + off)
            if p.ops[k] in (CADD, CMUL):
                b.append(0)
            else:
                rb = p.b[k]
                b.append(rb if rb < 0 else rb + off)
            const.append(p.const[k])
        inner_out.append(p.output if p.output < 0 else p.output + off)
        off += len(p.ops)

    def remap(r: int) -> int:
        return r + off if r >= 0 else inner_out[-1 - r]

    for k in range(len(outer.ops)):
        ops.append(outer.ops[k])
        a.append(remap(outer.a[k]))
        if outer.ops[k] in (CADD, CMUL):
            b.append(0)
        else:
            b.append(remap(outer.b[k]))
        const.append(outer.const[k])
    return _program(n, ops, a, b, const, remap(outer.output))


def trim(prog: Slp) -> Slp:
    """Drop instructions unreachable from the output and renumber.

    Semantics are untouched; only dead code goes away.  Useful before
    serialising a member of an arena-sharing family.
    """
    keep: set[int] = set()
    stack = [prog.output]
    while stack:
        r = stack.pop()
        if r < 0 or r in keep:
            continue
        keep.add(r)
        stack.append(prog.a[r])
        if prog.ops[r] not in (CADD, CMUL):
            stack.append(prog.b[r])
    order = sorted(keep)
    remap = {old: new for new, old in enumerate(order)}
    ops = [prog.ops[k] for k in order]
    a = [r if r < 0 else remap[r] for r in (prog.a[k] for k in order)]
    b = [
        0 if prog.ops[k] in (CADD, CMUL) else (prog.b[k] if prog.b[k] < 0 else remap[prog.b[k]])
        for k in order
    ]
    const = [prog.const[k] for k in order]
    out = prog.output if prog.output < 0 else remap[prog.output]
    return _program(prog.arity, ops, a, b, const, out)


def _replay_into(ops, aa, bb, cc, roots, nb: Builder) -> dict[int, int]:
    """Re-emit the instructions reachable from ``roots`` into ``nb``.

    The four sequences describe a source arena (lists or tuples both
    work).  Returns the old-to-new reference map for the live nodes;
    input references pass through unchanged and are not in the map.
    """
    live: set[int] = set()
    stack = [r for r in roots if r >= 0]
    while stack:
        r = stack.pop()
        if r in live:
            continue
        live.add(r)
        x = aa[r]
        if x >= 0 and x not in live:
            stack.append(x)
        if ops[r] not in (CADD, CMUL):
            y = bb[r]
            if y >= 0 and y not in live:
                stack.append(y)
    m: dict[int, int] = {}
    for k in sorted(live):
        op = ops[k]
        xa = aa[k]
        x = xa if xa < 0 else m[xa]
        if op == CADD:
            m[k] = nb.cadd(cc[k], x)
        elif op == CMUL:
            m[k] = nb.cmul(cc[k], x)
        else:
            xb = bb[k]
            y = xb if xb < 0 else m[xb]
            if op == ADD:
                m[k] = nb.add(x, y)
            elif op == SUB:
                m[k] = nb.sub(x, y)
            elif op == MUL:
                m[k] = nb.mul(x, y)
            else:
                m[k] = nb.div(x, y)
    return m


def simplify_many(progs: Sequence[Slp]) -> list[Slp]:
    """Shrink a family of programs, preserving every value exactly.

    Replays the union of the live instructions through a folding
    builder (see :class:`Builder`), so constant subgraphs collapse,
    safe identities apply and structurally identical nodes merge both
    within and across the inputs, repeating until the shared length
    stops dropping.  The results share one arena; members of a family
    produced by :meth:`Builder.finish_many` keep their common subgraphs
    common.  Division folds only through a nonzero literal denominator,
    so a program failing at a pole still fails there.
    """
    if not progs:
        return []
    arity = progs[0].arity
    for p in progs:
        if p.arity != arity:
            raise ValueError("family members must share one arity")
    cur = list(progs)
    prev: int | None = None
    while True:
        b = Builder(arity, allow_div=any(DIV in p.ops for p in cur), fold=True)
        arena_map: dict[int, dict[int, int]] = {}
        outs = []
        for p in cur:
            key = id(p.ops)
            m = arena_map.get(key)
            if m is None:
                roots = [q.output for q in cur if id(q.ops) == key]
                m = arena_map[key] = _replay_into(p.ops, p.a, p.b, p.const, roots, b)
            outs.append(p.output if p.output < 0 else m[p.output])
        size = len(b.ops)
        if prev is not None and size >= prev:
            return cur
        prev = size
        cur = b.finish_many(outs)


def simplify(prog: Slp) -> Slp:
    """Shrink a program without changing the function it computes.

    Folds constant subgraphs, applies the safe identities (x - x = 0,
    multiplication by a literal becomes cmul, chains of cadd or cmul
    merge), orients commutative operands canonically and merges nodes
    that become identical, repeating until the length stops dropping.
    Programs produced by long tool chains routinely shrink by large
    factors, which matters because downstream work is linear in length.

    Division nodes are kept unless their denominator is a nonzero
    literal, so a program that fails at a pole still fails there.
    The result computes the same value at every point and never has
    more instructions than ``trim(prog)``.
    """
    return trim(simplify_many([prog])[0])


def gradient(prog: Slp) -> list[Slp]:
    """All partial derivatives by one reverse sweep.

    Returns ``prog.arity`` programs sharing an arena of size O(L); the
    i-th one computes the partial derivative with respect to input i.
    """
    if DIV in prog.ops:
        raise ValueError("gradient needs a division-free program")
    if prog.arity == 0:
        return []
    src = trim(prog)
    b = Builder(src.arity)
    b.ops.extend(src.ops)
    b.a.extend(src.a)
    b.b.extend(src.b)
    b.const.extend(src.const)

    adj: dict[int, int] = {}

    def accumulate(r: int, piece: int) -> None:
        have = adj.get(r)
        adj[r] = piece if have is None else b.add(have, piece)

    accumulate(src.output, b.one())
    for k in reversed(range(len(src.ops))):
        w = adj.get(k)
        if w is None:
            continue
        op = src.ops[k]
        x, y = src.a[k], src.b[k]
        if op == ADD:
            accumulate(x, w)
            accumulate(y, w)
        elif op == SUB:
            accumulate(x, w)
            accumulate(y, b.neg(w))
        elif op == MUL:
            accumulate(x, b.mul(w, y))
            accumulate(y, b.mul(w, x))
        elif op == CADD:
            accumulate(x, w)
        else:  # CMUL
            accumulate(x, b.cmul(src.const[k], w))
    outs = []
    for i in range(src.arity):
        r = adj.get(-1 - i)
        outs.append(r if r is not None else b.zero())
    return b.finish_many(outs)


def expand(prog: Slp, group: Sequence[int], center: Sequence, bound: int) -> list[Slp]:
    """Homogeneous components of the program in the group variables.

    ``group`` lists input indices (0-based); ``center`` gives one
    rational per group variable.  Component k of the result is the
    degree-k homogeneous part of the polynomial in the shifted group
    variables, with the remaining inputs acting as coefficients.  The
    ``bound + 1`` components share one arena; parts of degree above the
    bound are discarded.  An empty group returns ``[prog]``.
    """
    if DIV in prog.ops:
        raise ValueError("expand needs a division-free program")
    group = list(group)
    if len(set(group)) != len(group):
        raise ValueError("group variables must be distinct")
    for g in group:
        if not 0 <= g < prog.arity:
            raise ValueError(f"group variable {g} out of range for arity {prog.arity}")
    center = [Fraction(c) for c in center]
    if len(center) != len(group):
        raise ValueError("need exactly one center coordinate per group variable")
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    if not group:
        return [prog]
    b = Builder(prog.arity, fold=True)
    parts = _expand_into(b, prog, dict(zip(group, center)), bound)
    outs = [p if p is not None else b.zero() for p in parts]
    return b.finish_many(outs)


def _expand_into(b: Builder, prog: Slp, center: Mapping[int, Fraction], d: int) -> list[int | None]:
    """Graded parts of ``prog``, emitted into ``b``.

    Returns ``d + 1`` references into ``b`` (None marks a structurally
    zero part).  ``center`` maps group input indices to their shift.
    """
    src = trim(prog)
    input_parts: dict[int, list[int | None]] = {}

    def parts_of(r: int) -> list[int | None]:
        if r >= 0:
            return iparts[r]
        i = -1 - r
        got = input_parts.get(i)
        if got is None:
            if i in center:
                c = center[i]
                got = [None] * (d + 1)
                got[0] = None if c == 0 else b.constant(c)
                if d >= 1:
                    got[1] = b.cadd(-c, b.input(i))
            else:
                got = [b.input(i)] + [None] * d
            input_parts[i] = got
        return got

    iparts: list[list[int | None]] = []
    for k in range(len(src.ops)):
        op = src.ops[k]
        p = parts_of(src.a[k])
        if op == CADD:
            c = src.const[k]
            out = list(p)
            if c != 0:
                out[0] = b.constant(c) if p[0] is None else b.cadd(c, p[0])
        elif op == CMUL:
            c = src.const[k]
            if c == 0:
                out = [None] * (d + 1)
            else:
                out = [None if x is None else b.cmul(c, x) for x in p]
        else:
            q = parts_of(src.b[k])
            if op == ADD:
                out = [_add2(b, x, y) for x, y in zip(p, q)]
            elif op == SUB:
                out = [_sub2(b, x, y) for x, y in zip(p, q)]
            else:  # MUL
                out = []
                for deg in range(d + 1):
                    acc = None
                    for i in range(deg + 1):
                        x, y = p[i], q[deg - i]
                        if x is None or y is None:
                            continue
                        t = b.mul(x, y)
                        acc = t if acc is None else b.add(acc, t)
                    out.append(acc)
        iparts.append(out)
    return list(parts_of(src.output))


def _add2(b: Builder, x: int | None, y: int | None) -> int | None:
    if x is None:
        return y
    if y is None:
        return x
    return b.add(x, y)


def _sub2(b: Builder, x: int | None, y: int | None) -> int | None:
    if y is None:
        return x
    if x is None:
        return b.neg(y)
    return b.sub(x, y)


def graded_parts(f: Slp, g: Slp, bound: int, a: Sequence) -> list[Slp]:
    """Power-series parts of the rational function g/f centered at a.

    Requires ``f(a) != 0``.  Component k is the degree-k part of the
    series expansion of g/f in the shifted variables; the ``bound + 1``
    components share one arena.  Division-free: the series is produced
    by the usual quotient recurrence, dividing only by the rational
    number f(a).
    """
    if f.arity != g.arity:
        raise ValueError("numerator and denominator must share one arity")
    point = [Fraction(x) for x in a]
    if len(point) != f.arity:
        raise ValueError(f"center needs {f.arity} coordinates, got {len(point)}")
    if bound < 0:
        raise ValueError("bound must be nonnegative")
    alpha = evaluate(f, point)
    if alpha == 0:
        raise ValueError("graded parts of g/f need a center where f does not vanish")
    b = Builder(f.arity, fold=True)
    center = dict(enumerate(point))
    fp = _expand_into(b, f, center, bound)
    gp = _expand_into(b, g, center, bound)
    inv = 1 / alpha
    q: list[int | None] = []
    for k in range(bound + 1):
        acc = gp[k]
        for i in range(k):
            if q[i] is None or fp[k - i] is None:
                continue
            t = b.mul(q[i], fp[k - i])
            acc = b.neg(t) if acc is None else b.sub(acc, t)
        q.append(None if acc is None else b.cmul(inv, acc))
    outs = [x if x is not None else b.zero() for x in q]
    return b.finish_many(outs)


def split_divisions(prog: Slp) -> tuple[Slp, Slp]:
    """Numerator and denominator of a program that may divide.

    Returns division-free programs ``(num, den)`` with
    ``prog = num / den`` as rational functions.  Denominator handling
    is lazy: a trivial denominator stays the constant 1 and costs
    nothing until the end, and a shared denominator reference is reused
    instead of being multiplied out, which keeps the numerator within
    3x the input length and the denominator within 1x.
    """
    src = trim(prog)
    b = Builder(src.arity)
    num: list[int] = []
    den: list[int | None] = []

    def nref(r: int) -> int:
        return r if r < 0 else num[r]

    def dref(r: int) -> int | None:
        return None if r < 0 else den[r]

    for k in range(len(src.ops)):
        op = src.ops[k]
        x, y = src.a[k], src.b[k]
        n1, d1 = nref(x), dref(x)
        if op in (ADD, SUB):
            n2, d2 = nref(y), dref(y)
            emit = b.add if op == ADD else b.sub
            if d1 == d2:
                nn, dd = emit(n1, n2), d1
            elif d1 is None:
                nn, dd = emit(b.mul(n1, d2), n2), d2
            elif d2 is None:
                nn, dd = emit(n1, b.mul(n2, d1)), d1
            else:
                nn = emit(b.mul(n1, d2), b.mul(n2, d1))
                dd = b.mul(d1, d2)
        elif op == MUL:
            n2, d2 = nref(y), dref(y)
            nn = b.mul(n1, n2)
            dd = _mul2(b, d1, d2)
        elif op == DIV:
            n2, d2 = nref(y), dref(y)
            nn = n1 if d2 is None else b.mul(n1, d2)
            dd = n2 if d1 is None else b.mul(d1, n2)
        elif op == CADD:
            c = src.const[k]
            if d1 is None:
                nn, dd = b.cadd(c, n1), None
            else:
                nn, dd = b.add(n1, b.cmul(c, d1)), d1
        else:  # CMUL
            nn, dd = b.cmul(src.const[k], n1), d1
        num.append(nn)
        den.append(dd)
    nout = nref(src.output)
    dout = dref(src.output)
    if dout is None:
        dout = b.one()
    num_prog, den_prog = b.finish_many([nout, dout])
    return trim(num_prog), trim(den_prog)


def _mul2(b: Builder, x: int | None, y: int | None) -> int | None:
    if x is None:
        return y
    if y is None:
        return x
    return b.mul(x, y)


def from_dense(arity: int, terms) -> Slp:
    """The dense program of a polynomial given as a monomial list.

    ``terms`` is a mapping or iterable of ``(exponents, coefficient)``
    pairs with one exponent per variable.  Monomials are produced by
    single multiplications along divisor chains, each coefficient costs
    one ``cmul``, and the terms are summed; the instruction count stays
    within 3 times the number of monomials of total degree up to the
    polynomial's degree.
    """
    if arity < 1:
        raise ValueError("the dense program needs at least one variable")
    if isinstance(terms, Mapping):
        terms = terms.items()
    merged: dict[tuple[int, ...], Fraction] = {}
    for exps, c in terms:
        exps = tuple(int(e) for e in exps)
        if len(exps) != arity:
            raise ValueError(f"exponent tuple {exps} does not match arity {arity}")
        if any(e < 0 for e in exps):
            raise ValueError(f"negative exponent in {exps}")
        c = Fraction(c)
        if c == 0:
            continue
        merged[exps] = merged.get(exps, Fraction(0)) + c
    merged = {e: c for e, c in merged.items() if c != 0}
    b = Builder(arity)
    if not merged:
        return b.finish(b.zero())

    mono_ref: dict[tuple[int, ...], int] = {}

    def monomial(exps: tuple[int, ...]) -> int:
        got = mono_ref.get(exps)
        if got is not None:
            return got
        j = next(i for i, e in enumerate(exps) if e > 0)
        rest = list(exps)
        rest[j] -= 1
        if sum(rest) == 0:
            r = b.input(j)
        else:
            r = b.mul(b.input(j), monomial(tuple(rest)))
        mono_ref[exps] = r
        return r

    const_term = None
    acc = None
    for exps in sorted(merged, key=lambda e: (sum(e), e)):
        c = merged[exps]
        if sum(exps) == 0:
            const_term = c
            continue
        t = b.cmul(c, monomial(exps))
        acc = t if acc is None else b.add(acc, t)
    if acc is None:
        return b.finish(b.constant(const_term))
    if const_term is not None:
        acc = b.cadd(const_term, acc)
    return b.finish(acc)


def serialize(prog: Slp) -> str:
    """Render a program in the line-oriented text format.

    Inverse of :func:`parse`; instructions are written verbatim, so a
    parse/serialize round trip is the identity on canonical text.
    """
    lines = ["SLP v1", f"inputs {prog.arity}"]
    for k in range(len(prog.ops)):
        op = prog.ops[k]
        name = _NAMES[op]
        if op in (CADD, CMUL):
            lines.append(f"{k} = {name} {format_scalar(prog.const[k])} {_fmt_ref(prog.a[k])}")
        else:
            lines.append(f"{k} = {name} {_fmt_ref(prog.a[k])} {_fmt_ref(prog.b[k])}")
    lines.append(f"output {_fmt_ref(prog.output)}")
    return "\n".join(lines) + "\n"


def _fmt_ref(r: int) -> str:
    return f"x{-r}" if r < 0 else str(r)


def parse(text: str) -> Slp:
    """Parse the text format produced by :func:`serialize`.

    Returns a :class:`DivSlp` when a ``div`` instruction occurs and a
    plain :class:`Slp` otherwise.  Malformed headers, non-consecutive
    instruction numbers, unknown opcodes, wrong operand counts, bad
    rationals and references to inputs or instructions that do not
    exist (yet) are all rejected with ValueError.
    """
    lines = [ln.strip() for ln in text.splitlines()]
    lines = [ln for ln in lines if ln]
    if not lines or lines[0] != "SLP v1":
        raise ValueError("not an SLP v1 file")
    if len(lines) < 3:
        raise ValueError("truncated program: need a header, an inputs line and an output line")
    head = lines[1].split()
    if len(head) != 2 or head[0] != "inputs" or not head[1].isdigit():
        raise ValueError(f"bad inputs line: {lines[1]!r}")
    arity = int(head[1])
    if lines[-1].split()[0] != "output":
        raise ValueError("missing output line")

    def parse_ref(tok: str, upto: int) -> int:
        if tok.startswith("x"):
            try:
                i = int(tok[1:])
            except ValueError:
                raise ValueError(f"bad reference {tok!r}") from None
            if not 1 <= i <= arity:
                raise ValueError(f"input {tok} out of range for {arity} inputs")
            return -i
        try:
            k = int(tok)
        except ValueError:
            raise ValueError(f"bad reference {tok!r}") from None
        if not 0 <= k < upto:
            raise ValueError(f"reference to instruction {k} which is not defined at that point")
        return k

    ops: list[int] = []
    a: list[int] = []
    b: list[int] = []
    const: list[Scalar | None] = []
    for ln in lines[2:-1]:
        parts = ln.split()
        if len(parts) != 5 or parts[1] != "=":
            raise ValueError(f"bad instruction line: {ln!r}")
        if not parts[0].isdigit() or int(parts[0]) != len(ops):
            raise ValueError(f"instruction numbers must be consecutive from 0, got {ln!r}")
        name = parts[2]
        code = _CODES.get(name)
        if code is None:
            raise ValueError(f"unknown opcode {name!r}")
        if code in (CADD, CMUL):
            try:
                c = parse_scalar(parts[3])
            except (ValueError, ZeroDivisionError):
                raise ValueError(f"malformed rational {parts[3]!r}") from None
            a.append(parse_ref(parts[4], len(ops)))
            b.append(0)
            const.append(c)
        else:
            a.append(parse_ref(parts[3], len(ops)))
            b.append(parse_ref(parts[4], len(ops)))
            const.append(None)
        ops.append(code)
    out_parts = lines[-1].split()
    if len(out_parts) != 2:
        raise ValueError(f"bad output line: {lines[-1]!r}")
    output = parse_ref(out_parts[1], len(ops))
    return _program(arity, ops, a, b, const, output)
