"""Lower a typed FML program to flat per-function instruction lists.

Pure expressions compile to closures ``f(L, G, H)`` over the current frame's
locals, the globals and the heap. Effectful sub-expressions (calls,
``nondet``, ``new``) are hoisted into temporaries in left-to-right order, so
every instruction performs at most one effect.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

from ..errors import ExecutionError, SplError
from ..fml import ast as A
from ..fml import printer
from ..fml.program import Program, default_value, typecheck_program

# opcodes
SET_LOCAL, SET_GLOBAL, STORE, CALL, NONDET, ALLOC, BRANCH, JUMP, RETURN, FAIL, LOOP = range(11)


class Ref:
    """A heap reference; ``None`` is the null reference."""

    __slots__ = ("id",)

    def __init__(self, id: int):
        self.id = id

    def __eq__(self, other):
        return type(other) is Ref and other.id == self.id

    def __hash__(self):
        return hash(("ref", self.id))

    def __repr__(self):
        return f"&{self.id}"


class Cond:
    """A boolean that depends on the (not yet fixed) feature selection.

    ``mask`` holds one bit per feature assignment on which the value is true.
    """

    __slots__ = ("mask", "universe")

    def __init__(self, mask: int, universe: int):
        self.mask = mask
        self.universe = universe

    def __eq__(self, other):
        return type(other) is Cond and other.mask == self.mask

    def __hash__(self):
        return hash(("cond", self.mask))

    def __repr__(self):
        return f"Cond({self.mask:#x})"


def _as_cond(v, universe: int) -> Cond:
    if type(v) is Cond:
        return v
    return Cond(universe if v else 0, universe)


def _norm(c: Cond):
    if c.mask == 0:
        return False
    if c.mask == c.universe:
        return True
    return c


def _scalar(v):
    if type(v) is Cond:
        raise ExecutionError("feature variable used as a number")
    return v


@dataclass
class Instr:
    op: int
    args: tuple
    pos: A.Pos
    text: str
    stmt_id: int


@dataclass
class FuncCode:
    name: str
    index: int
    nparams: int
    local_defaults: list
    instrs: list = field(default_factory=list)
    feature: str = ""
    returns_value: bool = False
    automaton: str = ""


@dataclass
class LoweredProgram:
    program: Program
    functions: dict           # name -> FuncCode
    global_names: list
    global_index: dict
    global_inits: list
    records: dict             # name -> (index, [field names])
    record_names: list
    entry: FuncCode


def _div(a, b):
    if b == 0:
        raise ExecutionError("division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _mod(a, b):
    if b == 0:
        raise ExecutionError("division by zero")
    return a - b * _div(a, b)


_ARITH = {
    "+": lambda a, b: a + b, "-": lambda a, b: a - b, "*": lambda a, b: a * b,
    "/": _div, "%": _mod,
    "<": lambda a, b: a < b, "<=": lambda a, b: a <= b,
    ">": lambda a, b: a > b, ">=": lambda a, b: a >= b,
}


def _has_effect(e) -> bool:
    return any(isinstance(n, (A.Call, A.Nondet, A.New, A.Original)) for n in A.walk(e))


class _FunctionLowerer:
    def __init__(self, lp: "_Lowerer", fn: A.FunctionDecl, code: FuncCode):
        self.lp = lp
        self.fn = fn
        self.code = code
        self.scopes: list[dict] = [{}]
        self.slot_types: list = []
        for p in fn.params:
            self.declare(p.name, p.type)
        self.cur_pos = fn.pos
        self.cur_text = ""
        self.stmt_id = 0

    # -- slots & types --------------------------------------------------------

    def declare(self, name: str, ty: A.Type) -> int:
        slot = len(self.slot_types)
        self.slot_types.append(ty)
        self.scopes[-1][name] = slot
        return slot

    def temp(self, ty: A.Type) -> int:
        slot = len(self.slot_types)
        self.slot_types.append(ty)
        return slot

    def resolve(self, name: str):
        for scope in reversed(self.scopes):
            if name in scope:
                return ("local", scope[name])
        if name in self.lp.global_index:
            return ("global", self.lp.global_index[name])
        raise SplError(f"unresolved name {name!r} in {self.fn.name}")

    def type_of(self, e) -> A.Type:
        if isinstance(e, A.IntLit) or isinstance(e, A.Nondet):
            return A.INT
        if isinstance(e, A.BoolLit):
            return A.BOOL
        if isinstance(e, A.SymLit):
            return A.SYMBOL
        if isinstance(e, A.NullLit):
            return A.Type("null")
        if isinstance(e, A.New):
            return A.ref(e.record)
        if isinstance(e, A.Var):
            kind, slot = self.resolve(e.name)
            if kind == "local":
                return self.slot_types[slot]
            return self.lp.program.globals[e.name].type
        if isinstance(e, A.FieldRef):
            rt = self.type_of(e.obj)
            for f in self.lp.program.records[rt.record].fields:
                if f.name == e.name:
                    return f.type
            raise SplError(f"no field {e.name} in {rt.record}")
        if isinstance(e, A.Call):
            return self.lp.program.functions[e.name].ret
        if isinstance(e, A.Unary):
            return A.BOOL if e.op == "!" else A.INT
        if isinstance(e, A.Binary):
            return A.INT if e.op in ("+", "-", "*", "/", "%") else A.BOOL
        raise SplError(f"cannot type {e!r}")

    def field_index(self, obj, name: str) -> int:
        rt = self.type_of(obj)
        _, fields = self.lp.records[rt.record]
        return fields.index(name) + 1

    # -- emission -------------------------------------------------------------

    def emit(self, op: int, *args) -> int:
        self.code.instrs.append(Instr(op, args, self.cur_pos, self.cur_text, self.stmt_id))
        return len(self.code.instrs) - 1

    def patch(self, at: int, *args) -> None:
        self.code.instrs[at].args = args

    def here(self) -> int:
        return len(self.code.instrs)

    # -- expressions ----------------------------------------------------------

    def materialize(self, e) -> Callable:
        """Evaluate ``e`` now into a temporary and return a closure reading it."""
        ty = self.type_of(e)
        f = self.expr(e)
        slot = self.temp(ty)
        self.emit(SET_LOCAL, slot, f)
        return lambda L, G, H: L[slot]

    def operands(self, es) -> list:
        """Lower operands left to right; earlier ones are pinned if later ones have effects."""
        out = []
        for i, e in enumerate(es):
            later_effect = any(_has_effect(x) for x in es[i + 1:])
            if later_effect and not isinstance(e, (A.IntLit, A.BoolLit, A.SymLit, A.NullLit)):
                out.append(self.materialize(e))
            else:
                out.append(self.expr(e))
        return out

    def expr(self, e) -> Callable:
        universe = self.lp.universe
        if isinstance(e, (A.IntLit, A.BoolLit, A.SymLit)):
            v = e.value if not isinstance(e, A.SymLit) else e.name
            return lambda L, G, H: v
        if isinstance(e, A.NullLit):
            return lambda L, G, H: None
        if isinstance(e, A.Var):
            kind, slot = self.resolve(e.name)
            if kind == "local":
                return lambda L, G, H: L[slot]
            return lambda L, G, H: G[slot]
        if isinstance(e, A.FieldRef):
            obj = self.expr(e.obj)
            idx = self.field_index(e.obj, e.name)
            where = f"{e.pos}: null dereference reading ->{e.name}"

            def read(L, G, H):
                r = obj(L, G, H)
                if r is None:
                    raise ExecutionError(where)
                return H[r.id][idx]
            return read
        if isinstance(e, A.Unary):
            arg = self.expr(e.operand)
            if e.op == "!":
                def neg(L, G, H):
                    v = arg(L, G, H)
                    if type(v) is Cond:
                        return _norm(Cond(v.universe & ~v.mask, v.universe))
                    return not v
                return neg
            return lambda L, G, H: -_scalar(arg(L, G, H))
        if isinstance(e, A.Call) or isinstance(e, A.Nondet) or isinstance(e, A.New):
            ty = self.type_of(e)
            slot = self.temp(ty)
            self.effect_into(("local", slot), e)
            return lambda L, G, H: L[slot]
        if isinstance(e, A.Binary):
            if e.op in ("&&", "||"):
                return self.logical(e)
            left, right = self.operands([e.left, e.right])
            if e.op in ("==", "!="):
                want = e.op == "=="

                def eq(L, G, H):
                    a, b = left(L, G, H), right(L, G, H)
                    if type(a) is Cond or type(b) is Cond:
                        ca, cb = _as_cond(a, universe), _as_cond(b, universe)
                        same = ca.universe & ~(ca.mask ^ cb.mask)
                        return _norm(Cond(same if want else ca.universe & ~same, ca.universe))
                    return (a == b) == want
                return eq
            fn = _ARITH[e.op]
            return lambda L, G, H: fn(_scalar(left(L, G, H)), _scalar(right(L, G, H)))
        raise SplError(f"cannot lower expression {e!r}")

    def logical(self, e: A.Binary) -> Callable:
        is_and = e.op == "&&"
        if _has_effect(e.right):
            # short-circuit with effects on the right: lower to control flow
            slot = self.temp(A.BOOL)
            left = self.expr(e.left)
            self.emit(SET_LOCAL, slot, lambda L, G, H, f=left: _truth(f(L, G, H)))
            cond = (lambda L, G, H: L[slot]) if is_and else (lambda L, G, H: _not(L[slot]))
            br = self.emit(BRANCH, cond, None, None)
            right = self.expr(e.right)
            self.emit(SET_LOCAL, slot, lambda L, G, H, f=right: _truth(f(L, G, H)))
            end = self.here()
            self.patch(br, cond, end, end)
            return lambda L, G, H: L[slot]
        left, right = self.expr(e.left), self.expr(e.right)
        universe = self.lp.universe

        def combine(L, G, H):
            a = left(L, G, H)
            if type(a) is not Cond:
                if is_and and not a:
                    return False
                if not is_and and a:
                    return True
                b = right(L, G, H)
                return b if type(b) is Cond else bool(b)
            b = right(L, G, H)
            cb = _as_cond(b, universe)
            m = (a.mask & cb.mask) if is_and else (a.mask | cb.mask)
            return _norm(Cond(m, a.universe))
        return combine

    def effect_into(self, dst, e) -> None:
        if isinstance(e, A.Call):
            args = self.operands(list(e.args))
            target = self.lp.program.functions.get(e.name)
            if target is None:
                raise SplError(f"call to unknown function {e.name}")
            self.emit(CALL, dst, e.name, tuple(args))
        elif isinstance(e, A.Nondet):
            self.emit(NONDET, dst, e.lo, e.hi)
        elif isinstance(e, A.New):
            idx, fields = self.lp.records[e.record]
            defaults = [default_value(f.type) for f in self.lp.program.records[e.record].fields]
            self.emit(ALLOC, dst, idx, tuple(defaults))
        else:
            raise SplError(f"not an effect: {e!r}")

    def assign_to(self, dst, value) -> None:
        """``dst`` is ("local"|"global", slot); directly place effects when possible."""
        if isinstance(value, (A.Call, A.Nondet, A.New)):
            self.effect_into(dst, value)
            return
        f = self.expr(value)
        self.emit(SET_LOCAL if dst[0] == "local" else SET_GLOBAL, dst[1], f)

    # -- statements -----------------------------------------------------------

    def block(self, stmts) -> None:
        self.scopes.append({})
        for s in stmts:
            self.stmt(s)
        self.scopes.pop()

    def stmt(self, s) -> None:
        self.cur_pos = s.pos if s.pos.line else self.cur_pos
        if not isinstance(s, (A.If, A.While, A.Block)):
            self.cur_text = printer.stmt(s, 0)[0]
        self.stmt_id += 1
        if isinstance(s, A.VarDecl):
            if s.init is not None:
                # evaluate before the name is in scope
                if isinstance(s.init, (A.Call, A.Nondet, A.New)):
                    tmp = self.temp(s.type)
                    self.effect_into(("local", tmp), s.init)
                    f = (lambda L, G, H: L[tmp])
                else:
                    f = self.expr(s.init)
                slot = self.declare(s.name, s.type)
                self.emit(SET_LOCAL, slot, f)
            else:
                slot = self.declare(s.name, s.type)
                d = default_value(s.type)
                self.emit(SET_LOCAL, slot, lambda L, G, H: d)
        elif isinstance(s, A.Assign):
            if isinstance(s.target, A.Var):
                self.assign_to(self.resolve(s.target.name), s.value)
            else:
                obj, val = self.operands([s.target.obj, s.value])
                idx = self.field_index(s.target.obj, s.target.name)
                self.emit(STORE, obj, idx, val, s.target.name)
        elif isinstance(s, A.ExprStmt):
            e = s.expr
            args = self.operands(list(e.args))
            self.emit(CALL, None, e.name, tuple(args))
        elif isinstance(s, A.If):
            self.cur_text = f"if ({printer.expr(s.cond)})"
            cond = self.expr(s.cond)
            br = self.emit(BRANCH, cond, None, None)
            self.block(s.then)
            if s.orelse is not None:
                jmp = self.emit(JUMP, None)
                else_pc = self.here()
                self.block(s.orelse)
                end = self.here()
                self.patch(jmp, end)
                self.patch(br, cond, else_pc, end)
            else:
                end = self.here()
                self.patch(br, cond, end, end)
        elif isinstance(s, A.While):
            counter = self.temp(A.INT)
            self.cur_text = f"while ({printer.expr(s.cond)})"
            self.emit(SET_LOCAL, counter, lambda L, G, H: 0)
            head = self.here()
            cond = self.expr(s.cond)
            br = self.emit(BRANCH, cond, None, None)
            self.emit(LOOP, counter, s.bound)
            self.block(s.body)
            self.emit(JUMP, head)
            end = self.here()
            self.patch(br, cond, end, end)
        elif isinstance(s, A.Block):
            self.block(s.body)
        elif isinstance(s, A.Return):
            f = self.expr(s.value) if s.value is not None else None
            self.emit(RETURN, f)
        elif isinstance(s, A.Fail):
            hook = self.lp.program.hooks.get(self.fn.name)
            automaton = hook.automaton if hook else ""
            site = f"{hook.position} {hook.function}" if hook and hook.position != "helper" else self.fn.name
            self.emit(FAIL, automaton, site)
        else:
            raise SplError(f"cannot lower statement {s!r}")

    def finish(self) -> None:
        self.cur_text = "}"
        self.emit(RETURN, None)
        self.code.local_defaults = [default_value(t) if t.kind != "null" else None for t in self.slot_types]


def _truth(v):
    return v if type(v) is Cond else bool(v)


def _not(v):
    if type(v) is Cond:
        return _norm(Cond(v.universe & ~v.mask, v.universe))
    return not v


class _Lowerer:
    def __init__(self, program: Program, universe: int):
        self.program = program
        self.universe = universe
        self.global_names = list(program.globals)
        self.global_index = {n: i for i, n in enumerate(self.global_names)}
        self.record_names = list(program.records)
        self.records = {n: (i, [f.name for f in program.records[n].fields])
                        for i, n in enumerate(self.record_names)}


def lower(program: Program, universe: int = 1, check_types: bool = True) -> LoweredProgram:
    if check_types:
        errors = typecheck_program(program)
        if errors:
            raise SplError("program is not well typed:\n  " + "\n  ".join(errors[:20]))
    lw = _Lowerer(program, universe)
    codes = {}
    for i, (name, fn) in enumerate(program.functions.items()):
        hook = program.hooks.get(name)
        code = FuncCode(name, i, len(fn.params), [], feature=program.feature_of_function(name),
                        returns_value=fn.ret.kind != "void",
                        automaton=hook.automaton if hook else "")
        codes[name] = code
    for name, fn in program.functions.items():
        fl = _FunctionLowerer(lw, fn, codes[name])
        fl.block(fn.body)
        fl.finish()
    inits = []
    for name in lw.global_names:
        g = program.globals[name]
        if g.init is None:
            inits.append(default_value(g.type))
        elif isinstance(g.init, A.NullLit):
            inits.append(None)
        elif isinstance(g.init, A.SymLit):
            inits.append(g.init.name)
        else:
            inits.append(g.init.value)
    return LoweredProgram(program, codes, lw.global_names, lw.global_index, inits,
                          lw.records, lw.record_names, codes[program.entry])
