"""Whole programs (composed products, woven programs, simulators) and type checking."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from . import ast as A
from . import printer


@dataclass
class HookInfo:
    automaton: str
    feature: str
    position: str
    function: str
    index: int


@dataclass
class Program:
    records: dict = field(default_factory=dict)      # name -> RecordDecl
    globals: dict = field(default_factory=dict)      # name -> GlobalDecl
    functions: dict = field(default_factory=dict)    # name -> FunctionDecl
    entry: str = "main"
    provenance: dict = field(default_factory=dict)   # "function:f" / "field:r.x" / ... -> feature
    hooks: dict = field(default_factory=dict)        # hook function name -> HookInfo
    feature_vars: dict = field(default_factory=dict)  # feature -> global variable name
    features: tuple = ()                             # full feature list (simulators)
    selection: Optional[frozenset] = None            # fixed feature selection (configured simulators)
    automata: tuple = ()                             # names of woven automata
    feature_model_fn: str = ""                       # simulators: name of feature_model()
    formula_text: str = ""                           # simulators: the encoded formula

    @property
    def decls(self) -> list:
        return [*self.records.values(), *self.globals.values(), *self.functions.values()]

    def feature_of_function(self, name: str) -> str:
        return self.provenance.get(f"function:{name}", "")

    def copy(self) -> "Program":
        return Program(dict(self.records), dict(self.globals), dict(self.functions), self.entry,
                       dict(self.provenance), dict(self.hooks), dict(self.feature_vars),
                       self.features, self.selection, self.automata,
                       self.feature_model_fn, self.formula_text)

    def text(self) -> str:
        return printer.decls(self.decls)


# -- type checking ------------------------------------------------------------

def _compatible(expected: A.Type, actual: A.Type) -> bool:
    if expected == actual:
        return True
    if expected.is_scalar and actual.is_scalar:
        return True
    if expected.kind == "ref" and actual.kind == "null":
        return True
    return False


NULL_T = A.Type("null")


class _Checker:
    def __init__(self, program: Program, allow_fail=frozenset(), extra_fields=None):
        self.p = program
        self.errors: list[str] = []
        self.allow_fail = allow_fail
        self.extra_fields = extra_fields or {}

    def err(self, node, msg: str) -> None:
        where = getattr(node, "pos", A.NOPOS)
        self.errors.append(f"{where}: {msg}" if where.line else msg)

    def field_type(self, record: str, name: str) -> Optional[A.Type]:
        rec = self.p.records.get(record)
        if rec is None:
            return None
        for f in rec.fields:
            if f.name == name:
                return f.type
        return self.extra_fields.get((record, name))

    def lookup(self, scopes, name):
        for scope in reversed(scopes):
            if name in scope:
                return scope[name]
        g = self.p.globals.get(name)
        return g.type if g is not None else None

    def expr(self, e, scopes) -> Optional[A.Type]:
        if isinstance(e, A.IntLit):
            return A.INT
        if isinstance(e, A.BoolLit):
            return A.BOOL
        if isinstance(e, A.SymLit):
            return A.SYMBOL
        if isinstance(e, A.NullLit):
            return NULL_T
        if isinstance(e, A.Nondet):
            return A.INT
        if isinstance(e, A.Var):
            t = self.lookup(scopes, e.name)
            if t is None:
                self.err(e, f"unresolved name {e.name!r}")
            return t
        if isinstance(e, A.New):
            if e.record not in self.p.records:
                self.err(e, f"unknown struct {e.record!r}")
                return None
            return A.ref(e.record)
        if isinstance(e, A.FieldRef):
            t = self.expr(e.obj, scopes)
            if t is None:
                return None
            if t.kind != "ref":
                self.err(e, f"-> applied to non-reference of type {t}")
                return None
            ft = self.field_type(t.record, e.name)
            if ft is None:
                self.err(e, f"struct {t.record} has no field {e.name!r}")
            return ft
        if isinstance(e, A.Unary):
            t = self.expr(e.operand, scopes)
            if t is not None and not t.is_scalar:
                self.err(e, f"operator {e.op} needs int or bool, got {t}")
            return A.BOOL if e.op == "!" else A.INT
        if isinstance(e, A.Binary):
            lt, rt = self.expr(e.left, scopes), self.expr(e.right, scopes)
            if lt is None or rt is None:
                return A.BOOL if e.op in ("==", "!=", "<", "<=", ">", ">=", "&&", "||") else A.INT
            if e.op in ("==", "!="):
                ok = _compatible(lt, rt) or _compatible(rt, lt)
                if not ok:
                    self.err(e, f"cannot compare {lt} with {rt}")
                return A.BOOL
            if not (lt.is_scalar and rt.is_scalar):
                self.err(e, f"operator {e.op} needs int or bool operands, got {lt} and {rt}")
            return A.BOOL if e.op in ("<", "<=", ">", ">=", "&&", "||") else A.INT
        if isinstance(e, A.Call):
            f = self.p.functions.get(e.name)
            if f is None:
                self.err(e, f"call to unresolved function {e.name!r}")
                for a in e.args:
                    self.expr(a, scopes)
                return None
            self.args(e, f.params, e.args, scopes)
            return f.ret
        if isinstance(e, A.Original):
            self.err(e, "original(...) left after composition")
            return None
        self.err(e, f"unknown expression {e!r}")
        return None

    def args(self, node, params, args, scopes) -> None:
        if len(params) != len(args):
            self.err(node, f"{getattr(node, 'name', 'call')} expects {len(params)} arguments, got {len(args)}")
        for prm, a in zip(params, args):
            t = self.expr(a, scopes)
            if t is not None and not _compatible(prm.type, t):
                self.err(a, f"argument {prm.name} expects {prm.type}, got {t}")
        for a in args[len(params):]:
            self.expr(a, scopes)

    def body(self, stmts, scopes, fn: A.FunctionDecl) -> None:
        scopes.append({})
        for s in stmts:
            self.stmt(s, scopes, fn)
        scopes.pop()

    def stmt(self, s, scopes, fn) -> None:
        if isinstance(s, A.VarDecl):
            if s.type.kind == "ref" and s.type.record not in self.p.records:
                self.err(s, f"unknown struct {s.type.record!r}")
            if s.init is not None:
                t = self.expr(s.init, scopes)
                if t is not None and not _compatible(s.type, t):
                    self.err(s, f"cannot initialise {s.type} {s.name} with {t}")
            if s.name in scopes[-1]:
                self.err(s, f"duplicate local {s.name!r}")
            scopes[-1][s.name] = s.type
        elif isinstance(s, A.Assign):
            tt = self.expr(s.target, scopes)
            vt = self.expr(s.value, scopes)
            if tt is not None and vt is not None and not _compatible(tt, vt):
                self.err(s, f"cannot assign {vt} to {tt}")
        elif isinstance(s, A.ExprStmt):
            self.expr(s.expr, scopes)
        elif isinstance(s, A.If):
            self.cond(s.cond, scopes)
            self.body(s.then, scopes, fn)
            if s.orelse is not None:
                self.body(s.orelse, scopes, fn)
        elif isinstance(s, A.While):
            self.cond(s.cond, scopes)
            self.body(s.body, scopes, fn)
        elif isinstance(s, A.Block):
            self.body(s.body, scopes, fn)
        elif isinstance(s, A.Return):
            if s.value is None:
                if fn.ret.kind != "void":
                    self.err(s, f"{fn.name} must return a {fn.ret}")
            else:
                t = self.expr(s.value, scopes)
                if fn.ret.kind == "void":
                    self.err(s, f"void function {fn.name} returns a value")
                elif t is not None and not _compatible(fn.ret, t):
                    self.err(s, f"{fn.name} returns {fn.ret}, got {t}")
        elif isinstance(s, A.Fail):
            if fn.name not in self.allow_fail:
                self.err(s, "fail is only allowed in specification code")

    def cond(self, e, scopes) -> None:
        t = self.expr(e, scopes)
        if t is not None and not t.is_scalar:
            self.err(e, f"condition must be int or bool, got {t}")

    def function(self, fn: A.FunctionDecl) -> None:
        for prm in fn.params:
            if prm.type.kind == "ref" and prm.type.record not in self.p.records:
                self.err(prm, f"unknown struct {prm.type.record!r}")
        if fn.ret.kind == "ref" and fn.ret.record not in self.p.records:
            self.err(fn, f"unknown struct {fn.ret.record!r}")
        self.body(fn.body, [{p.name: p.type for p in fn.params}], fn)

    def program(self) -> list[str]:
        for rec in self.p.records.values():
            for f in rec.fields:
                if f.type.kind == "ref" and f.type.record not in self.p.records:
                    self.err(f, f"field {rec.name}.{f.name} has unknown struct type {f.type.record!r}")
        for g in self.p.globals.values():
            if g.init is not None:
                t = self.expr(g.init, [])
                if not _compatible(g.type, t):
                    self.err(g, f"cannot initialise global {g.name} with {t}")
        for fn in self.p.functions.values():
            self.function(fn)
        entry = self.p.functions.get(self.p.entry)
        if entry is None:
            self.errors.append(f"entry function {self.p.entry!r} missing")
        elif entry.params:
            self.errors.append(f"entry function {self.p.entry!r} must take no parameters")
        return self.errors


def typecheck_program(program: Program) -> list[str]:
    """Return the list of type errors (empty when the program is well typed)."""
    return _Checker(program, allow_fail=frozenset(program.hooks)).program()


def default_value(t: A.Type):
    """Type-default value: 0, false, the empty symbol, or null."""
    if t.kind == "int":
        return 0
    if t.kind == "bool":
        return False
    if t.kind == "symbol":
        return ""
    return None
