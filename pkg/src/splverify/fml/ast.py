"""Abstract syntax of FML, the feature-module language, and of automata specs.

All nodes are frozen dataclasses. Source positions are carried in a ``pos``
field that does not take part in equality, so structurally identical trees
compare equal regardless of where they were parsed from.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Tuple, Union


@dataclass(frozen=True)
class Pos:
    line: int = 0
    col: int = 0
    file: str = ""

    def __str__(self) -> str:
        prefix = f"{self.file}:" if self.file else ""
        return f"{prefix}{self.line}:{self.col}"


NOPOS = Pos()


def _pos() -> Pos:
    return field(default=NOPOS, compare=False, repr=False)


# -- types ------------------------------------------------------------------

@dataclass(frozen=True)
class Type:
    """A semantic type: ``int``, ``bool``, ``symbol``, ``void`` or ``ref``."""

    kind: str
    record: Optional[str] = None

    def __str__(self) -> str:
        if self.kind == "ref":
            return f"struct {self.record} *"
        return self.kind

    @property
    def is_scalar(self) -> bool:
        return self.kind in ("int", "bool")


INT = Type("int")
BOOL = Type("bool")
SYMBOL = Type("symbol")
VOID = Type("void")


def ref(record: str) -> Type:
    return Type("ref", record)


# -- expressions ------------------------------------------------------------

@dataclass(frozen=True)
class IntLit:
    value: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class BoolLit:
    value: bool
    pos: Pos = _pos()


@dataclass(frozen=True)
class SymLit:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class NullLit:
    pos: Pos = _pos()


@dataclass(frozen=True)
class Var:
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class FieldRef:
    obj: "Expr"
    name: str
    pos: Pos = _pos()


@dataclass(frozen=True)
class Unary:
    op: str
    operand: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Binary:
    op: str
    left: "Expr"
    right: "Expr"
    pos: Pos = _pos()


@dataclass(frozen=True)
class Call:
    name: str
    args: Tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Original:
    args: Tuple["Expr", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Nondet:
    lo: int
    hi: int
    pos: Pos = _pos()


@dataclass(frozen=True)
class New:
    record: str
    pos: Pos = _pos()


Expr = Union[IntLit, BoolLit, SymLit, NullLit, Var, FieldRef, Unary, Binary,
             Call, Original, Nondet, New]


# -- statements -------------------------------------------------------------

@dataclass(frozen=True)
class VarDecl:
    type: Type
    name: str
    init: Optional[Expr] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Assign:
    target: Union[Var, FieldRef]
    value: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class ExprStmt:
    expr: Expr
    pos: Pos = _pos()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: Tuple["Stmt", ...]
    orelse: Optional[Tuple["Stmt", ...]] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class While:
    cond: Expr
    bound: int
    body: Tuple["Stmt", ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Return:
    value: Optional[Expr] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Fail:
    pos: Pos = _pos()


@dataclass(frozen=True)
class Block:
    body: Tuple["Stmt", ...]
    pos: Pos = _pos()


Stmt = Union[VarDecl, Assign, ExprStmt, If, While, Return, Fail, Block]


# -- declarations -----------------------------------------------------------

@dataclass(frozen=True)
class FieldDecl:
    name: str
    type: Type
    pos: Pos = _pos()


@dataclass(frozen=True)
class RecordDecl:
    name: str
    fields: Tuple[FieldDecl, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class Param:
    name: str
    type: Type
    pos: Pos = _pos()


@dataclass(frozen=True)
class FunctionDecl:
    name: str
    params: Tuple[Param, ...]
    ret: Type
    body: Tuple[Stmt, ...]
    pos: Pos = _pos()

    @property
    def signature(self) -> Tuple[Tuple[Type, ...], Type]:
        return tuple(p.type for p in self.params), self.ret

    @property
    def calls_original(self) -> bool:
        return any(isinstance(n, Original) for n in walk(self.body))


@dataclass(frozen=True)
class GlobalDecl:
    type: Type
    name: str
    init: Optional[Expr] = None
    pos: Pos = _pos()


Decl = Union[RecordDecl, FunctionDecl, GlobalDecl]


@dataclass(frozen=True)
class FeatureModule:
    """One feature's code: records, globals and functions in source order.

    Whether a ``struct`` block introduces a record or extends one, and whether
    a function is an introduction or a refinement, depends on the modules
    composed before it; the ``*_intros``/``*_refinements`` views below use
    the syntactic rule (a body calling ``original`` refines); the composer
    settles overrides and struct extensions against the modules below.
    """

    name: str
    decls: Tuple[Decl, ...] = ()
    order_index: int = field(default=0, compare=False)
    pos: Pos = _pos()

    @property
    def records(self) -> Tuple[RecordDecl, ...]:
        return tuple(d for d in self.decls if isinstance(d, RecordDecl))

    @property
    def functions(self) -> Tuple[FunctionDecl, ...]:
        return tuple(d for d in self.decls if isinstance(d, FunctionDecl))

    @property
    def globals(self) -> Tuple[GlobalDecl, ...]:
        return tuple(d for d in self.decls if isinstance(d, GlobalDecl))

    @property
    def function_intros(self) -> Tuple[FunctionDecl, ...]:
        return tuple(f for f in self.functions if not f.calls_original)

    @property
    def function_refinements(self) -> Tuple[FunctionDecl, ...]:
        return tuple(f for f in self.functions if f.calls_original)

    def function(self, name: str) -> Optional[FunctionDecl]:
        for f in self.functions:
            if f.name == name:
                return f
        return None


# -- specification language -------------------------------------------------

@dataclass(frozen=True)
class ShadowDecl:
    record: str
    fields: Tuple[FieldDecl, ...]
    pos: Pos = _pos()


@dataclass(frozen=True)
class EventParam:
    name: str  # "_" for a wildcard
    type: Type
    pos: Pos = _pos()


@dataclass(frozen=True)
class Intercept:
    position: str  # "before" | "after"
    ret: Type
    function: str
    params: Tuple[EventParam, ...]
    body: Tuple[Stmt, ...]
    return_binding: Optional[str] = None
    pos: Pos = _pos()


@dataclass(frozen=True)
class Automaton:
    name: str
    intercepts: Tuple[Intercept, ...]
    shadows: Tuple[ShadowDecl, ...] = ()
    intro_decls: Tuple[Decl, ...] = ()
    has_introduction: bool = False
    pos: Pos = _pos()

    @property
    def functions(self) -> Tuple[FunctionDecl, ...]:
        return tuple(d for d in self.intro_decls if isinstance(d, FunctionDecl))

    @property
    def globals(self) -> Tuple[GlobalDecl, ...]:
        return tuple(d for d in self.intro_decls if isinstance(d, GlobalDecl))

    @property
    def records(self) -> Tuple[RecordDecl, ...]:
        return tuple(d for d in self.intro_decls if isinstance(d, RecordDecl))


# -- traversal --------------------------------------------------------------

def children(node):
    if isinstance(node, (tuple, list)):
        return list(node)
    if isinstance(node, FieldRef):
        return [node.obj]
    if isinstance(node, Unary):
        return [node.operand]
    if isinstance(node, Binary):
        return [node.left, node.right]
    if isinstance(node, (Call, Original)):
        return list(node.args)
    if isinstance(node, VarDecl):
        return [node.init] if node.init is not None else []
    if isinstance(node, Assign):
        return [node.target, node.value]
    if isinstance(node, ExprStmt):
        return [node.expr]
    if isinstance(node, If):
        return [node.cond, *node.then, *(node.orelse or ())]
    if isinstance(node, While):
        return [node.cond, *node.body]
    if isinstance(node, Return):
        return [node.value] if node.value is not None else []
    if isinstance(node, Block):
        return list(node.body)
    if isinstance(node, FunctionDecl):
        return list(node.body)
    if isinstance(node, Intercept):
        return list(node.body)
    return []


def walk(node):
    """Yield ``node`` and every node below it, pre-order."""
    stack = [node]
    while stack:
        n = stack.pop()
        if not isinstance(n, (tuple, list)):
            yield n
        stack.extend(reversed(children(n)))


def map_tree(node, fn):
    """Rebuild ``node`` bottom-up, applying ``fn`` to every rebuilt node.

    Tuples are mapped element-wise; ``Type`` and ``Pos`` leaves are passed to
    ``fn`` too, so a single callback can rename types as well as names.
    """
    from dataclasses import fields, is_dataclass, replace

    if isinstance(node, tuple):
        return tuple(map_tree(n, fn) for n in node)
    if isinstance(node, Pos) or not is_dataclass(node):
        return node
    changes = {}
    for f in fields(node):
        old = getattr(node, f.name)
        if isinstance(old, (tuple,)) or (is_dataclass(old) and not isinstance(old, Pos)):
            new = map_tree(old, fn)
            if new is not old:
                changes[f.name] = new
    if changes:
        node = replace(node, **changes)
    return fn(node)
