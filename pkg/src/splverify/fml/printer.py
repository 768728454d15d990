"""Pretty printer; output re-parses to a structurally equal tree."""

from __future__ import annotations

from . import ast as A

_PREC = {"||": 1, "&&": 2, "==": 3, "!=": 3, "<": 4, "<=": 4, ">": 4, ">=": 4,
         "+": 5, "-": 5, "*": 6, "/": 6, "%": 6}
_UNARY_PREC = 7
_ATOM_PREC = 8

INDENT = "  "


def _prec(e) -> int:
    if isinstance(e, A.Binary):
        return _PREC[e.op]
    if isinstance(e, A.Unary):
        return _UNARY_PREC
    if isinstance(e, A.IntLit) and e.value < 0:
        return _UNARY_PREC
    return _ATOM_PREC


def _wrap(e, need: int) -> str:
    s = expr(e)
    return f"({s})" if _prec(e) < need else s


def expr(e) -> str:
    if isinstance(e, A.IntLit):
        return str(e.value)
    if isinstance(e, A.BoolLit):
        return "true" if e.value else "false"
    if isinstance(e, A.SymLit):
        return f'"{e.name}"'
    if isinstance(e, A.NullLit):
        return "null"
    if isinstance(e, A.Var):
        return e.name
    if isinstance(e, A.FieldRef):
        return f"{_wrap(e.obj, _ATOM_PREC)}->{e.name}"
    if isinstance(e, A.Unary):
        return f"{e.op}{_wrap(e.operand, _ATOM_PREC)}"
    if isinstance(e, A.Binary):
        p = _PREC[e.op]
        return f"{_wrap(e.left, p)} {e.op} {_wrap(e.right, p + 1)}"
    if isinstance(e, A.Call):
        return f"{e.name}({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, A.Original):
        return f"original({', '.join(expr(a) for a in e.args)})"
    if isinstance(e, A.Nondet):
        return f"nondet({e.lo}, {e.hi})"
    if isinstance(e, A.New):
        return f"new {e.record}"
    raise TypeError(f"not an expression: {e!r}")


def _type_decl(t: A.Type, name: str) -> str:
    if t.kind == "ref":
        return f"struct {t.record} *{name}"
    return f"{t.kind} {name}"


def stmts(body, depth: int) -> list[str]:
    out: list[str] = []
    for s in body:
        out.extend(stmt(s, depth))
    return out


def stmt(s, depth: int) -> list[str]:
    pad = INDENT * depth
    if isinstance(s, A.VarDecl):
        init = f" = {expr(s.init)}" if s.init is not None else ""
        return [f"{pad}{_type_decl(s.type, s.name)}{init};"]
    if isinstance(s, A.Assign):
        return [f"{pad}{expr(s.target)} = {expr(s.value)};"]
    if isinstance(s, A.ExprStmt):
        return [f"{pad}{expr(s.expr)};"]
    if isinstance(s, A.Return):
        return [f"{pad}return;" if s.value is None else f"{pad}return {expr(s.value)};"]
    if isinstance(s, A.Fail):
        return [f"{pad}fail;"]
    if isinstance(s, A.Block):
        return [f"{pad}{{", *stmts(s.body, depth + 1), f"{pad}}}"]
    if isinstance(s, A.While):
        return [f"{pad}while ({expr(s.cond)}) bound {s.bound} {{",
                *stmts(s.body, depth + 1), f"{pad}}}"]
    if isinstance(s, A.If):
        lines = [f"{pad}if ({expr(s.cond)}) {{", *stmts(s.then, depth + 1)]
        if s.orelse is None:
            lines.append(f"{pad}}}")
        else:
            lines += [f"{pad}}} else {{", *stmts(s.orelse, depth + 1), f"{pad}}}"]
        return lines
    raise TypeError(f"not a statement: {s!r}")


def record(r: A.RecordDecl, depth: int = 0, keyword: str = "struct") -> list[str]:
    pad = INDENT * depth
    lines = [f"{pad}{keyword} {r.name} {{"]
    lines += [f"{pad}{INDENT}{_type_decl(f.type, f.name)};" for f in r.fields]
    lines.append(f"{pad}}};")
    return lines


def function(f: A.FunctionDecl, depth: int = 0) -> list[str]:
    pad = INDENT * depth
    params = ", ".join(_type_decl(p.type, p.name) for p in f.params)
    head = f"{pad}{_type_decl(f.ret, f.name)}({params}) {{"
    return [head, *stmts(f.body, depth + 1), f"{pad}}}"]


def decl(d, depth: int = 0) -> list[str]:
    if isinstance(d, A.RecordDecl):
        return record(d, depth)
    if isinstance(d, A.FunctionDecl):
        return function(d, depth)
    if isinstance(d, A.GlobalDecl):
        init = f" = {expr(d.init)}" if d.init is not None else ""
        return [f"{INDENT * depth}{_type_decl(d.type, d.name)}{init};"]
    raise TypeError(f"not a declaration: {d!r}")


def decls(ds, depth: int = 0) -> str:
    chunks = ["\n".join(decl(d, depth)) for d in ds]
    return "\n\n".join(chunks) + ("\n" if chunks else "")


def intercept(ic: A.Intercept, depth: int = 1) -> list[str]:
    pad = INDENT * depth
    binding = f"{ic.return_binding} = " if ic.return_binding else ""
    params = ", ".join(f"{p.name}:{str(p.type).replace(' *', '*')}" for p in ic.params)
    head = f"{pad}{ic.position} {binding}{ic.ret} {ic.function}({params}) {{"
    return [head, *stmts(ic.body, depth + 1), f"{pad}}}"]


def automaton(a: A.Automaton) -> str:
    lines = [f"automaton {a.name} {{"]
    if a.has_introduction or a.shadows or a.intro_decls:
        lines.append(f"{INDENT}introduction {{")
        for sh in a.shadows:
            lines += record(A.RecordDecl(sh.record, sh.fields), 2, "shadow struct")
        for d in a.intro_decls:
            lines += decl(d, 2)
        lines.append(f"{INDENT}}}")
    for ic in a.intercepts:
        lines.append("")
        lines += intercept(ic)
    lines.append("}")
    return "\n".join(lines) + "\n"


def pretty_print(node) -> str:
    """Render a module, automaton, declaration list, or single node as source text."""
    if isinstance(node, A.FeatureModule):
        head = f"feature {node.name};\n\n" if node.name else ""
        return head + decls(node.decls)
    if isinstance(node, A.Automaton):
        return automaton(node)
    if isinstance(node, (list, tuple)):
        if node and all(isinstance(a, A.Automaton) for a in node):
            return "\n".join(automaton(a) for a in node)
        return decls(node)
    if isinstance(node, (A.RecordDecl, A.FunctionDecl, A.GlobalDecl)):
        return "\n".join(decl(node)) + "\n"
    if hasattr(node, "decls"):
        return decls(node.decls)
    try:
        return "\n".join(stmt(node, 0)) + "\n"
    except TypeError:
        return expr(node)
