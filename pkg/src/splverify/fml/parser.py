"""Recursive-descent parser for ``.fml`` feature modules and ``.spec`` automata."""

from __future__ import annotations

from typing import Optional

from ..errors import DuplicateNameError, FMLSyntaxError
from . import ast as A
from .lexer import Token, tokenize

_BINARY_LEVELS = [
    ("||",),
    ("&&",),
    ("==", "!="),
    ("<", "<=", ">", ">="),
    ("+", "-"),
    ("*", "/", "%"),
]


class Parser:
    def __init__(self, source: str, file: str = ""):
        self.file = file
        self.tokens = tokenize(source, file)
        self.i = 0

    # -- token helpers ------------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.tokens[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.tokens[min(self.i + k, len(self.tokens) - 1)]

    def pos(self, tok: Optional[Token] = None) -> A.Pos:
        tok = tok or self.tok
        return A.Pos(tok.line, tok.col, self.file)

    def error(self, message: str, tok: Optional[Token] = None):
        tok = tok or self.tok
        raise FMLSyntaxError(message, tok.line, tok.col, self.file)

    def at(self, text: str) -> bool:
        return self.tok.text == text and self.tok.kind in ("op", "kw")

    def accept(self, text: str) -> bool:
        if self.at(text):
            self.i += 1
            return True
        return False

    def expect(self, text: str) -> Token:
        if not self.at(text):
            found = self.tok.text or "end of input"
            self.error(f"expected {text!r}, found {found!r}")
        tok = self.tok
        self.i += 1
        return tok

    def ident(self) -> str:
        if self.tok.kind != "ident":
            self.error(f"expected identifier, found {self.tok.text or 'end of input'!r}")
        text = self.tok.text
        self.i += 1
        return text

    def integer(self) -> int:
        sign = -1 if self.accept("-") else 1
        if self.tok.kind != "int":
            self.error("expected integer literal")
        value = int(self.tok.text)
        self.i += 1
        return sign * value

    # -- types --------------------------------------------------------------

    def at_type(self) -> bool:
        return self.tok.kind == "kw" and self.tok.text in ("int", "bool", "symbol", "void", "struct", "char")

    def type(self) -> A.Type:
        t = self.tok
        if self.accept("struct"):
            name = self.ident()
            self.expect("*")
            return A.ref(name)
        if self.accept("char"):
            self.expect("*")
            return A.SYMBOL
        if t.text in ("int", "bool", "symbol", "void") and t.kind == "kw":
            self.i += 1
            return A.Type(t.text)
        self.error(f"expected a type, found {t.text!r}")

    # -- expressions --------------------------------------------------------

    def expr(self, level: int = 0) -> A.Expr:
        if level == len(_BINARY_LEVELS):
            return self.unary()
        left = self.expr(level + 1)
        while self.tok.kind == "op" and self.tok.text in _BINARY_LEVELS[level]:
            op_tok = self.tok
            self.i += 1
            right = self.expr(level + 1)
            left = A.Binary(op_tok.text, left, right, self.pos(op_tok))
        return left

    def unary(self) -> A.Expr:
        t = self.tok
        if t.kind == "op" and t.text in ("!", "-"):
            self.i += 1
            operand = self.unary()
            if t.text == "-" and isinstance(operand, A.IntLit):
                return A.IntLit(-operand.value, self.pos(t))
            return A.Unary(t.text, operand, self.pos(t))
        return self.postfix()

    def postfix(self) -> A.Expr:
        e = self.primary()
        while self.at("->"):
            t = self.tok
            self.i += 1
            e = A.FieldRef(e, self.ident(), self.pos(t))
        return e

    def args(self) -> tuple:
        self.expect("(")
        out = []
        if not self.at(")"):
            out.append(self.expr())
            while self.accept(","):
                out.append(self.expr())
        self.expect(")")
        return tuple(out)

    def primary(self) -> A.Expr:
        t = self.tok
        p = self.pos(t)
        if t.kind == "int":
            self.i += 1
            return A.IntLit(int(t.text), p)
        if t.kind == "string":
            self.i += 1
            return A.SymLit(t.text, p)
        if t.kind == "ident":
            self.i += 1
            if self.at("("):
                return A.Call(t.text, self.args(), p)
            return A.Var(t.text, p)
        if self.accept("true"):
            return A.BoolLit(True, p)
        if self.accept("false"):
            return A.BoolLit(False, p)
        if self.accept("null"):
            return A.NullLit(p)
        if self.accept("original"):
            return A.Original(self.args(), p)
        if self.accept("nondet"):
            self.expect("(")
            lo = self.integer()
            self.expect(",")
            hi = self.integer()
            self.expect(")")
            if lo > hi:
                self.error(f"nondet bounds out of order: {lo} > {hi}", t)
            return A.Nondet(lo, hi, p)
        if self.accept("new"):
            self.accept("struct")
            return A.New(self.ident(), p)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        self.error(f"unexpected {t.text or 'end of input'!r} in expression")

    # -- statements ---------------------------------------------------------

    def block(self) -> tuple:
        self.expect("{")
        body = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("unterminated block")
            body.append(self.stmt())
        self.expect("}")
        return tuple(body)

    def body_or_stmt(self) -> tuple:
        if self.at("{"):
            return self.block()
        return (self.stmt(),)

    def stmt(self) -> A.Stmt:
        t = self.tok
        p = self.pos(t)
        if self.at("{"):
            return A.Block(self.block(), p)
        if self.accept("if"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            then = self.body_or_stmt()
            orelse = None
            if self.accept("else"):
                orelse = self.body_or_stmt()
            return A.If(cond, then, orelse, p)
        if self.accept("while"):
            self.expect("(")
            cond = self.expr()
            self.expect(")")
            if not self.accept("bound"):
                self.error("while loops need a static bound: while (cond) bound N { ... }", t)
            n = self.integer()
            if n < 0:
                self.error("loop bound must be non-negative", t)
            return A.While(cond, n, self.body_or_stmt(), p)
        if self.accept("return"):
            value = None if self.at(";") else self.expr()
            self.expect(";")
            return A.Return(value, p)
        if self.accept("fail"):
            self.expect(";")
            return A.Fail(p)
        if self.at_type():
            ty = self.type()
            name = self.ident()
            init = self.expr() if self.accept("=") else None
            self.expect(";")
            return A.VarDecl(ty, name, init, p)
        e = self.expr()
        if self.accept("="):
            if not isinstance(e, (A.Var, A.FieldRef)):
                self.error("left side of assignment must be a variable or field", t)
            value = self.expr()
            self.expect(";")
            return A.Assign(e, value, p)
        self.expect(";")
        if not isinstance(e, (A.Call, A.Original)):
            self.error("expression statement must be a call", t)
        return A.ExprStmt(e, p)

    # -- declarations -------------------------------------------------------

    def record_body(self, name: str, p: A.Pos) -> tuple:
        self.expect("{")
        fields = []
        while not self.at("}"):
            fp = self.pos()
            ty = self.type()
            fields.append(A.FieldDecl(self.ident(), ty, fp))
            while self.accept(","):
                fields.append(A.FieldDecl(self.ident(), ty, self.pos()))
            self.expect(";")
        self.expect("}")
        self.accept(";")
        _check_unique([f.name for f in fields], f"field of struct {name}")
        return tuple(fields)

    def decl(self) -> list:
        """One top-level declaration; a comma list of globals yields several."""
        p = self.pos()
        if self.at("struct") and self.peek(2).text == "{":
            self.i += 1
            name = self.ident()
            return [A.RecordDecl(name, self.record_body(name, p), p)]
        ty = self.type()
        name = self.ident()
        if self.at("("):
            self.expect("(")
            params = []
            if not self.at(")"):
                while True:
                    pp = self.pos()
                    pty = self.type()
                    params.append(A.Param(self.ident(), pty, pp))
                    if not self.accept(","):
                        break
            self.expect(")")
            _check_unique([q.name for q in params], f"parameter of {name}")
            return [A.FunctionDecl(name, tuple(params), ty, self.block(), p)]
        if ty.kind == "void":
            self.error("variables cannot have type void")
        out = []
        while True:
            init = None
            if self.accept("="):
                init = self.primary() if not self.at("-") else self.unary()
                if not isinstance(init, (A.IntLit, A.BoolLit, A.SymLit, A.NullLit)):
                    self.error("global initializers must be literals")
            out.append(A.GlobalDecl(ty, name, init, p))
            if not self.accept(","):
                break
            p = self.pos()
            name = self.ident()
        self.expect(";")
        return out

    def feature_module(self, name: Optional[str] = None) -> A.FeatureModule:
        p = self.pos()
        if self.accept("feature"):
            declared = self.ident()
            self.expect(";")
            name = name or declared
        decls = []
        while self.tok.kind != "eof":
            decls.extend(self.decl())
        _check_unique([d.name for d in decls if not isinstance(d, A.RecordDecl)], "declaration")
        _check_unique([d.name for d in decls if isinstance(d, A.RecordDecl)], "struct")
        for f in (d for d in decls if isinstance(d, A.FunctionDecl)):
            _check_original_args(f)
        return A.FeatureModule(name or "", tuple(decls), 0, p)

    # -- automata -----------------------------------------------------------

    def automaton(self) -> A.Automaton:
        p = self.pos()
        self.expect("automaton")
        name = self.ident()
        self.expect("{")
        shadows, intro, has_intro = [], [], False
        if self.at("introduction"):
            self.i += 1
            has_intro = True
            self.expect("{")
            while self.at("shadow"):
                sp = self.pos()
                self.i += 1
                self.expect("struct")
                rec = self.ident()
                shadows.append(A.ShadowDecl(rec, self.record_body(rec, sp), sp))
            while not self.at("}"):
                if self.tok.kind == "eof":
                    self.error("unterminated introduction")
                if self.at("shadow"):
                    self.error("shadow declarations must precede other introductions")
                intro.extend(self.decl())
            self.expect("}")
        intercepts = []
        while not self.at("}"):
            if self.at("introduction"):
                self.error("at most one introduction block per automaton")
            intercepts.append(self.intercept())
        close = self.expect("}")
        if not intercepts:
            self.error(f"automaton {name} declares no intercept", close)
        _check_unique([d.name for d in intro], f"introduction in automaton {name}")
        return A.Automaton(name, tuple(intercepts), tuple(shadows), tuple(intro), has_intro, p)

    def intercept(self) -> A.Intercept:
        p = self.pos()
        if self.accept("before"):
            position = "before"
            if self.tok.kind == "ident" and self.peek().text == "=":
                self.error("a before intercept cannot bind a return value")
        elif self.accept("after"):
            position = "after"
        else:
            self.error(f"expected 'before' or 'after', found {self.tok.text!r}")
        binding = None
        if position == "after" and self.tok.kind == "ident" and self.peek().text == "=":
            binding = self.ident()
            self.expect("=")
            ret = self.type()
            fname = self.ident()
        else:
            ret = self.type()
            first = self.ident()
            if self.accept("="):
                if position == "before":
                    self.error("a before intercept cannot bind a return value")
                binding, fname = first, self.ident()
            else:
                fname = first
        self.expect("(")
        params = []
        if not self.at(")"):
            while True:
                pp = self.pos()
                pname = self.ident()
                self.expect(":")
                params.append(A.EventParam(pname, self.type(), pp))
                if not self.accept(","):
                    break
        self.expect(")")
        _check_unique([q.name for q in params if q.name != "_"], f"event parameter of {fname}")
        body = self.block()
        return A.Intercept(position, ret, fname, tuple(params), body, binding, p)

    def spec_file(self) -> list[A.Automaton]:
        out = []
        while self.tok.kind != "eof":
            out.append(self.automaton())
        _check_unique([a.name for a in out], "automaton")
        return out


def _check_unique(names, what: str) -> None:
    seen = set()
    for n in names:
        if n in seen:
            raise DuplicateNameError(f"duplicate {what} {n!r}")
        seen.add(n)


def _check_original_args(f: A.FunctionDecl) -> None:
    for node in A.walk(f.body):
        if isinstance(node, A.Original) and len(node.args) != len(f.params):
            raise FMLSyntaxError(
                f"original(...) in {f.name} passes {len(node.args)} arguments, expected {len(f.params)}",
                node.pos.line, node.pos.col, node.pos.file)


def parse_feature_module(source: str, name: Optional[str] = None, file: str = "") -> A.FeatureModule:
    return Parser(source, file).feature_module(name)


def parse_automata(source: str, file: str = "") -> list[A.Automaton]:
    return Parser(source, file).spec_file()


def parse_automaton(source: str, file: str = "") -> A.Automaton:
    autos = parse_automata(source, file)
    if len(autos) != 1:
        raise FMLSyntaxError(f"expected exactly one automaton, found {len(autos)}", 1, 1, file)
    return autos[0]
