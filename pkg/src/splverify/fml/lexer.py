from __future__ import annotations

import re
from dataclasses import dataclass

from ..errors import FMLSyntaxError

KEYWORDS = {
    "struct", "void", "int", "bool", "symbol", "char", "original", "nondet",
    "if", "else", "while", "bound", "return", "true", "false", "null", "new",
    "fail", "feature", "automaton", "introduction", "shadow", "before", "after",
}

_TOKEN_RE = re.compile(r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*|\#[^\n]*)
  | (?P<block>/\*.*?\*/)
  | (?P<int>\d+)
  | (?P<ident>[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"[^"\n]*")
  | (?P<op>->|==|!=|<=|>=|&&|\|\||[-+*/%<>=!(){};,:])
""", re.VERBOSE | re.DOTALL)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "ident", "kw", "string", "op", "eof"
    text: str
    line: int
    col: int


def tokenize(source: str, file: str = "") -> list[Token]:
    tokens: list[Token] = []
    line, line_start, i = 1, 0, 0
    n = len(source)
    while i < n:
        m = _TOKEN_RE.match(source, i)
        if m is None:
            raise FMLSyntaxError(f"unexpected character {source[i]!r}", line, i - line_start + 1, file)
        kind = m.lastgroup
        text = m.group()
        col = i - line_start + 1
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind == "block":
            line += text.count("\n")
            if "\n" in text:
                line_start = i + text.rindex("\n") + 1
        elif kind in ("ws", "comment"):
            pass
        elif kind == "ident":
            tokens.append(Token("kw" if text in KEYWORDS else "ident", text, line, col))
        elif kind == "string":
            tokens.append(Token("string", text[1:-1], line, col))
        else:
            tokens.append(Token(kind, text, line, col))
        i = m.end()
    tokens.append(Token("eof", "", line, i - line_start + 1))
    return tokens
