import pytest

from splverify.errors import DuplicateNameError, FMLSyntaxError
from splverify.fml import ast as A
from splverify.fml.lexer import tokenize
from splverify.fml.parser import parse_automata, parse_automaton, parse_feature_module
from splverify.fml.printer import pretty_print


def test_tokens_and_positions():
    toks = tokenize("int x = 1; // note\n  y -> z")
    assert [t.kind for t in toks[:5]] == ["kw", "ident", "op", "int", "op"]
    arrow = next(t for t in toks if t.text == "->")
    assert (arrow.line, arrow.col) == (2, 5)
    assert toks[-1].kind == "eof"


def test_block_comment_tracks_lines():
    toks = tokenize("/* a\nb */ x")
    assert (toks[0].line, toks[0].col) == (2, 6)


def test_feature_header_and_decls():
    mod = parse_feature_module("""feature Base;
struct node { int v; struct node *next; };
int count = 0;
int add(int a, int b) { return a + b; }
void main() { struct node *n = new node; n->v = add(1, -2); }
""")
    assert mod.name == "Base"
    kinds = [type(d).__name__ for d in mod.decls]
    assert kinds == ["RecordDecl", "GlobalDecl", "FunctionDecl", "FunctionDecl"]
    assign = mod.decls[3].body[1]
    assert assign.value.args[1] == A.IntLit(-2)


def test_name_argument_overrides_header():
    assert parse_feature_module("void f() {}", name="X").name == "X"


def test_precedence():
    mod = parse_feature_module("bool f(int a) { return a + 1 * 2 < 3 || !true && a == 1; }")
    ret = mod.decls[0].body[0].value
    assert ret.op == "||"
    assert ret.left.op == "<" and ret.left.left.right.op == "*"
    assert ret.right.op == "&&"


def test_while_bound_and_nondet():
    mod = parse_feature_module("void f() { while (nondet(0, 1) == 1) bound 4 { g(); } }")
    loop = mod.decls[0].body[0]
    assert isinstance(loop, A.While) and loop.bound == 4
    assert loop.cond.left == A.Nondet(0, 1)


@pytest.mark.parametrize("src, message", [
    ("int x = 1", "expected ';'"),
    ("void f() { x + 1; }", "expression statement must be a call"),
    ("int g = h();", "initializers must be literals"),
    ("void f() { while (true) {} }", "static bound"),
    ("void f() { int x = 3 @ 4; }", "unexpected character"),
    ("void f() { original(1); }", "expected 0"),
])
def test_syntax_errors(src, message):
    with pytest.raises(FMLSyntaxError, match=message) as info:
        parse_feature_module(src, file="a.fml")
    assert str(info.value).startswith("a.fml:1:")


def test_duplicate_names():
    with pytest.raises((DuplicateNameError, FMLSyntaxError)):
        parse_feature_module("void f() {}\nvoid f() {}")


SPEC = """automaton Sent {
  introduction {
    shadow struct email { bool seen; };
    int sent = 0;
  }
  before void send(e:struct email*) { sent = sent + 1; e->seen = true; }
  after r = int deliver(_:struct email*, n:int) { if (r < 0 && n > 0) { fail; } }
}
automaton Other { before void f() { fail; } }
"""


def test_automata():
    autos = parse_automata(SPEC, "x.spec")
    assert [a.name for a in autos] == ["Sent", "Other"]
    sent = autos[0]
    assert [g.name for g in sent.globals] == ["sent"]
    assert sent.shadows[0].record == "email"
    after = sent.intercepts[1]
    assert (after.position, after.function, after.return_binding) == ("after", "deliver", "r")
    assert after.params[0].name == "_"


def test_single_automaton_entry():
    assert parse_automaton("automaton A { before void f() {} }").name == "A"


def test_intercept_needs_return_type():
    with pytest.raises(FMLSyntaxError):
        parse_automata("automaton A { before f() {} }")


def test_pretty_print_reparses():
    mod = parse_feature_module("feature F;\nint g = -3;\nvoid main() { if (g < 0) { g = g * (1 + 2); } }")
    text = pretty_print(mod)
    assert text.startswith("feature F;")
    assert parse_feature_module(text) == mod
    autos = parse_automata(SPEC)
    assert parse_automata("\n".join(pretty_print(a) for a in autos)) == autos
