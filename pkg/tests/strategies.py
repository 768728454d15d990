"""Hypothesis strategies for FML modules and automata, shaped like parser output."""

from hypothesis import strategies as st

from splverify.fml import ast as A
from splverify.fml.lexer import KEYWORDS

LOWER = "abcdefghijklmnopqrstuvwxyz"
UPPER = LOWER.upper()


def _word(first, rest, max_rest):
    return st.builds(lambda a, b: a + b, st.sampled_from(first), st.text(rest, max_size=max_rest))


IDENTS = _word(LOWER + "_", LOWER + "0123456789_", 5).filter(
    lambda s: s not in KEYWORDS and s not in ("requires", "excludes", "client", "email", "node", "t"))
NAMES = _word(UPPER, LOWER + UPPER, 7)
RECORDS = st.sampled_from(["client", "email", "node", "t"])

scalar_types = st.sampled_from([A.INT, A.BOOL, A.SYMBOL])
value_types = st.one_of(scalar_types, RECORDS.map(A.ref))
return_types = st.one_of(value_types, st.just(A.VOID))

ints = st.integers(-1000, 1000)
literals = st.one_of(
    ints.map(A.IntLit),
    st.booleans().map(A.BoolLit),
    st.text(LOWER + UPPER + "0123456789_ ", max_size=6).map(A.SymLit),
    st.just(A.NullLit()),
)


@st.composite
def nondets(draw):
    lo = draw(st.integers(-5, 5))
    return A.Nondet(lo, lo + draw(st.integers(0, 4)))


leaves = st.one_of(literals, IDENTS.map(A.Var), nondets(), RECORDS.map(A.New))

BINOPS = ["||", "&&", "==", "!=", "<", "<=", ">", ">=", "+", "-", "*", "/", "%"]


def _extend(children):
    return st.one_of(
        st.tuples(children, IDENTS).map(lambda t: A.FieldRef(*t)),
        st.tuples(st.sampled_from(["!", "-"]), children)
        .filter(lambda t: not (t[0] == "-" and isinstance(t[1], A.IntLit)))
        .map(lambda t: A.Unary(*t)),
        st.tuples(st.sampled_from(BINOPS), children, children).map(lambda t: A.Binary(*t)),
        st.tuples(IDENTS, st.lists(children, max_size=3).map(tuple)).map(lambda t: A.Call(*t)),
    )


exprs = st.recursive(leaves, _extend, max_leaves=6)
calls = st.tuples(IDENTS, st.lists(exprs, max_size=3).map(tuple)).map(lambda t: A.Call(*t))
targets = st.one_of(IDENTS.map(A.Var), st.tuples(exprs, IDENTS).map(lambda t: A.FieldRef(*t)))

simple_stmts = st.one_of(
    st.tuples(value_types, IDENTS, st.none() | exprs).map(lambda t: A.VarDecl(*t)),
    st.tuples(targets, exprs).map(lambda t: A.Assign(*t)),
    calls.map(A.ExprStmt),
    st.one_of(st.none(), exprs).map(A.Return),
    st.just(A.Fail()),
)


def _stmt_extend(children):
    body = st.lists(children, max_size=3).map(tuple)
    return st.one_of(
        st.tuples(exprs, body, st.none() | body).map(lambda t: A.If(*t)),
        st.tuples(exprs, st.integers(0, 9), body).map(lambda t: A.While(*t)),
        body.map(A.Block),
    )


stmts = st.recursive(simple_stmts, _stmt_extend, max_leaves=5)
bodies = st.lists(stmts, max_size=4).map(tuple)


@st.composite
def fields(draw):
    names = draw(st.lists(IDENTS, min_size=1, max_size=4, unique=True))
    return tuple(A.FieldDecl(n, draw(value_types)) for n in names)


@st.composite
def functions(draw, name):
    pnames = draw(st.lists(IDENTS, max_size=3, unique=True))
    params = tuple(A.Param(n, draw(value_types)) for n in pnames)
    body = draw(bodies)
    if draw(st.booleans()):
        orig = A.Original(tuple(A.Var(n) for n in pnames))
        at = draw(st.integers(0, len(body)))
        body = body[:at] + (A.ExprStmt(orig),) + body[at:]
    return A.FunctionDecl(name, params, draw(return_types), body)


@st.composite
def globals_(draw, name):
    ty = draw(value_types)
    init = draw(st.none() | literals)
    return A.GlobalDecl(ty, name, init)


@st.composite
def decl_lists(draw, max_size=5):
    names = draw(st.lists(IDENTS, max_size=max_size, unique=True))
    out = []
    for n in names:
        kind = draw(st.sampled_from(["function", "global"]))
        out.append(draw(functions(n)) if kind == "function" else draw(globals_(n)))
    recs = draw(st.lists(RECORDS, max_size=2, unique=True))
    for r in recs:
        out.insert(draw(st.integers(0, len(out))), A.RecordDecl(r, draw(fields())))
    return tuple(out)


@st.composite
def modules(draw):
    name = draw(st.none() | NAMES)
    return A.FeatureModule(name or "", draw(decl_lists()))


@st.composite
def intercepts(draw):
    position = draw(st.sampled_from(["before", "after"]))
    names = draw(st.lists(IDENTS, max_size=3, unique=True))
    params = tuple(A.EventParam(n if draw(st.booleans()) else "_", draw(value_types)) for n in names)
    # wildcards may repeat; named parameters stay unique
    binding = draw(st.none() | IDENTS) if position == "after" else None
    return A.Intercept(position, draw(return_types), draw(IDENTS), params, draw(bodies), binding)


@st.composite
def automata(draw, name=None):
    name = name or draw(NAMES)
    has_intro = draw(st.booleans())
    shadows, intro = (), ()
    if has_intro:
        recs = draw(st.lists(RECORDS, max_size=2, unique=True))
        shadows = tuple(A.ShadowDecl(r, draw(fields())) for r in recs)
        intro = draw(decl_lists(max_size=3))
    ics = tuple(draw(st.lists(intercepts(), min_size=1, max_size=3)))
    return A.Automaton(name, ics, shadows, intro, has_intro)


@st.composite
def spec_files(draw):
    names = draw(st.lists(NAMES, min_size=1, max_size=3, unique=True))
    return [draw(automata(n)) for n in names]
